#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace teach {

struct MetricsRow {
    long step = 0;
    long episode = 0;
    double success_rate = 0.0;
    double mean_return = 0.0;
    std::string method;
    double wall_seconds = 0.0;
};

// metrics.jsonl holds the deterministic fields only; wall-clock seconds go to
// a sibling timing.jsonl keyed by step so reruns stay byte-identical.
std::string metrics_json_line(const MetricsRow& row);
std::string timing_json_line(const MetricsRow& row);

MetricsRow parse_metrics_line(const std::string& line);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace teach
