#include "teach/harness/metrics.hpp"

#include "teach/common.hpp"

#include <json.hpp>

#include <fstream>

namespace teach {

std::string metrics_json_line(const MetricsRow& row) {
    nlohmann::ordered_json j;
    j["step"] = row.step;
    j["episode"] = row.episode;
    j["success_rate"] = row.success_rate;
    j["mean_return"] = row.mean_return;
    j["method"] = row.method;
    return j.dump();
}

std::string timing_json_line(const MetricsRow& row) {
    nlohmann::ordered_json j;
    j["step"] = row.step;
    j["wall_seconds"] = row.wall_seconds;
    return j.dump();
}

MetricsRow parse_metrics_line(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        MetricsRow row;
        row.step = j.at("step").get<long>();
        row.episode = j.at("episode").get<long>();
        row.success_rate = j.at("success_rate").get<double>();
        row.mean_return = j.at("mean_return").get<double>();
        row.method = j.at("method").get<std::string>();
        if (j.contains("wall_seconds")) row.wall_seconds = j["wall_seconds"].get<double>();
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed metrics line: ") + e.what());
    }
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file '" + path.string() + "'");
    std::vector<MetricsRow> rows;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) rows.push_back(parse_metrics_line(line));
    return rows;
}

}  // namespace teach
