#pragma once

#include "teach/harness/metrics.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace teach {

/// Success rate of one teacher method aggregated over seeds.
struct CurveSeries {
    std::string method;
    std::vector<long> steps;
    std::vector<double> mean;
    std::vector<double> std;  // population standard deviation over runs
    std::vector<int> runs;    // runs contributing at each step
};

/// Groups runs by method and aggregates success rate at each logged step.
/// Throws ConfigError when no run has any metrics row.
std::vector<CurveSeries> summarize_runs(const std::vector<std::vector<MetricsRow>>& runs);

/// Reads `<dir>/metrics.jsonl` from each run directory.
std::vector<CurveSeries> summarize_run_dirs(std::span<const std::filesystem::path> run_dirs);

/// Columns: step, then <method>_mean and <method>_std per method; cells a
/// method has no data for are left empty.
std::string curves_csv(const std::vector<CurveSeries>& series);

/// Learning curves with a translucent +-1 std band per method.
std::string curves_svg(const std::vector<CurveSeries>& series);

/// Trapezoidal area under (steps, values).
double area_under_curve(std::span<const long> steps, std::span<const double> values);

}  // namespace teach
