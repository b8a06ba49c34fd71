#include "teach/harness/curves.hpp"

#include "teach/common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace teach {

std::vector<CurveSeries> summarize_runs(const std::vector<std::vector<MetricsRow>>& runs) {
    // method -> step -> success values across runs
    std::map<std::string, std::map<long, std::vector<double>>> grouped;
    for (const auto& run : runs)
        for (const auto& row : run) grouped[row.method][row.step].push_back(row.success_rate);
    if (grouped.empty()) throw ConfigError("no metrics rows in the given runs");

    std::vector<CurveSeries> out;
    for (const auto& [method, by_step] : grouped) {
        CurveSeries s;
        s.method = method;
        for (const auto& [step, values] : by_step) {
            const double n = static_cast<double>(values.size());
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= n;
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            s.steps.push_back(step);
            s.mean.push_back(mean);
            s.std.push_back(std::sqrt(var / n));
            s.runs.push_back(static_cast<int>(values.size()));
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CurveSeries> summarize_run_dirs(std::span<const std::filesystem::path> run_dirs) {
    std::vector<std::vector<MetricsRow>> runs;
    for (const auto& dir : run_dirs) runs.push_back(read_metrics(dir / "metrics.jsonl"));
    return summarize_runs(runs);
}

std::string curves_csv(const std::vector<CurveSeries>& series) {
    std::set<long> all_steps;
    for (const auto& s : series) all_steps.insert(s.steps.begin(), s.steps.end());
    std::ostringstream out;
    out.precision(10);
    out << "step";
    for (const auto& s : series) out << ',' << s.method << "_mean," << s.method << "_std";
    out << '\n';
    for (long step : all_steps) {
        out << step;
        for (const auto& s : series) {
            const auto it = std::lower_bound(s.steps.begin(), s.steps.end(), step);
            if (it != s.steps.end() && *it == step) {
                const auto i = static_cast<std::size_t>(it - s.steps.begin());
                out << ',' << s.mean[i] << ',' << s.std[i];
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string curves_svg(const std::vector<CurveSeries>& series) {
    constexpr double width = 720, height = 440;
    constexpr double left = 64, right = 170, top = 24, bottom = 52;
    constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                       "#ff7f0e", "#8c564b", "#17becf"};
    long max_step = 1;
    for (const auto& s : series)
        if (!s.steps.empty()) max_step = std::max(max_step, s.steps.back());
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto x_of = [&](long step) { return left + plot_w * static_cast<double>(step) / static_cast<double>(max_step); };
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = k / 4.0;
        svg << "<line x1=\"" << left << "\" y1=\"" << y_of(v) << "\" x2=\"" << left + plot_w << "\" y2=\""
            << y_of(v) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << v
            << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const long step = max_step * k / 4;
        svg << "<text x=\"" << x_of(step) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
            << step << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">environment steps</text>\n";
    svg << "<text transform=\"translate(16," << top + plot_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">success rate</text>\n";

    for (std::size_t m = 0; m < series.size(); ++m) {
        const auto& s = series[m];
        const char* color = palette[m % std::size(palette)];
        if (s.steps.empty()) continue;
        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.steps.size(); ++i)
            svg << x_of(s.steps[i]) << ',' << y_of(s.mean[i] + s.std[i]) << ' ';
        for (std::size_t i = s.steps.size(); i-- > 0;)
            svg << x_of(s.steps[i]) << ',' << y_of(s.mean[i] - s.std[i]) << ' ';
        svg << "\"/>\n";
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.steps.size(); ++i) svg << x_of(s.steps[i]) << ',' << y_of(s.mean[i]) << ' ';
        svg << "\"/>\n";
        const double ly = top + 16 + 20.0 * static_cast<double>(m);
        svg << "<line x1=\"" << left + plot_w + 14 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 38
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
        svg << "<text x=\"" << left + plot_w + 44 << "\" y=\"" << ly + 4 << "\">" << s.method << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

double area_under_curve(std::span<const long> steps, std::span<const double> values) {
    if (steps.size() != values.size()) throw ContractError("area_under_curve: length mismatch");
    double area = 0.0;
    for (std::size_t i = 1; i < steps.size(); ++i)
        area += 0.5 * (values[i] + values[i - 1]) * static_cast<double>(steps[i] - steps[i - 1]);
    return area;
}

}  // namespace teach
