// teach: command-line entry point for training, evaluation, plotting and the
// variance-KL report.

#include "teach/harness/checkpoint.hpp"
#include "teach/harness/config.hpp"
#include "teach/harness/curves.hpp"
#include "teach/harness/training.hpp"
#include "teach/kl_validator.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("teach");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("TEACH_LOG")) {
        const std::string v(level);
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring TEACH_LOG='{}' (expected error, info or debug)", v);
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw teach::ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Temporal-variance curriculum for goal-conditioned RL"};
    app.require_subcommand(1);

    std::string train_config;
    std::optional<std::uint64_t> train_seed;
    std::optional<std::string> train_out;
    auto* train = app.add_subcommand("train", "Train a DDPG+HER student under a teacher");
    train->add_option("--config", train_config, "Run configuration file")->required();
    train->add_option("--seed", train_seed, "Override the configured seed");
    train->add_option("--out", train_out, "Override the output directory");

    std::string eval_checkpoint;
    std::string eval_config;
    std::optional<int> eval_episodes;
    auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint.bin written by train")->required();
    eval->add_option("--config", eval_config, "Run configuration file")->required();
    eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

    std::vector<std::string> plot_runs;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "Aggregate run directories into CSV and SVG curves");
    plot->add_option("--runs", plot_runs, "Run directories")->required()->expected(1, -1);
    plot->add_option("--out", plot_out, "Output SVG path (CSV is written alongside)")->required();

    int kl_actions = 8;
    double kl_alpha = 1.0;
    int kl_trials = 1000;
    std::uint64_t kl_seed = 0;
    std::vector<double> kl_scales = {0.2, 0.1, 0.05, 0.025};
    auto* kl = app.add_subcommand("kl-report", "Compare exact KL with the Q-variance approximation");
    kl->add_option("--actions", kl_actions, "Number of discrete actions")->check(CLI::Range(2, 1 << 20));
    kl->add_option("--alpha", kl_alpha, "Softmax temperature")->check(CLI::PositiveNumber);
    kl->add_option("--trials", kl_trials, "Trials per scale")->check(CLI::Range(100, 1 << 30));
    kl->add_option("--seed", kl_seed, "Random seed");
    kl->add_option("--scales", kl_scales, "Descending perturbation scales")->expected(1, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train) {
            teach::RunConfig config = teach::load_config(train_config);
            if (train_seed) config.seed = *train_seed;
            if (train_out) config.output_dir = *train_out;
            const auto result = teach::train(config);
            const double final_success = result.rows.empty() ? 0.0 : result.rows.back().success_rate;
            std::cout << "final success rate " << final_success << "\n"
                      << "metrics " << result.metrics_path.string() << "\n"
                      << "checkpoint " << result.checkpoint_path.string() << "\n";
        } else if (*eval) {
            const teach::RunConfig config = teach::load_config(eval_config);
            const teach::Checkpoint ck = teach::load_checkpoint(eval_checkpoint);
            auto env = teach::make_environment(config);
            const teach::AgentPolicy policy(ck.agent);
            teach::Rng rng = teach::evaluation_rng(config.seed, 0);
            const auto r = teach::evaluate(policy, *env, ck.teacher.goals,
                                           eval_episodes.value_or(config.eval_episodes), rng);
            std::cout << "success_rate\t" << r.success_rate << "\nmean_return\t" << r.mean_return << "\n";
        } else if (*plot) {
            std::vector<std::filesystem::path> dirs(plot_runs.begin(), plot_runs.end());
            const auto series = teach::summarize_run_dirs(dirs);
            std::filesystem::path svg_path(plot_out);
            write_file(svg_path, teach::curves_svg(series));
            write_file(std::filesystem::path(svg_path).replace_extension(".csv"), teach::curves_csv(series));
        } else if (*kl) {
            const auto rows = teach::approximation_report(kl_actions, kl_alpha, kl_scales, kl_trials, kl_seed);
            std::cout << "sigma\tmean_exact_kl\tmean_approx_kl\tmean_relative_error\tmean_shift_error\n";
            std::cout.precision(10);
            for (const auto& r : rows)
                std::cout << r.scale << '\t' << r.mean_exact_kl << '\t' << r.mean_approx_kl << '\t'
                          << r.mean_relative_error << '\t' << r.mean_shift_error << '\n';
        }
    } catch (const teach::ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return kExitConfig;
    } catch (const teach::ParseError& e) {
        spdlog::error("parse error: {}", e.what());
        return kExitConfig;
    } catch (const teach::ContractError& e) {
        spdlog::error("invalid argument: {}", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        spdlog::error("aborted: {}", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
