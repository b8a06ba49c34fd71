#include "teach/harness/training.hpp"

#include "teach/her_replay.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <optional>

namespace teach {

namespace {

// Named substreams of the run seed.
enum Stream : std::uint64_t {
    kInitStream = 1,
    kActionStream = 2,
    kGoalSpaceStream = 3,
    kCurriculumStream = 4,
    kProbeStream = 5,
    kReplayStream = 6,
    kEnsembleStream = 7,
    kEvalStreamBase = 1000,
};

constexpr int kMaxFailureStreak = 100;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

EvaluationResult evaluate(const Policy& policy, Environment& env, std::span<const Vec> goals, int episodes,
                          Rng& rng) {
    if (episodes < 1) throw ContractError("evaluate: episodes must be >= 1");
    if (goals.empty()) throw ContractError("evaluate: empty goal space");
    const int horizon = env.spec().episode_length;
    EvaluationResult result;
    for (int ep = 0; ep < episodes; ++ep) {
        const Vec& goal = goals[uniform_index(rng, goals.size())];
        Vec state = env.reset(goal);
        bool success = false;
        double ret = 0.0;
        for (int h = 0; h < horizon; ++h) {
            const StepResult step = env.step(policy.action(state, goal));
            ret += step.reward;
            if (step.reward == 0.0) success = true;
            state = step.next_state;
        }
        result.success_rate += success ? 1.0 : 0.0;
        result.mean_return += ret;
    }
    result.success_rate /= episodes;
    result.mean_return /= episodes;
    return result;
}

Rng evaluation_rng(std::uint64_t seed, long index) {
    return make_rng(seed, kEvalStreamBase + static_cast<std::uint64_t>(index));
}

std::unique_ptr<Environment> make_environment(const RunConfig& config) {
    if (config.env == "point") return std::make_unique<PointReachEnv>(0.1, 0.05, 50, config.gamma);
    if (config.env == "maze") {
        MazeSpec maze = is_builtin_layout(config.layout) ? load_maze_layout(builtin_layout_text(config.layout))
                                                         : load_maze_file(config.layout);
        return std::make_unique<MazeEnv>(std::move(maze), 50, config.gamma);
    }
    throw ConfigError("unknown environment '" + config.env + "'");
}

AgentConfig agent_config_for(const RunConfig& config, const MultiGoalSpec& spec) {
    AgentConfig ac = agent_config_for(spec);
    ac.hidden_width = config.hidden_width;
    ac.hidden_layers = config.hidden_layers;
    ac.gamma = config.gamma;
    ac.noise_scale = config.noise_scale;
    ac.random_action_prob = config.random_action_prob;
    ac.learning_rate = config.lr;
    return ac;
}

TrainResult train(const RunConfig& config) {
    validate(config);
    const auto started = std::chrono::steady_clock::now();
    auto env = make_environment(config);
    auto eval_env = env->clone();
    const MultiGoalSpec& spec = env->spec();
    const int horizon = spec.episode_length;

    Rng init_rng = make_rng(config.seed, kInitStream);
    Rng action_rng = make_rng(config.seed, kActionStream);
    Rng goal_space_rng = make_rng(config.seed, kGoalSpaceStream);
    Rng curriculum_rng = make_rng(config.seed, kCurriculumStream);
    Rng probe_rng = make_rng(config.seed, kProbeStream);

    AgentState agent = make_agent(agent_config_for(config, spec), init_rng);
    std::optional<CriticEnsemble> ensemble;
    if (config.teacher.method == TeacherMethod::vds) {
        Rng ensemble_rng = make_rng(config.seed, kEnsembleStream);
        ensemble = make_critic_ensemble(agent, config.teacher.ensemble_size, ensemble_rng);
    }

    const std::vector<Vec> goals = env->sample_goal_space(config.teacher.goal_count, goal_space_rng);
    Teacher teacher(config.teacher, goals, horizon, agent.value_floor());
    ReplayBuffer buffer(static_cast<std::size_t>(config.buffer_episodes), horizon, config.her_k, spec.epsilon,
                        derive_seed(config.seed, kReplayStream));

    const std::filesystem::path out_dir(config.output_dir);
    std::filesystem::create_directories(out_dir);
    TrainResult result;
    result.metrics_path = out_dir / "metrics.jsonl";
    result.checkpoint_path = out_dir / "checkpoint.bin";
    auto metrics_out = open_output(result.metrics_path);
    auto timing_out = open_output(out_dir / "timing.jsonl");
    std::optional<std::ofstream> dump_out;
    if (config.dump_curriculum) dump_out = open_output(out_dir / "curriculum.tsv");

    const Vec start = env->start_state();
    auto draw_probes = [&](int count) -> Mat {
        if (buffer.transition_count() >= static_cast<std::size_t>(count))
            return buffer.sample_states(count, probe_rng);
        return start.replicate(1, count);
    };

    const long episodes = config.total_steps / horizon;
    const std::string method(to_string(config.teacher.method));
    long step = 0;
    long eval_index = 0;
    int failure_streak = 0;

    auto run_update = [&] {
        const SampledBatch batch = buffer.sample_batch(config.batch);
        try {
            update_critic(agent, batch.data);
            update_actor(agent, batch.data);
            sync_targets(agent, config.polyak);
            if (ensemble) update_ensemble(*ensemble, agent, batch.data, config.polyak);
            failure_streak = 0;
        } catch (const NumericError& e) {
            spdlog::warn("step {}: update skipped: {}", step, e.what());
            if (++failure_streak > kMaxFailureStreak)
                throw RuntimeAbort("more than " + std::to_string(kMaxFailureStreak) +
                                   " consecutive non-finite updates at step " + std::to_string(step));
        }
    };

    for (long e = 0; e < episodes; ++e) {
        {
            const AgentValueProbe online(agent, false);
            const AgentValueProbe target(agent, true);
            std::vector<EnsembleValueProbe> members;
            TeacherModels models{&online, &target, {}};
            if (ensemble) {
                members.reserve(ensemble->critics.size());
                for (std::size_t k = 0; k < ensemble->critics.size(); ++k) members.emplace_back(*ensemble, k, agent);
                for (const auto& m : members) models.ensemble.push_back(&m);
            }
            const bool due = teacher.due(step);
            teacher.tick(step, models, draw_probes);
            if (dump_out && due) *dump_out << teacher.dump_line(step) << '\n';
        }

        const Vec& goal = goals[teacher.select(curriculum_rng)];
        EpisodeRecord episode;
        episode.steps.reserve(horizon);
        Vec state = env->reset(goal);
        for (int h = 0; h < horizon; ++h) {
            Vec action = act(agent, state, goal, true, action_rng);
            StepResult r = env->step(action);
            episode.steps.push_back({state, std::move(action), r.reward, r.next_state, r.achieved_goal, goal});
            state = std::move(r.next_state);
            ++step;
            if (step >= config.warmup_steps && step % config.update_every == 0 && !buffer.empty()) run_update();
        }
        buffer.store_episode(episode);

        if ((e + 1) % config.eval_every == 0 || e + 1 == episodes) {
            Rng eval_rng = evaluation_rng(config.seed, eval_index++);
            const AgentPolicy policy(agent);
            const EvaluationResult ev = evaluate(policy, *eval_env, goals, config.eval_episodes, eval_rng);
            MetricsRow row;
            row.step = step;
            row.episode = e + 1;
            row.success_rate = ev.success_rate;
            row.mean_return = ev.mean_return;
            row.method = method;
            row.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            metrics_out << metrics_json_line(row) << '\n';
            timing_out << timing_json_line(row) << '\n';
            metrics_out.flush();
            spdlog::info("[{}] step {:>8} episode {:>6} success {:.3f} return {:.2f}", method, row.step,
                         row.episode, row.success_rate, row.mean_return);
            result.rows.push_back(std::move(row));
        }
    }

    result.final_state.agent = std::move(agent);
    result.final_state.teacher = teacher.snapshot();
    result.final_state.ensemble = std::move(ensemble);
    save_checkpoint(result.final_state, result.checkpoint_path);
    spdlog::debug("checkpoint written to {}", result.checkpoint_path.string());
    return result;
}

}  // namespace teach
