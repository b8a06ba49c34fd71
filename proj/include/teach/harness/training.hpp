#pragma once

#include "teach/agent.hpp"
#include "teach/goal_mdp.hpp"
#include "teach/harness/checkpoint.hpp"
#include "teach/harness/config.hpp"
#include "teach/harness/metrics.hpp"
#include "teach/teacher.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace teach {

/// Training had to stop (e.g. a long streak of non-finite updates).
class RuntimeAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual Vec action(const Vec& state, const Vec& goal) const = 0;
};

/// Deterministic actor output, no exploration noise.
class AgentPolicy final : public Policy {
public:
    explicit AgentPolicy(const AgentState& agent) : agent_(agent) {}
    Vec action(const Vec& state, const Vec& goal) const override { return policy_action(agent_, state, goal); }

private:
    const AgentState& agent_;
};

class AgentValueProbe final : public ValueProbe {
public:
    AgentValueProbe(const AgentState& agent, bool use_target) : agent_(agent), use_target_(use_target) {}
    RowVec policy_values(const Mat& states, const Vec& goal) const override {
        return teach::policy_values(agent_, states, goal, use_target_);
    }

private:
    const AgentState& agent_;
    bool use_target_;
};

class EnsembleValueProbe final : public ValueProbe {
public:
    EnsembleValueProbe(const CriticEnsemble& ensemble, std::size_t member, const AgentState& agent)
        : ensemble_(ensemble), member_(member), agent_(agent) {}
    RowVec policy_values(const Mat& states, const Vec& goal) const override {
        return ensemble_policy_values(ensemble_, member_, agent_, states, goal);
    }

private:
    const CriticEnsemble& ensemble_;
    std::size_t member_;
    const AgentState& agent_;
};

struct EvaluationResult {
    double success_rate = 0.0;
    double mean_return = 0.0;
};

/// Runs `episodes` deterministic episodes, each toward a goal drawn
/// uniformly from `goals`. An episode succeeds if any step earns reward 0.
EvaluationResult evaluate(const Policy& policy, Environment& env, std::span<const Vec> goals, int episodes,
                          Rng& rng);

/// Random stream for the index-th evaluation of a run.
Rng evaluation_rng(std::uint64_t seed, long index);

std::unique_ptr<Environment> make_environment(const RunConfig& config);
AgentConfig agent_config_for(const RunConfig& config, const MultiGoalSpec& spec);

struct TrainResult {
    std::vector<MetricsRow> rows;
    Checkpoint final_state;
    std::filesystem::path metrics_path;
    std::filesystem::path checkpoint_path;
};

/// Runs the teacher-student loop and writes metrics.jsonl, timing.jsonl,
/// checkpoint.bin (and curriculum.tsv when dumping) into config.output_dir.
TrainResult train(const RunConfig& config);

}  // namespace teach
