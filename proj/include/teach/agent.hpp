#pragma once

#include "teach/common.hpp"
#include "teach/goal_mdp.hpp"
#include "teach/neural.hpp"

#include <functional>
#include <vector>

namespace teach {

struct AgentConfig {
    int state_dim = 2;
    int goal_dim = 2;
    int action_dim = 2;
    // Observation box used to rescale states and goals to [-1, 1] before they
    // reach the networks. Goals share the state box.
    Vec input_low;
    Vec input_high;
    int hidden_width = 256;
    int hidden_layers = 2;
    double gamma = 0.98;
    double noise_scale = 0.2;
    double random_action_prob = 0.3;
    double learning_rate = 1e-3;
};

/// Actions live in the box [-1, 1]^action_dim.
struct AgentState {
    AgentConfig config;
    MlpParams actor;   // s (+) g -> a, tanh output
    MlpParams critic;  // s (+) g (+) a -> Q, identity output
    MlpParams target_actor;
    MlpParams target_critic;
    OptimizerState actor_opt;
    OptimizerState critic_opt;
    Vec input_center;
    Vec input_scale;

    double value_floor() const { return -1.0 / (1.0 - config.gamma); }
};

AgentState make_agent(const AgentConfig& config, Rng& rng);

/// Builds an AgentConfig whose dimensions and input box match `spec`.
AgentConfig agent_config_for(const MultiGoalSpec& spec);

/// Normalized actor input, one column per (state, goal) pair.
Mat actor_inputs(const AgentState& agent, const Mat& states, const Mat& goals);
/// Critic input rows: normalized state, normalized goal, raw action.
Mat critic_inputs(const AgentState& agent, const Mat& states, const Mat& goals, const Mat& actions);

/// Deterministic policy output for one (state, goal).
Vec policy_action(const AgentState& agent, const Vec& state, const Vec& goal, bool use_target = false);

/// Behaviour action. With `explore`, a uniform random action with
/// probability random_action_prob, else policy plus clipped Gaussian noise.
Vec act(const AgentState& agent, const Vec& state, const Vec& goal, bool explore, Rng& rng);

/// Q(s, g, pi(s, g)) for every probe column against one goal.
RowVec policy_values(const AgentState& agent, const Mat& states, const Vec& goal,
                     bool use_target = false);

/// Bellman targets r + gamma * Q'(s', g, pi'(s', g)) clipped to [-1/(1-gamma), 0].
Vec critic_targets(const AgentState& agent, const TransitionBatch& batch);

struct LossAndGradient {
    double value = 0.0;
    ParamGrads grads;
};

/// Mean squared Bellman error and its gradient w.r.t. the critic.
LossAndGradient critic_loss_and_gradient(const AgentState& agent, const TransitionBatch& batch);

/// One Adam step on the critic. Returns the pre-step loss; a non-finite loss
/// or gradient leaves the agent unchanged and throws NumericError.
double update_critic(AgentState& agent, const TransitionBatch& batch);

/// Evaluates a batch of actions: fills Q values (1 x B) and dQ/da (action_dim x B).
using ActionValueFn = std::function<void(const Mat& actions, RowVec& values, Mat& action_grads)>;

/// Deterministic policy gradient for an arbitrary action-value function.
/// `value` is the mean Q; `grads` is the gradient of -mean Q w.r.t. the actor,
/// so an Adam step on it ascends Q.
LossAndGradient policy_gradient(const MlpParams& actor, const Mat& inputs, const ActionValueFn& q);

/// Gradient of -mean Q(s, g, pi(s, g)) using the agent's online critic.
LossAndGradient actor_objective_and_gradient(const AgentState& agent, const TransitionBatch& batch);

/// One Adam step ascending mean Q. Returns the pre-step mean Q.
double update_actor(AgentState& agent, const TransitionBatch& batch);

/// Polyak-averages both target networks toward the online networks.
void sync_targets(AgentState& agent, double alpha);

/// Independently initialized critics trained on the agent's batches, used to
/// measure value disagreement.
struct CriticEnsemble {
    std::vector<MlpParams> critics;
    std::vector<MlpParams> targets;
    std::vector<OptimizerState> optimizers;
};

CriticEnsemble make_critic_ensemble(const AgentState& agent, int size, Rng& rng);

/// One regression step per member toward its own target (bootstrapped with
/// the agent's target actor), followed by a Polyak sync.
void update_ensemble(CriticEnsemble& ensemble, const AgentState& agent, const TransitionBatch& batch,
                     double alpha);

/// Q_k(s, g, pi(s, g)) for member k over the probe columns.
RowVec ensemble_policy_values(const CriticEnsemble& ensemble, std::size_t member,
                              const AgentState& agent, const Mat& states, const Vec& goal);

}  // namespace teach
