#include "teach/agent.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace teach {

namespace {

std::vector<int> hidden_widths(const AgentConfig& c) {
    return std::vector<int>(static_cast<std::size_t>(c.hidden_layers), c.hidden_width);
}

Mat normalized(const AgentState& agent, const Mat& x) {
    return (x.colwise() - agent.input_center).array().colwise() / agent.input_scale.array();
}

Mat replicate_goal(const Vec& goal, Eigen::Index count) { return goal.replicate(1, count); }

// Gradient of the mean squared Bellman error for one critic.
LossAndGradient bellman_regression(const MlpParams& critic, const Mat& inputs, const Vec& targets) {
    const ForwardTrace trace = mlp_forward_trace(critic, inputs);
    const RowVec diff = trace.output().row(0) - targets.transpose();
    const double batch = static_cast<double>(targets.size());
    LossAndGradient out;
    out.value = diff.squaredNorm() / batch;
    const Mat upstream = (2.0 / batch) * diff;
    out.grads = mlp_backward(critic, trace, upstream).params;
    return out;
}

Vec clipped_targets(const AgentState& agent, const MlpParams& target_critic,
                    const TransitionBatch& batch) {
    const Mat next_actions =
        mlp_forward_batch(agent.target_actor, actor_inputs(agent, batch.next_states, batch.desired_goals));
    const Mat next_q = mlp_forward_batch(
        target_critic, critic_inputs(agent, batch.next_states, batch.desired_goals, next_actions));
    Vec y = batch.rewards + agent.config.gamma * next_q.row(0).transpose();
    return y.cwiseMax(agent.value_floor()).cwiseMin(0.0);
}

void check_batch(const AgentState& agent, const TransitionBatch& batch) {
    const auto& c = agent.config;
    const Eigen::Index n = batch.size();
    if (n < 1) throw ContractError("empty transition batch");
    if (batch.states.rows() != c.state_dim || batch.next_states.rows() != c.state_dim ||
        batch.desired_goals.rows() != c.goal_dim || batch.actions.rows() != c.action_dim ||
        batch.states.cols() != n || batch.next_states.cols() != n || batch.desired_goals.cols() != n ||
        batch.actions.cols() != n)
        throw ContractError("transition batch shape does not match the agent");
}

}  // namespace

AgentConfig agent_config_for(const MultiGoalSpec& spec) {
    AgentConfig c;
    c.state_dim = spec.state_dim;
    c.goal_dim = spec.goal_dim;
    c.action_dim = spec.action_dim;
    c.input_low = spec.state_low;
    c.input_high = spec.state_high;
    c.gamma = spec.gamma;
    return c;
}

AgentState make_agent(const AgentConfig& config, Rng& rng) {
    if (config.state_dim != config.goal_dim)
        throw ContractError("make_agent: goals must share the state space");
    if (config.input_low.size() != config.state_dim || config.input_high.size() != config.state_dim)
        throw ContractError("make_agent: input box does not match state_dim");
    if (config.hidden_layers < 1 || config.hidden_width < 1)
        throw ContractError("make_agent: hidden layers and width must be positive");
    if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw ContractError("make_agent: gamma must lie in [0, 1)");

    AgentState a;
    a.config = config;
    a.input_center = 0.5 * (config.input_low + config.input_high);
    a.input_scale = 0.5 * (config.input_high - config.input_low);
    for (Eigen::Index i = 0; i < a.input_scale.size(); ++i)
        if (!(a.input_scale(i) > 0.0)) a.input_scale(i) = 1.0;

    const auto hidden = hidden_widths(config);
    a.actor = make_mlp(config.state_dim + config.goal_dim, hidden, config.action_dim,
                       Activation::relu, Activation::tanh, rng);
    a.critic = make_mlp(config.state_dim + config.goal_dim + config.action_dim, hidden, 1,
                        Activation::relu, Activation::identity, rng);
    a.target_actor = a.actor;
    a.target_critic = a.critic;
    a.actor_opt = make_optimizer_state(a.actor);
    a.critic_opt = make_optimizer_state(a.critic);
    return a;
}

Mat actor_inputs(const AgentState& agent, const Mat& states, const Mat& goals) {
    if (states.cols() != goals.cols()) throw ContractError("actor_inputs: column count mismatch");
    Mat x(states.rows() + goals.rows(), states.cols());
    x.topRows(states.rows()) = normalized(agent, states);
    x.bottomRows(goals.rows()) = normalized(agent, goals);
    return x;
}

Mat critic_inputs(const AgentState& agent, const Mat& states, const Mat& goals, const Mat& actions) {
    if (states.cols() != goals.cols() || states.cols() != actions.cols())
        throw ContractError("critic_inputs: column count mismatch");
    Mat x(states.rows() + goals.rows() + actions.rows(), states.cols());
    x.topRows(states.rows()) = normalized(agent, states);
    x.middleRows(states.rows(), goals.rows()) = normalized(agent, goals);
    x.bottomRows(actions.rows()) = actions;
    return x;
}

Vec policy_action(const AgentState& agent, const Vec& state, const Vec& goal, bool use_target) {
    const Mat in = actor_inputs(agent, state, goal);
    return mlp_forward_batch(use_target ? agent.target_actor : agent.actor, in).col(0);
}

Vec act(const AgentState& agent, const Vec& state, const Vec& goal, bool explore, Rng& rng) {
    Vec a = policy_action(agent, state, goal);
    if (!explore) return a;
    if (uniform_real(rng) < agent.config.random_action_prob) {
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = uniform_real(rng, -1.0, 1.0);
        return a;
    }
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += agent.config.noise_scale * standard_normal(rng);
    return a.cwiseMax(-1.0).cwiseMin(1.0);
}

RowVec policy_values(const AgentState& agent, const Mat& states, const Vec& goal, bool use_target) {
    const Mat goals = replicate_goal(goal, states.cols());
    const auto& actor = use_target ? agent.target_actor : agent.actor;
    const auto& critic = use_target ? agent.target_critic : agent.critic;
    const Mat actions = mlp_forward_batch(actor, actor_inputs(agent, states, goals));
    return mlp_forward_batch(critic, critic_inputs(agent, states, goals, actions)).row(0);
}

Vec critic_targets(const AgentState& agent, const TransitionBatch& batch) {
    check_batch(agent, batch);
    return clipped_targets(agent, agent.target_critic, batch);
}

LossAndGradient critic_loss_and_gradient(const AgentState& agent, const TransitionBatch& batch) {
    const Vec y = critic_targets(agent, batch);
    return bellman_regression(
        agent.critic, critic_inputs(agent, batch.states, batch.desired_goals, batch.actions), y);
}

double update_critic(AgentState& agent, const TransitionBatch& batch) {
    auto lg = critic_loss_and_gradient(agent, batch);
    if (!std::isfinite(lg.value)) throw NumericError("update_critic: non-finite loss");
    adam_step(agent.critic, lg.grads, agent.critic_opt, agent.config.learning_rate);
    return lg.value;
}

LossAndGradient policy_gradient(const MlpParams& actor, const Mat& inputs, const ActionValueFn& q) {
    const ForwardTrace trace = mlp_forward_trace(actor, inputs);
    RowVec values;
    Mat dq_da;
    q(trace.output(), values, dq_da);
    if (values.size() != inputs.cols() || dq_da.rows() != actor.output_dim() ||
        dq_da.cols() != inputs.cols())
        throw ContractError("policy_gradient: action-value function returned wrong shapes");
    const double batch = static_cast<double>(inputs.cols());
    LossAndGradient out;
    out.value = values.mean();
    const Mat upstream = -dq_da / batch;
    out.grads = mlp_backward(actor, trace, upstream).params;
    return out;
}

LossAndGradient actor_objective_and_gradient(const AgentState& agent, const TransitionBatch& batch) {
    check_batch(agent, batch);
    const Mat inputs = actor_inputs(agent, batch.states, batch.desired_goals);
    const auto action_dim = agent.config.action_dim;
    auto q = [&](const Mat& actions, RowVec& values, Mat& action_grads) {
        const ForwardTrace trace =
            mlp_forward_trace(agent.critic, critic_inputs(agent, batch.states, batch.desired_goals, actions));
        values = trace.output().row(0);
        const Mat ones = Mat::Ones(1, actions.cols());
        action_grads = mlp_backward(agent.critic, trace, ones).input.bottomRows(action_dim);
    };
    return policy_gradient(agent.actor, inputs, q);
}

double update_actor(AgentState& agent, const TransitionBatch& batch) {
    auto lg = actor_objective_and_gradient(agent, batch);
    if (!std::isfinite(lg.value)) throw NumericError("update_actor: non-finite objective");
    adam_step(agent.actor, lg.grads, agent.actor_opt, agent.config.learning_rate);
    return lg.value;
}

void sync_targets(AgentState& agent, double alpha) {
    polyak_update(agent.target_actor, agent.actor, alpha);
    polyak_update(agent.target_critic, agent.critic, alpha);
}

CriticEnsemble make_critic_ensemble(const AgentState& agent, int size, Rng& rng) {
    if (size < 2) throw ConfigError("critic ensemble needs at least 2 members");
    const auto& c = agent.config;
    const auto hidden = hidden_widths(c);
    CriticEnsemble e;
    for (int k = 0; k < size; ++k) {
        e.critics.push_back(make_mlp(c.state_dim + c.goal_dim + c.action_dim, hidden, 1,
                                     Activation::relu, Activation::identity, rng));
        e.targets.push_back(e.critics.back());
        e.optimizers.push_back(make_optimizer_state(e.critics.back()));
    }
    return e;
}

void update_ensemble(CriticEnsemble& ensemble, const AgentState& agent, const TransitionBatch& batch,
                     double alpha) {
    check_batch(agent, batch);
    const Mat inputs = critic_inputs(agent, batch.states, batch.desired_goals, batch.actions);
    for (std::size_t k = 0; k < ensemble.critics.size(); ++k) {
        const Vec y = clipped_targets(agent, ensemble.targets[k], batch);
        auto lg = bellman_regression(ensemble.critics[k], inputs, y);
        if (!std::isfinite(lg.value)) throw NumericError("update_ensemble: non-finite loss");
        adam_step(ensemble.critics[k], lg.grads, ensemble.optimizers[k], agent.config.learning_rate);
        polyak_update(ensemble.targets[k], ensemble.critics[k], alpha);
    }
}

RowVec ensemble_policy_values(const CriticEnsemble& ensemble, std::size_t member,
                              const AgentState& agent, const Mat& states, const Vec& goal) {
    const Mat goals = replicate_goal(goal, states.cols());
    const Mat actions = mlp_forward_batch(agent.actor, actor_inputs(agent, states, goals));
    return mlp_forward_batch(ensemble.critics.at(member), critic_inputs(agent, states, goals, actions)).row(0);
}

}  // namespace teach
