#include "teach/her_replay.hpp"

#include <string>

namespace teach {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int episode_length, int her_k, double epsilon,
                           std::uint64_t seed)
    : capacity_(capacity), episode_length_(episode_length), her_k_(her_k), epsilon_(epsilon), rng_(seed) {
    if (capacity_ < 1) throw ContractError("ReplayBuffer: capacity must be >= 1");
    if (episode_length_ < 1) throw ContractError("ReplayBuffer: episode length must be >= 1");
    if (her_k_ < 0) throw ContractError("ReplayBuffer: her_k must be >= 0");
    if (!(epsilon_ > 0.0)) throw ContractError("ReplayBuffer: epsilon must be positive");
}

void ReplayBuffer::store_episode(const EpisodeRecord& episode) {
    const auto& steps = episode.steps;
    if (static_cast<int>(steps.size()) != episode_length_)
        throw ContractError("store_episode: expected " + std::to_string(episode_length_) +
                            " steps, got " + std::to_string(steps.size()));
    const auto sd = steps[0].state.size();
    const auto ad = steps[0].action.size();
    const auto gd = steps[0].desired_goal.size();
    Stored s;
    s.states.resize(sd, episode_length_);
    s.actions.resize(ad, episode_length_);
    s.next_states.resize(sd, episode_length_);
    s.achieved.resize(gd, episode_length_);
    s.rewards.resize(episode_length_);
    s.desired = steps[0].desired_goal;
    for (int h = 0; h < episode_length_; ++h) {
        const auto& t = steps[h];
        if (t.state.size() != sd || t.next_state.size() != sd || t.action.size() != ad ||
            t.achieved_goal.size() != gd || t.desired_goal.size() != gd)
            throw ContractError("store_episode: inconsistent dimensions at step " + std::to_string(h));
        if (t.desired_goal != s.desired)
            throw ContractError("store_episode: desired goal changes within the episode");
        s.states.col(h) = t.state;
        s.actions.col(h) = t.action;
        s.next_states.col(h) = t.next_state;
        s.achieved.col(h) = t.achieved_goal;
        s.rewards(h) = t.reward;
    }
    if (!ring_.empty() && (ring_.front().states.rows() != sd || ring_.front().actions.rows() != ad ||
                           ring_.front().achieved.rows() != gd))
        throw ContractError("store_episode: dimensions differ from stored episodes");

    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(s));
    } else {
        ring_[head_] = std::move(s);
        head_ = (head_ + 1) % capacity_;
    }
    count_ = ring_.size();
}

const ReplayBuffer::Stored& ReplayBuffer::at(std::size_t i) const {
    if (i >= count_) throw ContractError("ReplayBuffer: episode index out of range");
    return ring_[(head_ + i) % ring_.size()];
}

EpisodeRecord ReplayBuffer::episode(std::size_t i) const {
    const Stored& s = at(i);
    EpisodeRecord e;
    e.steps.resize(episode_length_);
    for (int h = 0; h < episode_length_; ++h) {
        auto& t = e.steps[h];
        t.state = s.states.col(h);
        t.action = s.actions.col(h);
        t.next_state = s.next_states.col(h);
        t.achieved_goal = s.achieved.col(h);
        t.desired_goal = s.desired;
        t.reward = s.rewards(h);
    }
    return e;
}

SampledBatch ReplayBuffer::sample_batch(int batch_size) {
    if (count_ == 0) throw ContractError("sample_batch: replay buffer is empty");
    if (batch_size < 1) throw ContractError("sample_batch: batch size must be >= 1");
    const Stored& first = ring_.front();
    SampledBatch out;
    auto& d = out.data;
    d.states.resize(first.states.rows(), batch_size);
    d.actions.resize(first.actions.rows(), batch_size);
    d.next_states.resize(first.next_states.rows(), batch_size);
    d.achieved_goals.resize(first.achieved.rows(), batch_size);
    d.desired_goals.resize(first.achieved.rows(), batch_size);
    d.rewards.resize(batch_size);
    out.episode.resize(batch_size);
    out.step.resize(batch_size);
    out.goal_source.resize(batch_size);
    out.relabeled.resize(batch_size);

    const double relabel_prob = static_cast<double>(her_k_) / (her_k_ + 1.0);
    for (int b = 0; b < batch_size; ++b) {
        const std::size_t e = uniform_index(rng_, count_);
        const auto h = static_cast<Eigen::Index>(uniform_index(rng_, episode_length_));
        const Stored& s = at(e);
        d.states.col(b) = s.states.col(h);
        d.actions.col(b) = s.actions.col(h);
        d.next_states.col(b) = s.next_states.col(h);
        d.achieved_goals.col(b) = s.achieved.col(h);
        out.episode[b] = e;
        out.step[b] = static_cast<std::size_t>(h);
        if (her_k_ > 0 && uniform_real(rng_) < relabel_prob) {
            const auto future = h + static_cast<Eigen::Index>(uniform_index(rng_, episode_length_ - h));
            d.desired_goals.col(b) = s.achieved.col(future);
            d.rewards(b) = reward(d.achieved_goals.col(b), d.desired_goals.col(b), epsilon_);
            out.goal_source[b] = static_cast<std::size_t>(future);
            out.relabeled[b] = true;
        } else {
            d.desired_goals.col(b) = s.desired;
            d.rewards(b) = s.rewards(h);
            out.goal_source[b] = static_cast<std::size_t>(h);
            out.relabeled[b] = false;
        }
    }
    return out;
}

Mat ReplayBuffer::sample_states(int count, Rng& rng) const {
    if (count_ == 0) throw ContractError("sample_states: replay buffer is empty");
    Mat out(ring_.front().states.rows(), count);
    for (int i = 0; i < count; ++i) {
        const Stored& s = at(uniform_index(rng, count_));
        out.col(i) = s.states.col(static_cast<Eigen::Index>(uniform_index(rng, episode_length_)));
    }
    return out;
}

}  // namespace teach
