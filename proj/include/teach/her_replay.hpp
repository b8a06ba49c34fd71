#pragma once

#include "teach/common.hpp"
#include "teach/goal_mdp.hpp"

#include <cstddef>
#include <vector>

namespace teach {

/// H consecutive transitions sharing one desired goal.
struct EpisodeRecord {
    std::vector<GoalConditionedTransition> steps;
};

/// Sampled transitions plus provenance of each column.
struct SampledBatch {
    TransitionBatch data;
    std::vector<std::size_t> episode;      // index into the buffer, oldest first
    std::vector<std::size_t> step;         // step within the episode
    std::vector<std::size_t> goal_source;  // step whose achieved goal became the desired goal
    std::vector<bool> relabeled;
};

/// Ring of episodes with hindsight ("future" strategy) relabeling at sample
/// time. Each sampled transition is relabeled independently with probability
/// her_k / (her_k + 1).
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int episode_length, int her_k, double epsilon, std::uint64_t seed);

    /// Throws ContractError unless the episode has exactly episode_length
    /// steps sharing one desired goal.
    void store_episode(const EpisodeRecord& episode);

    SampledBatch sample_batch(int batch_size);

    /// Uniform draws of stored states (one per column).
    Mat sample_states(int count, Rng& rng) const;

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t transition_count() const { return count_ * static_cast<std::size_t>(episode_length_); }
    bool empty() const { return count_ == 0; }
    int her_k() const { return her_k_; }
    int episode_length() const { return episode_length_; }

    /// Reconstructs the stored episode at position i (0 = oldest).
    EpisodeRecord episode(std::size_t i) const;

private:
    struct Stored {
        Mat states;
        Mat actions;
        Mat next_states;
        Mat achieved;
        Vec rewards;
        Vec desired;
    };

    const Stored& at(std::size_t i) const;

    std::size_t capacity_;
    int episode_length_;
    int her_k_;
    double epsilon_;
    Rng rng_;
    std::vector<Stored> ring_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::size_t count_ = 0;
};

}  // namespace teach
