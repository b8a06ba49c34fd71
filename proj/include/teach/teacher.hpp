#pragma once

#include "teach/common.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teach {

enum class TeacherMethod { uniform, teach, teach_smooth, teach_argmax, vds, space, procurl };

std::string_view to_string(TeacherMethod m);
std::optional<TeacherMethod> parse_teacher_method(std::string_view name);

enum class SamplingMode { proportional, argmax };

struct TeacherConfig {
    TeacherMethod method = TeacherMethod::teach;
    int window = 10;          // confidence evaluations kept per goal
    int interplay = 1;        // episodes between curriculum updates
    int goal_count = 1000;    // size of the sampled goal space
    int probe_count = 64;     // probe states per confidence score
    int ensemble_size = 3;    // vds only
};

/// Throws ConfigError when a field is out of range.
void validate(const TeacherConfig& config);

/// Fixed-capacity ring of the most recent confidence scores of one goal.
class ConfidenceHistory {
public:
    explicit ConfidenceHistory(int capacity);

    void push(double score);
    int size() const { return count_; }
    int capacity() const { return static_cast<int>(ring_.size()); }
    bool empty() const { return count_ == 0; }
    /// Oldest to newest.
    std::vector<double> values() const;
    double latest() const;
    double previous() const;

private:
    std::vector<double> ring_;
    int head_ = 0;  // slot of the oldest entry once full
    int count_ = 0;
};

/// Population variance of the filled window (0 for fewer than 2 entries).
double temporal_variance(const ConfidenceHistory& history);

/// Normalizes nonnegative scores into a distribution; falls back to uniform
/// when the total is below 1e-12. Negative scores are a ContractError.
std::vector<double> learning_progress(std::span<const double> deltas);

struct CurriculumDistribution {
    std::vector<Vec> goals;
    std::vector<double> weights;
};

/// Proportional draw, or the lowest index of maximal weight in argmax mode.
std::size_t sample_goal_index(const CurriculumDistribution& dist, SamplingMode mode, Rng& rng);
const Vec& sample_goal(const CurriculumDistribution& dist, SamplingMode mode, Rng& rng);

/// Source of Q(s, g, pi(s, g)) for a set of probe states against one goal.
class ValueProbe {
public:
    virtual ~ValueProbe() = default;
    virtual RowVec policy_values(const Mat& probe_states, const Vec& goal) const = 0;
};

/// Mean policy value over the probe columns.
double confidence_score(const ValueProbe& model, const Vec& goal, const Mat& probe_states);

/// Population standard deviation of per-member confidence scores.
double disagreement(std::span<const double> member_scores);

/// Value-disagreement score over an ensemble of at least two members.
double vds_score(std::span<const ValueProbe* const> ensemble, const Vec& goal, const Mat& probe_states);

/// sqrt(max(c - lo, 0) * max(hi - c, 0)); peaks midway between the bounds.
double procurl_score(double confidence, double lo, double hi);

/// |latest - previous| of the history, 0 with fewer than two entries.
double space_score(const ConfidenceHistory& history);

struct TeacherModels {
    const ValueProbe* online = nullptr;
    const ValueProbe* target = nullptr;
    std::vector<const ValueProbe*> ensemble;
};

/// Plain-value view of the teacher, used for checkpoints.
struct TeacherSnapshot {
    TeacherConfig config;
    double value_floor = -50.0;
    std::vector<Vec> goals;
    std::vector<double> weights;
    std::vector<std::vector<double>> histories;  // oldest to newest per goal
    bool curriculum_ready = false;
};

/// Goal proposer. Re-evaluates the curriculum every `interplay` episodes and
/// serves goals from the cached distribution in between.
class Teacher {
public:
    /// `value_floor` is the lowest attainable value, -1 / (1 - gamma).
    Teacher(TeacherConfig config, std::vector<Vec> goals, int episode_length, double value_floor);
    explicit Teacher(const TeacherSnapshot& snapshot, int episode_length);

    bool due(long step) const;

    /// Called at every episode boundary with the global step count. When the
    /// gate fires, draws probe states through `draw_probes` and recomputes
    /// the distribution; otherwise returns the cached one.
    const CurriculumDistribution& tick(long step, const TeacherModels& models,
                                       const std::function<Mat(int)>& draw_probes);

    std::size_t select(Rng& rng) const;
    SamplingMode sampling_mode() const;

    const TeacherConfig& config() const { return config_; }
    const CurriculumDistribution& distribution() const { return dist_; }
    const std::vector<ConfidenceHistory>& histories() const { return histories_; }
    /// Scores that produced the current weights (variance, disagreement, ...).
    const std::vector<double>& scores() const { return scores_; }
    long evaluations() const { return evaluations_; }

    /// Tab-separated: step, top-10 "index:weight" pairs, total score.
    std::string dump_line(long step) const;

    TeacherSnapshot snapshot() const;

private:
    void set_uniform();
    void recompute(const TeacherModels& models, const Mat& probes);

    TeacherConfig config_;
    int episode_length_;
    double value_floor_;
    CurriculumDistribution dist_;
    std::vector<ConfidenceHistory> histories_;
    std::vector<double> scores_;
    bool curriculum_ready_ = false;
    long evaluations_ = 0;
};

}  // namespace teach
