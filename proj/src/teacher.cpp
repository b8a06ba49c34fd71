#include "teach/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace teach {

namespace {

constexpr double kZeroTotal = 1e-12;

constexpr std::pair<TeacherMethod, std::string_view> kMethodNames[] = {
    {TeacherMethod::uniform, "uniform"},        {TeacherMethod::teach, "teach"},
    {TeacherMethod::teach_smooth, "teach-smooth"}, {TeacherMethod::teach_argmax, "teach-argmax"},
    {TeacherMethod::vds, "vds"},                {TeacherMethod::space, "space"},
    {TeacherMethod::procurl, "procurl"},
};

}  // namespace

std::string_view to_string(TeacherMethod m) {
    for (const auto& [method, name] : kMethodNames)
        if (method == m) return name;
    return "?";
}

std::optional<TeacherMethod> parse_teacher_method(std::string_view name) {
    for (const auto& [method, n] : kMethodNames)
        if (n == name) return method;
    return std::nullopt;
}

void validate(const TeacherConfig& c) {
    if (c.window < 2) throw ConfigError("teacher window must be >= 2");
    if (c.interplay < 1) throw ConfigError("teacher interplay (delta) must be >= 1");
    if (c.goal_count < 1) throw ConfigError("teacher goal count must be >= 1");
    if (c.probe_count < 1) throw ConfigError("teacher probe count must be >= 1");
    if (c.method == TeacherMethod::vds && c.ensemble_size < 2)
        throw ConfigError("vds teacher needs an ensemble of at least 2 critics");
}

ConfidenceHistory::ConfidenceHistory(int capacity) {
    if (capacity < 2) throw ContractError("ConfidenceHistory: capacity must be >= 2");
    ring_.assign(static_cast<std::size_t>(capacity), 0.0);
}

void ConfidenceHistory::push(double score) {
    const int cap = capacity();
    if (count_ < cap) {
        ring_[(head_ + count_) % cap] = score;
        ++count_;
    } else {
        ring_[head_] = score;
        head_ = (head_ + 1) % cap;
    }
}

std::vector<double> ConfidenceHistory::values() const {
    std::vector<double> out(static_cast<std::size_t>(count_));
    for (int i = 0; i < count_; ++i) out[i] = ring_[(head_ + i) % capacity()];
    return out;
}

double ConfidenceHistory::latest() const {
    if (count_ < 1) throw ContractError("ConfidenceHistory::latest on empty history");
    return ring_[(head_ + count_ - 1) % capacity()];
}

double ConfidenceHistory::previous() const {
    if (count_ < 2) throw ContractError("ConfidenceHistory::previous needs two entries");
    return ring_[(head_ + count_ - 2) % capacity()];
}

double temporal_variance(const ConfidenceHistory& history) {
    if (history.size() < 2) return 0.0;
    const auto v = history.values();
    const double m = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / m;
}

std::vector<double> learning_progress(std::span<const double> deltas) {
    if (deltas.empty()) throw ContractError("learning_progress: no goals");
    double total = 0.0;
    for (double d : deltas) {
        if (!(d >= 0.0)) throw ContractError("learning_progress: scores must be nonnegative");
        total += d;
    }
    const std::size_t n = deltas.size();
    if (total < kZeroTotal) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = deltas[i] / total;
    return w;
}

std::size_t sample_goal_index(const CurriculumDistribution& dist, SamplingMode mode, Rng& rng) {
    const auto& w = dist.weights;
    if (w.empty()) throw ContractError("sample_goal_index: empty distribution");
    if (mode == SamplingMode::argmax)
        return static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double u = uniform_real(rng) * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        cum += w[i];
        last_positive = i;
        if (cum > u) return i;
    }
    return last_positive;
}

const Vec& sample_goal(const CurriculumDistribution& dist, SamplingMode mode, Rng& rng) {
    return dist.goals.at(sample_goal_index(dist, mode, rng));
}

double confidence_score(const ValueProbe& model, const Vec& goal, const Mat& probe_states) {
    if (probe_states.cols() < 1) throw ContractError("confidence_score: no probe states");
    return model.policy_values(probe_states, goal).mean();
}

double disagreement(std::span<const double> member_scores) {
    if (member_scores.size() < 2) throw ConfigError("value disagreement needs at least 2 critics");
    const double k = static_cast<double>(member_scores.size());
    const double mean = std::accumulate(member_scores.begin(), member_scores.end(), 0.0) / k;
    double acc = 0.0;
    for (double s : member_scores) acc += (s - mean) * (s - mean);
    return std::sqrt(acc / k);
}

double vds_score(std::span<const ValueProbe* const> ensemble, const Vec& goal, const Mat& probe_states) {
    if (ensemble.size() < 2) throw ConfigError("value disagreement needs at least 2 critics");
    std::vector<double> scores;
    scores.reserve(ensemble.size());
    for (const ValueProbe* m : ensemble) scores.push_back(confidence_score(*m, goal, probe_states));
    return disagreement(scores);
}

double procurl_score(double confidence, double lo, double hi) {
    return std::sqrt(std::max(confidence - lo, 0.0) * std::max(hi - confidence, 0.0));
}

double space_score(const ConfidenceHistory& history) {
    if (history.size() < 2) return 0.0;
    return std::abs(history.latest() - history.previous());
}

Teacher::Teacher(TeacherConfig config, std::vector<Vec> goals, int episode_length, double value_floor)
    : config_(config), episode_length_(episode_length), value_floor_(value_floor) {
    validate(config_);
    if (goals.empty()) throw ContractError("Teacher: empty goal space");
    if (static_cast<int>(goals.size()) != config_.goal_count)
        throw ContractError("Teacher: goal space size differs from configured goal count");
    if (episode_length_ < 1) throw ContractError("Teacher: episode length must be >= 1");
    dist_.goals = std::move(goals);
    histories_.assign(dist_.goals.size(), ConfidenceHistory(config_.window));
    scores_.assign(dist_.goals.size(), 0.0);
    set_uniform();
}

Teacher::Teacher(const TeacherSnapshot& s, int episode_length)
    : Teacher(s.config, s.goals, episode_length, s.value_floor) {
    if (s.weights.size() != dist_.goals.size() || s.histories.size() != dist_.goals.size())
        throw ContractError("Teacher: snapshot sizes are inconsistent");
    dist_.weights = s.weights;
    for (std::size_t i = 0; i < s.histories.size(); ++i)
        for (double v : s.histories[i]) histories_[i].push(v);
    curriculum_ready_ = s.curriculum_ready;
}

bool Teacher::due(long step) const {
    return step % (static_cast<long>(config_.interplay) * episode_length_) == 0;
}

SamplingMode Teacher::sampling_mode() const {
    return config_.method == TeacherMethod::teach_argmax || config_.method == TeacherMethod::procurl
               ? SamplingMode::argmax
               : SamplingMode::proportional;
}

std::size_t Teacher::select(Rng& rng) const { return sample_goal_index(dist_, sampling_mode(), rng); }

void Teacher::set_uniform() {
    dist_.weights.assign(dist_.goals.size(), 1.0 / static_cast<double>(dist_.goals.size()));
}

const CurriculumDistribution& Teacher::tick(long step, const TeacherModels& models,
                                            const std::function<Mat(int)>& draw_probes) {
    if (!due(step)) return dist_;
    ++evaluations_;
    if (config_.method == TeacherMethod::uniform) {
        set_uniform();
        return dist_;
    }
    recompute(models, draw_probes(config_.probe_count));
    return dist_;
}

void Teacher::recompute(const TeacherModels& models, const Mat& probes) {
    const std::size_t n = dist_.goals.size();
    if (config_.method == TeacherMethod::vds) {
        if (models.ensemble.size() < 2) throw ConfigError("vds teacher needs an ensemble of at least 2 critics");
        for (std::size_t i = 0; i < n; ++i) scores_[i] = vds_score(models.ensemble, dist_.goals[i], probes);
        dist_.weights = learning_progress(scores_);
        curriculum_ready_ = true;
        return;
    }

    const ValueProbe* model = config_.method == TeacherMethod::teach_smooth ? models.target : models.online;
    if (model == nullptr) throw ContractError("Teacher::tick: value model not provided");
    for (std::size_t i = 0; i < n; ++i)
        histories_[i].push(confidence_score(*model, dist_.goals[i], probes));

    switch (config_.method) {
        case TeacherMethod::teach:
        case TeacherMethod::teach_smooth:
        case TeacherMethod::teach_argmax:
            if (histories_.front().size() < 2) {
                set_uniform();
                return;
            }
            for (std::size_t i = 0; i < n; ++i) scores_[i] = temporal_variance(histories_[i]);
            break;
        case TeacherMethod::space:
            if (histories_.front().size() < 2) {
                set_uniform();
                return;
            }
            for (std::size_t i = 0; i < n; ++i) scores_[i] = space_score(histories_[i]);
            break;
        case TeacherMethod::procurl:
            for (std::size_t i = 0; i < n; ++i)
                scores_[i] = procurl_score(histories_[i].latest(), value_floor_, 0.0);
            break;
        default:
            break;
    }
    dist_.weights = learning_progress(scores_);
    curriculum_ready_ = true;
}

std::string Teacher::dump_line(long step) const {
    std::vector<std::size_t> order(dist_.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist_.weights[a] > dist_.weights[b]; });
    std::ostringstream out;
    out.precision(9);
    out << step << '\t';
    const std::size_t top = std::min<std::size_t>(10, order.size());
    for (std::size_t k = 0; k < top; ++k) {
        if (k > 0) out << ',';
        out << order[k] << ':' << dist_.weights[order[k]];
    }
    out << '\t' << std::accumulate(scores_.begin(), scores_.end(), 0.0);
    return out.str();
}

TeacherSnapshot Teacher::snapshot() const {
    TeacherSnapshot s;
    s.config = config_;
    s.value_floor = value_floor_;
    s.goals = dist_.goals;
    s.weights = dist_.weights;
    s.histories.reserve(histories_.size());
    for (const auto& h : histories_) s.histories.push_back(h.values());
    s.curriculum_ready = curriculum_ready_;
    return s;
}

}  // namespace teach
