#include "teach/teacher.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

using namespace teach;
using namespace teach::testing;

namespace {

ConfidenceHistory history_of(std::initializer_list<double> values, int capacity = 10) {
    ConfidenceHistory h(capacity);
    for (double v : values) h.push(v);
    return h;
}

// Value model defined by a function of (goal index, probe states). Goal i is
// encoded as the vector (i, 0).
class StubProbe final : public ValueProbe {
public:
    explicit StubProbe(std::function<double(int, const Mat&)> f) : f_(std::move(f)) {}
    RowVec policy_values(const Mat& states, const Vec& goal) const override {
        const double v = f_(static_cast<int>(goal(0)), states);
        return RowVec::Constant(states.cols(), v);
    }

private:
    std::function<double(int, const Mat&)> f_;
};

// Returns the first state coordinate of every probe.
class FirstCoordinateProbe final : public ValueProbe {
public:
    RowVec policy_values(const Mat& states, const Vec&) const override { return states.row(0); }
};

std::vector<Vec> indexed_goals(int n) {
    std::vector<Vec> goals;
    for (int i = 0; i < n; ++i) goals.push_back((Vec(2) << i, 0.0).finished());
    return goals;
}

TeacherConfig config_for(TeacherMethod m, int goals, int window = 10, int interplay = 1) {
    TeacherConfig c;
    c.method = m;
    c.goal_count = goals;
    c.window = window;
    c.interplay = interplay;
    c.probe_count = 2;
    return c;
}

Mat zero_probes(int m) { return Mat::Zero(2, m); }

}  // namespace

TEST_CASE("temporal variance examples") {
    CHECK(temporal_variance(history_of({2, 2, 2})) == 0.0);
    CHECK(temporal_variance(history_of({0, 1})) == doctest::Approx(0.25));
    CHECK(temporal_variance(history_of({1, 2, 3, 4})) == doctest::Approx(1.25));
    CHECK(temporal_variance(history_of({7})) == 0.0);
    // the window keeps only the newest entries
    CHECK(temporal_variance(history_of({100, 0, 1}, 2)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(ConfidenceHistory(1), ContractError);
}

TEST_CASE("temporal variance matches a brute-force oracle on random windows") {
    Rng rng(1);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const int cap = 2 + static_cast<int>(uniform_index(rng, 20));
        const int pushes = 2 + static_cast<int>(uniform_index(rng, 30));
        ConfidenceHistory h(cap);
        std::vector<double> all;
        for (int i = 0; i < pushes; ++i) {
            all.push_back(uniform_real(rng, -50.0, 0.0));
            h.push(all.back());
        }
        const std::size_t keep = std::min<std::size_t>(cap, all.size());
        const std::vector<double> window(all.end() - static_cast<long>(keep), all.end());
        REQUIRE(h.values() == window);
        const double v = temporal_variance(h);
        REQUIRE(v >= 0.0);
        worst = std::max(worst, std::abs(v - brute_force_variance(window)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("temporal variance is zero exactly for constant windows") {
    Rng rng(2);
    for (int t = 0; t < 1000; ++t) {
        const double c = uniform_real(rng, -50, 0);
        ConfidenceHistory h(10);
        for (int i = 0; i < 10; ++i) h.push(c);
        REQUIRE(temporal_variance(h) <= 1e-12);
        h.push(c + 1e-3);
        REQUIRE(temporal_variance(h) > 1e-12);
    }
}

TEST_CASE("learning progress examples") {
    const std::vector<double> a{1, 3};
    CHECK(learning_progress(a) == std::vector<double>{0.25, 0.75});
    const std::vector<double> z{0, 0, 0};
    for (double w : learning_progress(z)) CHECK(w == doctest::Approx(1.0 / 3.0));
    const std::vector<double> one{5};
    CHECK(learning_progress(one) == std::vector<double>{1.0});
    const std::vector<double> bad{1, -0.1};
    CHECK_THROWS_AS(learning_progress(bad), ContractError);
}

TEST_CASE("learning progress sums to one and ignores positive scaling") {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> d(1 + uniform_index(rng, 50));
        for (double& x : d) x = uniform_index(rng, 4) == 0 ? 0.0 : uniform_real(rng, 0.0, 10.0);
        const auto w = learning_progress(d);
        double sum = 0.0;
        for (double x : w) sum += x;
        REQUIRE(std::abs(sum - 1.0) <= 1e-9);
        for (double c : {1e-6, 1.0, 1e6}) {
            std::vector<double> scaled = d;
            for (double& x : scaled) x *= c;
            const auto ws = learning_progress(scaled);
            for (std::size_t i = 0; i < w.size(); ++i) REQUIRE(std::abs(ws[i] - w[i]) <= 1e-12);
        }
    }
}

TEST_CASE("argmax selection is invariant under increasing transforms") {
    Rng rng(4);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> d(2 + uniform_index(rng, 30));
        for (double& x : d) x = uniform_real(rng, 0.0, 5.0);
        std::vector<double> f = d;
        for (double& x : f) x = std::sqrt(x) + x * x * x;
        CurriculumDistribution a{indexed_goals(static_cast<int>(d.size())), learning_progress(d)};
        CurriculumDistribution b{a.goals, learning_progress(f)};
        REQUIRE(sample_goal_index(a, SamplingMode::argmax, rng) == sample_goal_index(b, SamplingMode::argmax, rng));
    }
}

TEST_CASE("goal sampling") {
    Rng rng(5);
    CurriculumDistribution point{indexed_goals(3), {1.0, 0.0, 0.0}};
    for (int i = 0; i < 1000; ++i) REQUIRE(sample_goal_index(point, SamplingMode::proportional, rng) == 0);

    CurriculumDistribution two{indexed_goals(2), {0.25, 0.75}};
    int ones = 0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) ones += static_cast<int>(sample_goal_index(two, SamplingMode::proportional, rng));
    CHECK(std::abs(ones / static_cast<double>(n) - 0.75) <= 0.01);

    CurriculumDistribution peak{indexed_goals(3), {0.2, 0.5, 0.3}};
    for (int i = 0; i < 100; ++i) REQUIRE(sample_goal(peak, SamplingMode::argmax, rng)(0) == 1.0);
    CurriculumDistribution tie{indexed_goals(3), {0.4, 0.2, 0.4}};
    CHECK(sample_goal_index(tie, SamplingMode::argmax, rng) == 0);
}

TEST_CASE("confidence score is the probe mean") {
    const StubProbe constant([](int, const Mat&) { return -7.5; });
    const Mat probes = Mat::Random(2, 5);
    for (int g = 0; g < 4; ++g) CHECK(confidence_score(constant, indexed_goals(4)[g], probes) == -7.5);

    Mat two(2, 2);
    two << 0, 1, 3, 3;
    CHECK(confidence_score(FirstCoordinateProbe{}, indexed_goals(1)[0], two) == doctest::Approx(0.5));
    CHECK_THROWS_AS(confidence_score(constant, indexed_goals(1)[0], Mat(2, 0)), ContractError);
}

TEST_CASE("value disagreement") {
    const StubProbe a([](int, const Mat&) { return 0.0; });
    const StubProbe b([](int, const Mat&) { return 0.0; });
    const StubProbe c([](int, const Mat&) { return 3.0; });
    const Vec g = indexed_goals(1)[0];
    const Mat probes = zero_probes(4);
    const std::vector<const ValueProbe*> same{&a, &b};
    CHECK(vds_score(same, g, probes) == 0.0);
    const std::vector<const ValueProbe*> three{&a, &b, &c};
    CHECK(vds_score(three, g, probes) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const StubProbe a5([](int, const Mat&) { return 5.0; });
    const StubProbe b5([](int, const Mat&) { return 5.0; });
    const StubProbe c5([](int, const Mat&) { return 8.0; });
    const std::vector<const ValueProbe*> shifted{&a5, &b5, &c5};
    CHECK(vds_score(shifted, g, probes) == doctest::Approx(vds_score(three, g, probes)).epsilon(1e-14));

    const std::vector<const ValueProbe*> single{&a};
    CHECK_THROWS_AS(vds_score(single, g, probes), ConfigError);
}

TEST_CASE("procurl and space scores") {
    CHECK(procurl_score(-50, -50, 0) == 0.0);
    CHECK(procurl_score(-25, -50, 0) == doctest::Approx(25.0));
    CHECK(procurl_score(0, -50, 0) == 0.0);
    CHECK(procurl_score(-10, -30, 10) == doctest::Approx(20.0));

    CHECK(space_score(history_of({5, 5})) == 0.0);
    CHECK(space_score(history_of({-3, -1})) == 2.0);
    CHECK(space_score(history_of({0, 1, 4})) == 3.0);
    CHECK(space_score(history_of({4})) == 0.0);
}

TEST_CASE("procurl teacher picks the goal midway in value") {
    std::vector<Vec> goals = indexed_goals(3);
    Teacher t(config_for(TeacherMethod::procurl, 3), goals, 50, -50.0);
    const StubProbe model([](int g, const Mat&) { return std::array{-50.0, -25.0, 0.0}[g]; });
    TeacherModels models{&model, &model, {}};
    t.tick(0, models, zero_probes);
    CHECK(t.scores()[0] == 0.0);
    CHECK(t.scores()[1] == doctest::Approx(25.0));
    CHECK(t.scores()[2] == 0.0);
    Rng rng(6);
    CHECK(t.sampling_mode() == SamplingMode::argmax);
    CHECK(t.select(rng) == 1);
}

TEST_CASE("teacher recomputes only on the interplay gate") {
    Teacher t(config_for(TeacherMethod::teach, 4), indexed_goals(4), 50, -50.0);
    int draws = 0;
    const StubProbe model([](int, const Mat&) { return -1.0; });
    TeacherModels models{&model, &model, {}};
    auto probes = [&](int m) {
        ++draws;
        return zero_probes(m);
    };
    std::vector<long> fired;
    for (long step = 0; step <= 150; step += 10) {
        const long before = t.evaluations();
        t.tick(step, models, probes);
        if (t.evaluations() > before) fired.push_back(step);
    }
    CHECK(fired == std::vector<long>{0, 50, 100, 150});
    CHECK(draws == 4);

    Teacher slow(config_for(TeacherMethod::teach, 4, 10, 2), indexed_goals(4), 50, -50.0);
    CHECK(slow.due(0));
    CHECK_FALSE(slow.due(50));
    CHECK(slow.due(100));
}

TEST_CASE("first tick is uniform") {
    Teacher t(config_for(TeacherMethod::teach, 5), indexed_goals(5), 50, -50.0);
    const StubProbe model([](int g, const Mat&) { return -static_cast<double>(g); });
    TeacherModels models{&model, &model, {}};
    for (double w : t.tick(0, models, zero_probes).weights) CHECK(w == doctest::Approx(0.2));
}

TEST_CASE("uniform teacher ignores the value model") {
    Teacher t(config_for(TeacherMethod::uniform, 4), indexed_goals(4), 50, -50.0);
    int calls = 0;
    const StubProbe model([&](int g, const Mat&) {
        ++calls;
        return static_cast<double>(g * g);
    });
    TeacherModels models{&model, &model, {}};
    for (long step = 0; step < 1000; step += 50)
        for (double w : t.tick(step, models, zero_probes).weights) REQUIRE(w == 0.25);
    CHECK(calls == 0);
}

TEST_CASE("an oscillating goal takes all the weight") {
    constexpr int window = 10;
    Teacher t(config_for(TeacherMethod::teach, 6, window), indexed_goals(6), 50, -50.0);
    int tick = 0;
    const StubProbe model([&](int g, const Mat&) {
        if (g == 3) return tick % 2 == 0 ? -10.0 : -20.0;
        return -5.0 - g;
    });
    TeacherModels models{&model, &model, {}};
    for (; tick < window; ++tick) t.tick(50L * tick, models, zero_probes);
    const auto& w = t.distribution().weights;
    CHECK(std::abs(w[3] - 1.0) <= 1e-9);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) REQUIRE(t.select(rng) == 3);
}

TEST_CASE("teach weights are unchanged by a constant shift in confidence") {
    auto run = [](double shift) {
        Teacher t(config_for(TeacherMethod::teach, 8, 5), indexed_goals(8), 50, -50.0);
        int tick = 0;
        const StubProbe model([&](int g, const Mat&) {
            return shift + std::sin(0.7 * tick * (g + 1)) * (g + 1);
        });
        TeacherModels models{&model, &model, {}};
        for (; tick < 12; ++tick) t.tick(50L * tick, models, zero_probes);
        return t.distribution().weights;
    };
    const auto base = run(0.0);
    for (double shift : {-40.0, 3.0, 1e3}) {
        const auto w = run(shift);
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - base[i]) <= 1e-9);
    }
}

TEST_CASE("teach-smooth reads the target model") {
    Teacher t(config_for(TeacherMethod::teach_smooth, 2), indexed_goals(2), 50, -50.0);
    int tick = 0;
    const StubProbe online([](int, const Mat&) { return -1.0; });
    const StubProbe target([&](int g, const Mat&) { return g == 1 ? -static_cast<double>(tick) : -2.0; });
    TeacherModels models{&online, &target, {}};
    for (; tick < 3; ++tick) t.tick(50L * tick, models, zero_probes);
    CHECK(t.distribution().weights[1] == doctest::Approx(1.0));
    CHECK(t.histories()[0].values() == std::vector<double>{-2.0, -2.0, -2.0});
}

TEST_CASE("space teacher weights the one-step change") {
    Teacher t(config_for(TeacherMethod::space, 3), indexed_goals(3), 50, -50.0);
    int tick = 0;
    const StubProbe model([&](int g, const Mat&) { return -static_cast<double>(g * tick); });
    TeacherModels models{&model, &model, {}};
    for (; tick < 2; ++tick) t.tick(50L * tick, models, zero_probes);
    const auto& w = t.distribution().weights;
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(1.0 / 3.0));
    CHECK(w[2] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("snapshot round trip preserves the teacher") {
    Teacher t(config_for(TeacherMethod::teach, 4, 3), indexed_goals(4), 50, -50.0);
    int tick = 0;
    const StubProbe model([&](int g, const Mat&) { return std::cos(tick + g); });
    TeacherModels models{&model, &model, {}};
    for (; tick < 5; ++tick) t.tick(50L * tick, models, zero_probes);
    const Teacher copy(t.snapshot(), 50);
    CHECK(copy.distribution().weights == t.distribution().weights);
    for (std::size_t i = 0; i < 4; ++i) CHECK(copy.histories()[i].values() == t.histories()[i].values());
}

TEST_CASE("dump line lists the top goals") {
    Teacher t(config_for(TeacherMethod::teach, 12), indexed_goals(12), 50, -50.0);
    const std::string line = t.dump_line(150);
    CHECK(line.rfind("150\t", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ':') == 10);
    CHECK(std::count(line.begin(), line.end(), '\t') == 2);
}

TEST_CASE("teacher method names and configuration checks") {
    for (auto m : {TeacherMethod::uniform, TeacherMethod::teach, TeacherMethod::teach_smooth,
                   TeacherMethod::teach_argmax, TeacherMethod::vds, TeacherMethod::space, TeacherMethod::procurl})
        CHECK(parse_teacher_method(to_string(m)) == m);
    CHECK_FALSE(parse_teacher_method("lp").has_value());

    TeacherConfig c;
    c.window = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = TeacherConfig{};
    c.interplay = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = TeacherConfig{};
    c.method = TeacherMethod::vds;
    c.ensemble_size = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
}
