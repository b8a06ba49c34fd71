#include "teach/kl_validator.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace teach;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vec random_normal(Rng& rng, int n, double scale = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * standard_normal(rng);
    return v;
}

PerturbationScenario scenario(Vec q, Vec dq, double alpha) {
    PerturbationScenario s;
    s.base.q_values = std::move(q);
    s.base.temperature = alpha;
    s.delta_q = std::move(dq);
    return s;
}

// Neumaier-compensated long-double sum of p ln(p/q), terms computed in long double.
double compensated_kl(const Vec& p, const Vec& q) {
    long double sum = 0.0L, comp = 0.0L;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) == 0.0) continue;
        const long double term =
            static_cast<long double>(p(i)) * std::log(static_cast<long double>(p(i)) / static_cast<long double>(q(i)));
        const long double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term)) comp += (sum - t) + term;
        else comp += (term - t) + sum;
        sum = t;
    }
    return static_cast<double>(sum + comp);
}

}  // namespace

TEST_CASE("softmax policy examples") {
    CHECK(softmax_policy(vec({0, 0}), 1.0).isApprox(vec({0.5, 0.5}), 1e-15));
    const Vec p = softmax_policy(vec({std::log(2.0), 0}), 1.0);
    CHECK(p(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(p(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // large values do not overflow
    const Vec big = softmax_policy(vec({1000, 999}), 1.0);
    CHECK(big.allFinite());
    CHECK(big.sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(softmax_policy(vec({0, 1}), 0.0), ContractError);
}

TEST_CASE("softmax is invariant to a constant shift") {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const Vec q = random_normal(rng, 8, 3.0);
        const double c = uniform_real(rng, -100, 100);
        const double alpha = uniform_real(rng, 0.2, 3.0);
        CHECK((softmax_policy(q, alpha) - softmax_policy(q.array() + c, alpha)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("exact KL examples") {
    const Vec p = vec({0.2, 0.3, 0.5});
    CHECK(exact_kl(p, p) == 0.0);
    CHECK(exact_kl(vec({1, 0}), vec({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(exact_kl(vec({0.5, 0.5}), vec({1, 0})), ContractError);
    CHECK_THROWS_AS(exact_kl(vec({0.5, 0.5}), vec({0.2, 0.3, 0.5})), ContractError);
}

TEST_CASE("exact KL matches a compensated-summation oracle") {
    Rng rng(2);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 30));
        const Vec p = softmax_policy(random_normal(rng, n, 2.0), 1.0);
        const Vec q = softmax_policy(random_normal(rng, n, 2.0), 1.0);
        worst = std::max(worst, std::abs(exact_kl(p, q) - compensated_kl(p, q)));
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("exact KL is nonnegative and zero only for equal distributions") {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const Vec p = softmax_policy(random_normal(rng, 6), 1.0);
        const Vec q = softmax_policy(random_normal(rng, 6), 1.0);
        REQUIRE(exact_kl(p, q) >= 0.0);
        REQUIRE(std::abs(exact_kl(p, p)) <= 1e-12);
        REQUIRE(exact_kl(p, q) > 1e-12);
    }
}

TEST_CASE("partition ratio identity") {
    Rng rng(4);
    const Vec q = random_normal(rng, 5);
    const auto zero = partition_ratio_check(scenario(q, Vec::Zero(5), 1.0));
    CHECK(zero.lhs == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(zero.rhs == doctest::Approx(1.0).epsilon(1e-15));

    const auto constant = partition_ratio_check(scenario(q, Vec::Constant(5, 0.7), 2.0));
    CHECK(constant.lhs == doctest::Approx(std::exp(0.35)).epsilon(1e-14));
    CHECK(constant.rhs == doctest::Approx(std::exp(0.35)).epsilon(1e-14));

    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (int t = 0; t < 100; ++t) {
            const auto r = partition_ratio_check(scenario(random_normal(rng, 16), random_normal(rng, 16), alpha));
            worst = std::max(worst, std::abs(r.lhs - r.rhs) / r.rhs);
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("variance approximation examples") {
    Rng rng(5);
    const Vec q = random_normal(rng, 4);
    const auto flat = scenario(q, Vec::Constant(4, 1.3), 1.0);
    CHECK(variance_kl_approx(flat) <= 1e-15);
    CHECK(std::abs(scenario_exact_kl(flat)) <= 1e-15);

    for (double sigma : {0.5, 0.1, 0.01}) {
        const auto s = scenario(vec({0, 0}), vec({sigma, -sigma}), 1.0);
        CHECK(variance_kl_approx(s) == doctest::Approx(0.5 * sigma * sigma).epsilon(1e-12));
    }
    const auto hot = scenario(vec({0, 0}), vec({0.3, -0.3}), 2.0);
    CHECK(variance_kl_approx(hot) == doctest::Approx(0.09 / 8.0).epsilon(1e-12));
}

TEST_CASE("variance approximation is nonnegative and shift invariant") {
    Rng rng(6);
    for (int t = 0; t < 1000; ++t) {
        const Vec q = random_normal(rng, 8);
        const Vec dq = random_normal(rng, 8, 0.3);
        const double c = uniform_real(rng, -5, 5);
        const auto a = scenario(q, dq, 1.0);
        const auto b = scenario(q, dq.array() + c, 1.0);
        REQUIRE(variance_kl_approx(a) >= 0.0);
        REQUIRE(std::abs(variance_kl_approx(a) - variance_kl_approx(b)) <= 1e-12);
        REQUIRE(std::abs(scenario_exact_kl(a) - scenario_exact_kl(b)) <= 1e-12);
    }
}

TEST_CASE("scenario validation") {
    CHECK_THROWS_AS(variance_kl_approx(scenario(vec({1}), vec({0}), 1.0)), ContractError);
    CHECK_THROWS_AS(variance_kl_approx(scenario(vec({1, 2}), vec({0}), 1.0)), ContractError);
    CHECK_THROWS_AS(variance_kl_approx(scenario(vec({1, 2}), vec({0, NAN}), 1.0)), ContractError);
    CHECK_THROWS_AS(variance_kl_approx(scenario(vec({1, 2}), vec({0, 0}), -1.0)), ContractError);
}

TEST_CASE("approximation report rows") {
    const std::vector<double> zero{0.0};
    const auto z = approximation_report(8, 1.0, zero, 100, 1);
    REQUIRE(z.size() == 1);
    CHECK(z[0].mean_exact_kl == 0.0);
    CHECK(z[0].mean_approx_kl == 0.0);
    CHECK(z[0].mean_relative_error == 0.0);

    const std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    const auto rows = approximation_report(8, 1.0, ladder, 1000, 0);
    REQUIRE(rows.size() == 4);
    CHECK(rows[2].mean_relative_error <= 0.2);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].mean_relative_error < rows[i - 1].mean_relative_error);
    for (const auto& r : rows) {
        CHECK(r.mean_exact_kl > 0.0);
        CHECK(r.mean_shift_error >= 0.0);
    }
    // a row depends only on its own scale
    const std::vector<double> alone{0.05};
    CHECK(approximation_report(8, 1.0, alone, 1000, 0)[0].mean_exact_kl == rows[2].mean_exact_kl);

    const std::vector<double> ascending{0.1, 0.2};
    CHECK_THROWS_AS(approximation_report(8, 1.0, ascending, 1000, 0), ContractError);
    CHECK_THROWS_AS(approximation_report(8, 1.0, ladder, 99, 0), ContractError);
}
