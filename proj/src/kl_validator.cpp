#include "teach/kl_validator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace teach {

void validate(const SoftPolicyInstance& instance) {
    if (instance.q_values.size() < 2) throw ContractError("soft policy needs at least 2 actions");
    if (!(instance.temperature > 0.0)) throw ContractError("soft policy temperature must be positive");
    if (!instance.q_values.allFinite()) throw ContractError("soft policy q-values must be finite");
}

void validate(const PerturbationScenario& scenario) {
    validate(scenario.base);
    if (scenario.delta_q.size() != scenario.base.q_values.size())
        throw ContractError("perturbation has the wrong number of actions");
    if (!scenario.delta_q.allFinite()) throw ContractError("perturbation must be finite");
}

Vec softmax_policy(const Vec& q, double temperature) {
    if (!(temperature > 0.0)) throw ContractError("softmax_policy: temperature must be positive");
    if (q.size() < 1) throw ContractError("softmax_policy: empty value vector");
    const Vec e = ((q.array() - q.maxCoeff()) / temperature).exp();
    return e / e.sum();
}

double exact_kl(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw ContractError("exact_kl: distributions differ in size");
    double kl = 0.0;
    for (Eigen::Index a = 0; a < p.size(); ++a) {
        if (p(a) <= 0.0) continue;
        if (!(q(a) > 0.0))
            throw ContractError("exact_kl: q has zero mass at action " + std::to_string(a) +
                                " where p is positive");
        kl += p(a) * std::log(p(a) / q(a));
    }
    return kl;
}

PartitionRatio partition_ratio_check(const PerturbationScenario& s) {
    validate(s);
    const double alpha = s.base.temperature;
    const Vec& q = s.base.q_values;
    const Vec shifted = q + s.delta_q;
    const double m0 = q.maxCoeff();
    const double m1 = shifted.maxCoeff();
    const double z0 = ((q.array() - m0) / alpha).exp().sum();
    const double z1 = ((shifted.array() - m1) / alpha).exp().sum();
    PartitionRatio r;
    r.lhs = std::exp((m1 - m0) / alpha) * z1 / z0;
    const Vec pi = softmax_policy(q, alpha);
    r.rhs = (pi.array() * (s.delta_q.array() / alpha).exp()).sum();
    return r;
}

double variance_kl_approx(const PerturbationScenario& s) {
    validate(s);
    const double alpha = s.base.temperature;
    const Vec pi = softmax_policy(s.base.q_values, alpha);
    const double mean = pi.dot(s.delta_q);
    const double second = (pi.array() * s.delta_q.array().square()).sum();
    // Clamp the rounding residue of E[x^2] - E[x]^2 for constant dQ.
    return std::max(second - mean * mean, 0.0) / (2.0 * alpha * alpha);
}

double scenario_exact_kl(const PerturbationScenario& s) {
    validate(s);
    const double alpha = s.base.temperature;
    return exact_kl(softmax_policy(s.base.q_values + s.delta_q, alpha), softmax_policy(s.base.q_values, alpha));
}

double first_order_shift_error(const PerturbationScenario& s) {
    validate(s);
    const double alpha = s.base.temperature;
    const Vec before = softmax_policy(s.base.q_values, alpha);
    const Vec after = softmax_policy(s.base.q_values + s.delta_q, alpha);
    const double mean_before = before.dot(s.delta_q);
    const double var_before = (before.array() * (s.delta_q.array() - mean_before).square()).sum();
    return std::abs(after.dot(s.delta_q) - (mean_before + var_before / alpha));
}

std::vector<ApproximationRow> approximation_report(int action_count, double temperature,
                                                   std::span<const double> scales, int trials,
                                                   std::uint64_t seed) {
    if (action_count < 2) throw ContractError("approximation_report: need at least 2 actions");
    if (!(temperature > 0.0)) throw ContractError("approximation_report: temperature must be positive");
    if (trials < 100) throw ContractError("approximation_report: need at least 100 trials");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] < scales[i - 1])) throw ContractError("approximation_report: scales must descend");

    std::vector<ApproximationRow> rows;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        const double sigma = scales[k];
        if (!(sigma >= 0.0)) throw ContractError("approximation_report: scales must be nonnegative");
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(std::llround(sigma * 1e9)));
        ApproximationRow row;
        row.scale = sigma;
        PerturbationScenario s;
        s.base.temperature = temperature;
        s.base.q_values.resize(action_count);
        s.delta_q.resize(action_count);
        s.scale = sigma;
        for (int t = 0; t < trials; ++t) {
            for (int a = 0; a < action_count; ++a) s.base.q_values(a) = standard_normal(rng);
            for (int a = 0; a < action_count; ++a) s.delta_q(a) = sigma * standard_normal(rng);
            const double exact = scenario_exact_kl(s);
            const double approx = variance_kl_approx(s);
            row.mean_exact_kl += exact;
            row.mean_approx_kl += approx;
            row.mean_relative_error += exact > 0.0 ? std::abs(approx - exact) / exact : 0.0;
            row.mean_shift_error += first_order_shift_error(s);
        }
        row.mean_exact_kl /= trials;
        row.mean_approx_kl /= trials;
        row.mean_relative_error /= trials;
        row.mean_shift_error /= trials;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace teach
