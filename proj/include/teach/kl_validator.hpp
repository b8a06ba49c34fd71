#pragma once

#include "teach/common.hpp"

#include <span>
#include <vector>

namespace teach {

/// Boltzmann policy over a finite action set for one (state, goal).
struct SoftPolicyInstance {
    Vec q_values;
    double temperature = 1.0;
};

/// A base instance together with a value change applied to every action.
struct PerturbationScenario {
    SoftPolicyInstance base;
    Vec delta_q;
    double scale = 0.0;
};

void validate(const SoftPolicyInstance& instance);
void validate(const PerturbationScenario& scenario);

/// exp(q / alpha) normalized, computed with max-subtraction.
Vec softmax_policy(const Vec& q, double temperature);

/// sum_a p_a ln(p_a / q_a) with 0 ln 0 = 0. Throws ContractError when q
/// vanishes where p does not.
double exact_kl(const Vec& p, const Vec& q);

struct PartitionRatio {
    double lhs = 0.0;  // Z_{t+1} / Z_t by direct summation
    double rhs = 0.0;  // E_{a ~ pi_t}[exp(dQ / alpha)]
};

/// Both sides of the partition-function ratio identity, each computed
/// relative to max(q) so neither overflows.
PartitionRatio partition_ratio_check(const PerturbationScenario& scenario);

/// (1 / (2 alpha^2)) Var_{a ~ pi_t}(dQ).
double variance_kl_approx(const PerturbationScenario& scenario);

/// Exact KL(softmax(q + dQ) || softmax(q)).
double scenario_exact_kl(const PerturbationScenario& scenario);

/// |E_{pi_{t+1}}[dQ] - (E_{pi_t}[dQ] + Var_{pi_t}(dQ) / alpha)|.
double first_order_shift_error(const PerturbationScenario& scenario);

struct ApproximationRow {
    double scale = 0.0;
    double mean_exact_kl = 0.0;
    double mean_approx_kl = 0.0;
    double mean_relative_error = 0.0;
    double mean_shift_error = 0.0;
};

/// Monte-Carlo comparison of exact KL and the variance approximation for
/// q ~ N(0, 1)^|A| and dQ ~ N(0, scale^2)^|A|. Each scale uses its own
/// substream of `seed`, so rows do not depend on the ladder they sit in.
std::vector<ApproximationRow> approximation_report(int action_count, double temperature,
                                                   std::span<const double> scales, int trials,
                                                   std::uint64_t seed);

}  // namespace teach
