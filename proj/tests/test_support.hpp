#pragma once

// Independent oracles shared by the unit and acceptance suites. Nothing here
// calls into the code paths it is used to check.

#include "teach/agent.hpp"
#include "teach/neural.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace teach::testing {

/// Pointers to every scalar parameter, layer by layer (weights then bias).
inline std::vector<double*> parameter_refs(MlpParams& p) {
    std::vector<double*> refs;
    for (auto& l : p.layers) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) refs.push_back(l.weight.data() + i);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) refs.push_back(l.bias.data() + i);
    }
    return refs;
}

/// Same ordering as parameter_refs.
inline std::vector<double> flatten(const ParamGrads& g) {
    std::vector<double> out;
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
        out.insert(out.end(), g.weight[k].data(), g.weight[k].data() + g.weight[k].size());
        out.insert(out.end(), g.bias[k].data(), g.bias[k].data() + g.bias[k].size());
    }
    return out;
}

/// Central differences of `loss` w.r.t. every parameter of `params`.
inline std::vector<double> finite_difference(MlpParams& params, const std::function<double()>& loss,
                                             double h = 1e-5) {
    auto refs = parameter_refs(params);
    std::vector<double> out(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const double saved = *refs[i];
        *refs[i] = saved + h;
        const double up = loss();
        *refs[i] = saved - h;
        const double down = loss();
        *refs[i] = saved;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

/// Largest relative discrepancy among entries whose absolute discrepancy
/// exceeds `abs_floor` (entries below the floor count as agreeing).
inline double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                                 double abs_floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double diff = std::abs(analytic[i] - numeric[i]);
        if (diff <= abs_floor) continue;
        const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
        worst = std::max(worst, diff / scale);
    }
    return worst;
}

/// Straight-line reimplementation of the dense forward pass, scalar loops only.
inline std::vector<double> naive_forward(const MlpParams& p, std::vector<double> x) {
    for (const auto& l : p.layers) {
        std::vector<double> y(static_cast<std::size_t>(l.weight.rows()));
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
            double acc = l.bias(i);
            for (Eigen::Index j = 0; j < l.weight.cols(); ++j) acc += l.weight(i, j) * x[j];
            switch (l.activation) {
                case Activation::tanh: acc = std::tanh(acc); break;
                case Activation::relu: acc = acc > 0.0 ? acc : 0.0; break;
                case Activation::identity: break;
            }
            y[i] = acc;
        }
        x = std::move(y);
    }
    return x;
}

/// Smallest |pre-activation| of any relu unit over a batch of input columns.
/// Central differences are only an oracle when no unit sits near its kink.
inline double min_relu_margin(const MlpParams& p, const Mat& inputs) {
    double margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        Vec x = inputs.col(c);
        for (const auto& l : p.layers) {
            Vec z = l.weight * x + l.bias;
            if (l.activation == Activation::relu) {
                margin = std::min(margin, z.cwiseAbs().minCoeff());
                z = z.cwiseMax(0.0);
            } else if (l.activation == Activation::tanh) {
                z = z.array().tanh();
            }
            x = std::move(z);
        }
    }
    return margin;
}

/// Brute-force population variance with a long-double two-pass sum.
inline double brute_force_variance(const std::vector<double>& v) {
    long double mean = 0.0L;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(v.size());
    long double acc = 0.0L;
    for (double x : v) acc += (x - mean) * (x - mean);
    return static_cast<double>(acc / static_cast<long double>(v.size()));
}

/// Asymptotic Kolmogorov-Smirnov p-value for statistic d over n samples.
inline double ks_p_value(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// KS statistic of samples against Uniform(lo, hi).
inline double ks_uniform_statistic(std::vector<double> samples, double lo, double hi) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    return d;
}

/// Small agent for gradient and behaviour tests.
inline AgentState small_agent(Rng& rng, int hidden = 16, int layers = 2) {
    AgentConfig c;
    c.state_dim = 2;
    c.goal_dim = 2;
    c.action_dim = 2;
    c.input_low = Vec::Constant(2, -1.0);
    c.input_high = Vec::Constant(2, 1.0);
    c.hidden_width = hidden;
    c.hidden_layers = layers;
    return make_agent(c, rng);
}

/// Random transition batch in the [-1,1]^2 point-reach box.
inline TransitionBatch random_batch(Rng& rng, int n, double epsilon = 0.05) {
    TransitionBatch b;
    auto fill = [&](Mat& m, Eigen::Index rows) {
        m.resize(rows, n);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, -1.0, 1.0);
    };
    fill(b.states, 2);
    fill(b.actions, 2);
    fill(b.next_states, 2);
    fill(b.desired_goals, 2);
    b.achieved_goals = b.next_states;
    b.rewards.resize(n);
    for (int i = 0; i < n; ++i)
        b.rewards(i) = (b.achieved_goals.col(i) - b.desired_goals.col(i)).norm() < epsilon ? 0.0 : -1.0;
    return b;
}

}  // namespace teach::testing
