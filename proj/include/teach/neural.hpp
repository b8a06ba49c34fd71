#pragma once

#include "teach/common.hpp"

#include <span>
#include <vector>

namespace teach {

enum class Activation { tanh, relu, identity };

const char* to_string(Activation a);

struct DenseLayer {
    Mat weight;  // out x in
    Vec bias;    // out
    Activation activation = Activation::identity;
};

struct MlpParams {
    std::vector<DenseLayer> layers;

    Eigen::Index input_dim() const { return layers.front().weight.cols(); }
    Eigen::Index output_dim() const { return layers.back().weight.rows(); }
    std::size_t parameter_count() const;
};

/// Gradient (or moment) tensors shaped like an MlpParams.
struct ParamGrads {
    std::vector<Mat> weight;
    std::vector<Vec> bias;

    static ParamGrads zeros_like(const MlpParams& params);
    bool all_finite() const;
    ParamGrads& operator*=(double s);
};

/// Hidden layers use `hidden_activation`; weights and biases are drawn
/// uniformly in +-1/sqrt(fan_in).
MlpParams make_mlp(int input_dim, std::span<const int> hidden, int output_dim,
                   Activation hidden_activation, Activation output_activation, Rng& rng);

/// Throws ContractError if the layer shapes do not chain.
void check_shapes(const MlpParams& params);
bool same_shape(const MlpParams& a, const MlpParams& b);

Vec mlp_forward(const MlpParams& params, const Eigen::Ref<const Vec>& input);

/// Batched forward pass, one sample per column.
Mat mlp_forward_batch(const MlpParams& params, const Mat& inputs);

/// Post-activation outputs of every layer; `activations[0]` is the input.
struct ForwardTrace {
    std::vector<Mat> activations;

    const Mat& output() const { return activations.back(); }
};

ForwardTrace mlp_forward_trace(const MlpParams& params, const Mat& inputs);

struct BackwardResult {
    ParamGrads params;  // summed over the batch columns
    Mat input;          // d(loss)/d(input), one column per sample
};

/// Reverse-mode pass for upstream = d(loss)/d(output) (output_dim x batch).
BackwardResult mlp_backward(const MlpParams& params, const ForwardTrace& trace, const Mat& upstream);
BackwardResult mlp_backward(const MlpParams& params, const Mat& inputs, const Mat& upstream);

struct OptimizerState {
    ParamGrads first_moment;
    ParamGrads second_moment;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

OptimizerState make_optimizer_state(const MlpParams& params);

/// Bias-corrected Adam update (descent on `grads`). Rejects non-finite
/// gradients with NumericError before touching any state.
void adam_step(MlpParams& params, const ParamGrads& grads, OptimizerState& state,
               double learning_rate);

/// target <- alpha * target + (1 - alpha) * online, elementwise.
void polyak_update(MlpParams& target, const MlpParams& online, double alpha);

}  // namespace teach
