#include "teach/neural.hpp"

#include <cmath>
#include <string>

namespace teach {

namespace {

void apply_activation(Mat& z, Activation a) {
    switch (a) {
        case Activation::tanh:
            z = z.array().tanh().matrix();
            break;
        case Activation::relu:
            z = z.cwiseMax(0.0);
            break;
        case Activation::identity:
            break;
    }
}

// Derivative expressed through the post-activation output y.
void scale_by_derivative(Mat& grad, const Mat& y, Activation a) {
    switch (a) {
        case Activation::tanh:
            grad.array() *= 1.0 - y.array().square();
            break;
        case Activation::relu:
            grad.array() *= (y.array() > 0.0).cast<double>();
            break;
        case Activation::identity:
            break;
    }
}

}  // namespace

const char* to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "?";
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

ParamGrads ParamGrads::zeros_like(const MlpParams& params) {
    ParamGrads g;
    for (const auto& l : params.layers) {
        g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vec::Zero(l.bias.size()));
    }
    return g;
}

bool ParamGrads::all_finite() const {
    for (const auto& w : weight)
        if (!w.allFinite()) return false;
    for (const auto& b : bias)
        if (!b.allFinite()) return false;
    return true;
}

ParamGrads& ParamGrads::operator*=(double s) {
    for (auto& w : weight) w *= s;
    for (auto& b : bias) b *= s;
    return *this;
}

MlpParams make_mlp(int input_dim, std::span<const int> hidden, int output_dim,
                   Activation hidden_activation, Activation output_activation, Rng& rng) {
    if (input_dim < 1 || output_dim < 1) throw ContractError("make_mlp: dimensions must be positive");
    MlpParams p;
    int fan_in = input_dim;
    auto add_layer = [&](int out, Activation act) {
        if (out < 1) throw ContractError("make_mlp: layer width must be positive");
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        DenseLayer layer;
        layer.weight.resize(out, fan_in);
        layer.bias.resize(out);
        for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
            for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
                layer.weight(i, j) = uniform_real(rng, -bound, bound);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = uniform_real(rng, -bound, bound);
        layer.activation = act;
        p.layers.push_back(std::move(layer));
        fan_in = out;
    };
    for (int width : hidden) add_layer(width, hidden_activation);
    add_layer(output_dim, output_activation);
    return p;
}

void check_shapes(const MlpParams& params) {
    if (params.layers.empty()) throw ContractError("MLP has no layers");
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        if (l.bias.size() != l.weight.rows())
            throw ContractError("MLP layer " + std::to_string(i) + ": bias/weight rows differ");
        if (i > 0 && l.weight.cols() != params.layers[i - 1].weight.rows())
            throw ContractError("MLP layer " + std::to_string(i) + ": input width does not chain");
    }
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        if (a.layers[i].weight.rows() != b.layers[i].weight.rows() ||
            a.layers[i].weight.cols() != b.layers[i].weight.cols() ||
            a.layers[i].bias.size() != b.layers[i].bias.size())
            return false;
    }
    return true;
}

Vec mlp_forward(const MlpParams& params, const Eigen::Ref<const Vec>& input) {
    Mat x = input;
    return mlp_forward_batch(params, x).col(0);
}

Mat mlp_forward_batch(const MlpParams& params, const Mat& inputs) {
    if (params.layers.empty() || inputs.rows() != params.input_dim())
        throw ContractError("mlp_forward: input has " + std::to_string(inputs.rows()) +
                            " rows, network expects " +
                            std::to_string(params.layers.empty() ? 0 : params.input_dim()));
    Mat x = inputs;
    for (const auto& l : params.layers) {
        Mat z = l.weight * x;
        z.colwise() += l.bias;
        apply_activation(z, l.activation);
        x = std::move(z);
    }
    return x;
}

ForwardTrace mlp_forward_trace(const MlpParams& params, const Mat& inputs) {
    if (params.layers.empty() || inputs.rows() != params.input_dim())
        throw ContractError("mlp_forward_trace: input dimension mismatch");
    ForwardTrace trace;
    trace.activations.reserve(params.layers.size() + 1);
    trace.activations.push_back(inputs);
    for (const auto& l : params.layers) {
        Mat z = l.weight * trace.activations.back();
        z.colwise() += l.bias;
        apply_activation(z, l.activation);
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardTrace& trace, const Mat& upstream) {
    if (trace.activations.size() != params.layers.size() + 1)
        throw ContractError("mlp_backward: trace does not match network depth");
    if (upstream.rows() != params.output_dim() || upstream.cols() != trace.output().cols())
        throw ContractError("mlp_backward: upstream gradient shape mismatch");
    BackwardResult out;
    out.params.weight.resize(params.layers.size());
    out.params.bias.resize(params.layers.size());
    Mat grad = upstream;
    for (std::size_t k = params.layers.size(); k-- > 0;) {
        const auto& l = params.layers[k];
        scale_by_derivative(grad, trace.activations[k + 1], l.activation);
        out.params.weight[k] = grad * trace.activations[k].transpose();
        out.params.bias[k] = grad.rowwise().sum();
        grad = l.weight.transpose() * grad;
    }
    out.input = std::move(grad);
    return out;
}

BackwardResult mlp_backward(const MlpParams& params, const Mat& inputs, const Mat& upstream) {
    return mlp_backward(params, mlp_forward_trace(params, inputs), upstream);
}

OptimizerState make_optimizer_state(const MlpParams& params) {
    OptimizerState s;
    s.first_moment = ParamGrads::zeros_like(params);
    s.second_moment = ParamGrads::zeros_like(params);
    return s;
}

void adam_step(MlpParams& params, const ParamGrads& grads, OptimizerState& state,
               double learning_rate) {
    const std::size_t n = params.layers.size();
    if (grads.weight.size() != n || grads.bias.size() != n || state.first_moment.weight.size() != n ||
        state.second_moment.weight.size() != n)
        throw ContractError("adam_step: layer count mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = params.layers[k];
        if (grads.weight[k].rows() != l.weight.rows() || grads.weight[k].cols() != l.weight.cols() ||
            grads.bias[k].size() != l.bias.size())
            throw ContractError("adam_step: gradient shape mismatch at layer " + std::to_string(k));
    }
    if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient component");

    ++state.step;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= learning_rate * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + state.epsilon);
    };
    for (std::size_t k = 0; k < n; ++k) {
        update(params.layers[k].weight, grads.weight[k], state.first_moment.weight[k],
               state.second_moment.weight[k]);
        update(params.layers[k].bias, grads.bias[k], state.first_moment.bias[k],
               state.second_moment.bias[k]);
    }
}

void polyak_update(MlpParams& target, const MlpParams& online, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("polyak_update: alpha must lie in [0, 1]");
    if (!same_shape(target, online)) throw ContractError("polyak_update: shape mismatch");
    for (std::size_t k = 0; k < target.layers.size(); ++k) {
        auto& t = target.layers[k];
        const auto& o = online.layers[k];
        t.weight = alpha * t.weight + (1.0 - alpha) * o.weight;
        t.bias = alpha * t.bias + (1.0 - alpha) * o.bias;
    }
}

}  // namespace teach
