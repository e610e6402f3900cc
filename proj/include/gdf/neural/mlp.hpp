#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gdf/common/error.hpp"

namespace gdf::neural {

/// Fully connected network: `depth` linear layers, rectifier on every hidden
/// layer, linear output. Inputs are the spatial coordinates followed by the
/// latent code (if any).
struct MlpConfig {
    int depth = 8;
    int width = 512;
    int spatial_dim = 3;
    int latent_len = 0;
    int output_dim = 3;

    int input_dim() const { return spatial_dim + latent_len; }

    void validate() const {
        if (depth < 2) throw InvalidInputError("MLP depth must be at least 2");
        if (width < 1) throw InvalidInputError("MLP width must be at least 1");
        if (output_dim < 1 || output_dim > 3) throw InvalidInputError("MLP output_dim must be 1, 2 or 3");
        if (spatial_dim < 1 || latent_len < 0) throw InvalidInputError("bad MLP input dimensions");
    }
    bool operator==(const MlpConfig&) const = default;
};

/// Multilayer perceptron with all parameters in one flat vector. Layer l owns
/// a column-major (out x in) weight block followed by its bias. Batches are
/// matrices with one column per point.
template <typename Scalar>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;
    using VectorMap = Eigen::Map<Vector>;
    using ConstVectorMap = Eigen::Map<const Vector>;

    /// Post-activation values of every layer, input first.
    struct Tape {
        std::vector<Matrix> activations;
    };

    Mlp() = default;

    /// All-zero parameters.
    explicit Mlp(const MlpConfig& config) : config_(config) {
        config_.validate();
        std::size_t offset = 0;
        for (int l = 0; l < config_.depth; ++l) {
            const int in = l == 0 ? config_.input_dim() : config_.width;
            const int out = l + 1 == config_.depth ? config_.output_dim : config_.width;
            layers_.push_back({in, out, offset});
            offset += static_cast<std::size_t>(in) * out + out;
        }
        params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
    }

    /// Uniform weights in +-sqrt(6 / fan_in), zero biases.
    template <typename Rng>
    void init_he_uniform(Rng& rng) {
        for (int l = 0; l < depth(); ++l) {
            const double bound = std::sqrt(6.0 / layers_[l].in);
            std::uniform_real_distribution<double> dist(-bound, bound);
            auto w = weight(l);
            // Row-major fill order keeps the draw sequence independent of storage layout.
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(dist(rng));
            }
            bias(l).setZero();
        }
    }

    const MlpConfig& config() const { return config_; }
    int depth() const { return static_cast<int>(layers_.size()); }
    Eigen::Index parameter_count() const { return params_.size(); }

    Vector& parameters() { return params_; }
    const Vector& parameters() const { return params_; }

    MatrixMap weight(int l) { return {params_.data() + layers_[l].offset, layers_[l].out, layers_[l].in}; }
    ConstMatrixMap weight(int l) const { return {params_.data() + layers_[l].offset, layers_[l].out, layers_[l].in}; }
    VectorMap bias(int l) { return {params_.data() + bias_offset(l), layers_[l].out}; }
    ConstVectorMap bias(int l) const { return {params_.data() + bias_offset(l), layers_[l].out}; }

    /// Plain batched forward pass.
    Matrix forward(const Matrix& input) const {
        check_input(input);
        Matrix a = input;
        for (int l = 0; l < depth(); ++l) {
            Matrix z = weight(l) * a;
            z.colwise() += bias(l);
            if (l + 1 < depth()) z = z.cwiseMax(Scalar(0));
            a = std::move(z);
        }
        return a;
    }

    /// Forward pass that records activations for backward().
    Matrix forward(const Matrix& input, Tape& tape) const {
        check_input(input);
        tape.activations.resize(depth());
        tape.activations[0] = input;
        Matrix z;
        for (int l = 0; l < depth(); ++l) {
            z.noalias() = weight(l) * tape.activations[l];
            z.colwise() += bias(l);
            if (l + 1 < depth()) {
                tape.activations[l + 1] = z.cwiseMax(Scalar(0));
            }
        }
        return z;
    }

    /// Reverse pass. `grad_output` is dL/d(output) per column. Parameter
    /// gradients are accumulated into `param_grad` (same layout as
    /// parameters()) when non-null; dL/d(input) is written to `grad_input`
    /// when non-null.
    void backward(const Tape& tape, const Matrix& grad_output, Vector* param_grad, Matrix* grad_input) const {
        if (grad_output.rows() != config_.output_dim || grad_output.cols() != tape.activations[0].cols()) {
            throw InvalidInputError("backward: gradient shape does not match the recorded batch");
        }
        if (param_grad && param_grad->size() != params_.size()) {
            param_grad->setZero(params_.size());
        }
        Matrix delta = grad_output;
        Matrix prev;
        for (int l = depth() - 1; l >= 0; --l) {
            const Matrix& a_in = tape.activations[l];
            if (param_grad) {
                MatrixMap gw(param_grad->data() + layers_[l].offset, layers_[l].out, layers_[l].in);
                VectorMap gb(param_grad->data() + bias_offset(l), layers_[l].out);
                gw.noalias() += delta * a_in.transpose();
                gb.noalias() += delta.rowwise().sum();
            }
            if (l == 0 && !grad_input) break;
            prev.noalias() = weight(l).transpose() * delta;
            if (l > 0) {
                // ReLU derivative: active where the stored activation is positive.
                prev = (a_in.array() > Scalar(0)).select(prev, Scalar(0));
            }
            delta.swap(prev);
        }
        if (grad_input) *grad_input = std::move(delta);
    }

    template <typename Other>
    Mlp<Other> cast() const {
        Mlp<Other> out(config_);
        out.parameters() = params_.template cast<Other>();
        return out;
    }

private:
    struct LayerShape {
        int in;
        int out;
        std::size_t offset;
    };

    std::size_t bias_offset(int l) const {
        return layers_[l].offset + static_cast<std::size_t>(layers_[l].in) * layers_[l].out;
    }

    void check_input(const Matrix& input) const {
        if (input.rows() != config_.input_dim()) {
            throw InvalidInputError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                                    std::to_string(config_.input_dim()));
        }
    }

    MlpConfig config_;
    std::vector<LayerShape> layers_;
    Vector params_;
};

}  // namespace gdf::neural
