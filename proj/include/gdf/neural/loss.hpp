#pragma once

#include <cmath>

#include <Eigen/Core>

#include "gdf/common/error.hpp"
#include "gdf/field/gdf.hpp"

namespace gdf::neural {

/// Weights of the composite GDF loss: L1 on the vector, L1 on its normalized
/// direction, and absolute error on its length. (1, 0, 0) is the plain L1 loss.
struct LossWeights {
    double adf = 1.0;
    double grad = 0.0;
    double udf = 0.0;

    static constexpr LossWeights plain() { return {1.0, 0.0, 0.0}; }
    static constexpr LossWeights composite_default() { return {100.0, 4.0, 50.0}; }
    void validate() const;
};

/// Guard added to |pred| before normalizing in the direction term.
inline constexpr double kNormalizeEpsilon = 1e-8;

namespace detail {
template <typename S>
S sign(S x) {
    return x > S(0) ? S(1) : (x < S(0) ? S(-1) : S(0));
}
}  // namespace detail

/// Sum of absolute differences. Writes the subgradient wrt pred when asked
/// (zero at ties).
template <typename S, int N>
S l1_loss(const Eigen::Matrix<S, N, 1>& pred, const Eigen::Matrix<S, N, 1>& target,
          Eigen::Matrix<S, N, 1>* grad = nullptr) {
    S loss = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const S d = pred[i] - target[i];
        loss += std::abs(d);
        if (grad) (*grad)[i] = detail::sign(d);
    }
    return loss;
}

/// adf * |p - v|_1 + grad * |p / (|p| + eps) - g|_1 + udf * | |p| - u |
/// with (u, g) the decomposition of the target v.
template <typename S, int N = 3>
S composite_loss(const Eigen::Matrix<S, N, 1>& pred, const Eigen::Matrix<S, N, 1>& target, const LossWeights& w,
                 Eigen::Matrix<S, N, 1>* grad = nullptr) {
    using V = Eigen::Matrix<S, N, 1>;
    V g_adf;
    S loss = S(w.adf) * l1_loss<S, N>(pred, target, grad ? &g_adf : nullptr);
    if (grad) *grad = S(w.adf) * g_adf;
    if (w.grad == 0.0 && w.udf == 0.0) return loss;

    const S u = target.norm();
    const V g = u < S(field::kZeroDistance) ? V::Zero() : V(target / u);
    const S n = pred.norm();

    if (w.grad != 0.0) {
        const S denom = n + S(kNormalizeEpsilon);
        const V q = pred / denom;
        V s;
        loss += S(w.grad) * l1_loss<S, N>(q, g, &s);
        if (grad && n > S(0)) {
            // dq/dp = I / denom - p p^T / (n denom^2)
            const V back = s / denom - pred * (pred.dot(s) / (n * denom * denom));
            *grad += S(w.grad) * back;
        }
    }
    if (w.udf != 0.0) {
        const S d = n - u;
        loss += S(w.udf) * std::abs(d);
        if (grad && n > S(0)) *grad += S(w.udf) * detail::sign(d) * pred / n;
    }
    return loss;
}

/// Plain L1 on the GDF vector.
inline double loss_gdf(const Eigen::Vector3d& pred, const Eigen::Vector3d& target) {
    return l1_loss<double, 3>(pred, target);
}

inline double loss_composite(const Eigen::Vector3d& pred, const Eigen::Vector3d& target, const LossWeights& w) {
    return composite_loss<double>(pred, target, w);
}

namespace detail {
template <typename S, int N>
double vector_batch_loss(field::Representation repr, const LossWeights& weights,
                         const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& pred,
                         const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& target,
                         Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>* grad) {
    using V = Eigen::Matrix<S, N, 1>;
    const Eigen::Index n = pred.cols();
    const S inv_n = S(1) / S(n);
    double total = 0.0;
    V g;
    for (Eigen::Index j = 0; j < n; ++j) {
        const V p = pred.col(j);
        const V t = target.col(j);
        if (N == 1) {
            total += l1_loss<S, N>(p, t, grad ? &g : nullptr);
        } else {
            total += repr == field::Representation::Gdf ? composite_loss<S, N>(p, t, weights, grad ? &g : nullptr)
                                                        : l1_loss<S, N>(p, t, grad ? &g : nullptr);
        }
        if (grad) grad->col(j) = g * inv_n;
    }
    return total / double(n);
}
}  // namespace detail

/// Mean per-sample loss over a batch (one column per sample) for the given
/// representation, with dL/d(pred) written into grad (same shape, already
/// divided by the batch size). GDF uses the composite loss with `weights`;
/// UDF and CSP use plain L1 on their targets. Per-sample losses are summed in
/// double in column order.
template <typename S>
S batch_loss(field::Representation repr, const LossWeights& weights,
             const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& pred,
             const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& target,
             Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>* grad) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.cols() == 0) {
        throw InvalidInputError("batch_loss: prediction and target shapes differ");
    }
    if (grad) grad->resize(pred.rows(), pred.cols());
    switch (pred.rows()) {
        case 1: return S(detail::vector_batch_loss<S, 1>(repr, weights, pred, target, grad));
        case 2: return S(detail::vector_batch_loss<S, 2>(repr, weights, pred, target, grad));
        case 3: return S(detail::vector_batch_loss<S, 3>(repr, weights, pred, target, grad));
        default: throw InvalidInputError("batch_loss: outputs must have 1 to 3 components");
    }
}

}  // namespace gdf::neural
