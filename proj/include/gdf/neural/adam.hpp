#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "gdf/common/error.hpp"

namespace gdf::neural {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// The rate is multiplied by this factor at each quarter of training.
    double decay_factor = 0.75;

    void validate() const {
        if (!(learning_rate > 0.0)) throw InvalidInputError("learning rate must be positive");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
            throw InvalidInputError("Adam betas must lie in [0, 1)");
        }
        if (!(decay_factor > 0.0)) throw InvalidInputError("decay factor must be positive");
    }
};

/// Step-decay schedule: base * factor^k where k counts the quarter boundaries
/// ceil(T/4), ceil(T/2), ceil(3T/4) at or before `iteration` (0-based).
inline double scheduled_learning_rate(double base, double factor, std::int64_t iteration, std::int64_t total) {
    double rate = base;
    for (std::int64_t q = 1; q <= 3; ++q) {
        const std::int64_t boundary = (q * total + 3) / 4;
        if (total > 0 && iteration >= boundary) rate *= factor;
    }
    return rate;
}

/// Adam with bias correction over a flat parameter vector.
template <typename Scalar>
class Adam {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Adam() = default;
    Adam(Eigen::Index size, const AdamConfig& config)
        : config_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {
        config_.validate();
    }

    void step(Vector& params, const Vector& grad, double learning_rate) {
        if (grad.size() != params.size() || params.size() != m_.size()) {
            throw InvalidInputError("Adam: parameter/gradient size mismatch");
        }
        ++steps_;
        const Scalar b1 = Scalar(config_.beta1);
        const Scalar b2 = Scalar(config_.beta2);
        m_ = b1 * m_ + (Scalar(1) - b1) * grad;
        v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
        const Scalar step_size = Scalar(learning_rate / c1);
        const Scalar eps = Scalar(config_.epsilon);
        const Scalar inv_sqrt_c2 = Scalar(1.0 / std::sqrt(c2));
        params.array() -= step_size * m_.array() / ((v_.array().sqrt() * inv_sqrt_c2) + eps);
    }

    std::int64_t steps() const { return steps_; }
    const Vector& first_moment() const { return m_; }
    const Vector& second_moment() const { return v_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    Vector m_;
    Vector v_;
    std::int64_t steps_ = 0;
};

}  // namespace gdf::neural
