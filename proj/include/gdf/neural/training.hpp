#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "gdf/field/gdf.hpp"
#include "gdf/neural/adam.hpp"
#include "gdf/neural/loss.hpp"
#include "gdf/neural/network.hpp"

namespace gdf::neural {

struct LossRecord {
    std::int64_t iteration = 0;
    double loss = 0.0;
};

struct TrainConfig {
    std::int64_t iterations = 30000;
    std::int64_t batch_size = 32000;
    AdamConfig adam;
    LossWeights weights = LossWeights::plain();
    std::uint64_t seed = 0;
    /// Loss history keeps the mean batch loss of every window of this many iterations.
    std::int64_t history_every = 1;
    /// Spread of the zero-mean normal used to initialize latent codes.
    double latent_init_std = 0.01;
    /// Optional squared-norm penalty on latent codes (0 disables it).
    double latent_l2 = 0.0;
    /// Optional cap on target distances (0 disables it). GDF/CSP targets are
    /// shortened along v, UDF targets are clamped.
    double clamp_distance = 0.0;
    std::function<void(std::int64_t iteration, double loss)> on_progress;

    void validate() const;
};

struct TrainResult {
    NeuralField field;
    std::vector<LossRecord> history;
};

/// Regresses `repr` targets for one shape. Batches are drawn uniformly with
/// replacement; everything is reproducible from config.seed.
TrainResult train_single(const field::TrainingSet& set, MlpConfig mlp, Representation repr, const TrainConfig& config);

/// Generic regression loop behind train_single: inputs (spatial_dim x N) and
/// targets (output_dim x N) already in network form.
TrainResult train_regression(const Eigen::MatrixXf& inputs, const Eigen::MatrixXf& targets, MlpConfig mlp,
                             Representation repr, const TrainConfig& config);

struct AutoDecoderResult {
    NeuralField field;
    LatentTable latents;
    std::vector<LossRecord> history;
};

/// Jointly optimizes shared weights and one latent code per shape. Each batch
/// slot picks a shape uniformly, then a point uniformly within that shape.
AutoDecoderResult train_autodecoder(const std::vector<field::TrainingSet>& shapes, MlpConfig mlp,
                                    Representation repr, const TrainConfig& config);

struct LatentFitConfig {
    std::int64_t iterations = 800;
    std::int64_t batch_size = 8192;
    /// Pseudo ground-truth query count built around the cloud.
    std::int64_t n_queries = 100000;
    /// Offset scales as fractions of the cloud's bounding-box diagonal.
    std::array<double, 2> sigma_near{0.005, 0.0005};
    /// Adds uniform-volume queries (5% of n_queries) in [-0.55, 0.55]^3.
    bool include_uniform = false;
    AdamConfig adam{.learning_rate = 1e-3};
    LossWeights weights = LossWeights::plain();
    double init_std = 0.01;
    std::uint64_t seed = 0;
};

struct LatentFitResult {
    Eigen::VectorXf code;
    std::vector<LossRecord> history;
};

/// Pseudo ground truth for a point cloud: every query is labelled with the
/// vector to its nearest cloud point.
field::TrainingSet pseudo_training_set(const std::vector<Vec3>& cloud, const LatentFitConfig& config);

/// Optimizes a fresh latent code against pseudo ground truth built from the
/// cloud while the network weights stay frozen.
LatentFitResult fit_latent(const std::vector<Vec3>& cloud, const NeuralField& field, const LatentFitConfig& config);

}  // namespace gdf::neural
