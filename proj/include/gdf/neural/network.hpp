#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "gdf/field/gdf.hpp"
#include "gdf/geometry/mesh.hpp"
#include "gdf/neural/mlp.hpp"

namespace gdf::neural {

using field::Representation;
using geometry::Vec3;

/// One latent code per training shape, stored as the columns of a matrix.
struct LatentTable {
    Eigen::MatrixXf codes;  // latent_len x shape_count

    int length() const { return static_cast<int>(codes.rows()); }
    int count() const { return static_cast<int>(codes.cols()); }
    Eigen::VectorXf code(int i) const { return codes.col(i); }
};

/// A trained (or freshly initialized) network together with what it predicts.
struct NeuralField {
    MlpConfig config;
    Representation representation = Representation::Gdf;
    Mlp<float> mlp;
    /// Maps the original mesh coordinates into the network's input space.
    geometry::NormalizeTransform normalization;
};

/// He-uniform initialized network; output_dim is taken from the representation.
NeuralField make_field(MlpConfig config, Representation repr, std::uint64_t seed);

/// Points are evaluated in fixed-width blocks so every point's result is
/// independent of how many other points share the call.
inline constexpr Eigen::Index kEvalBlock = 64;

/// Network outputs for points given as a (spatial_dim x N) matrix.
/// `code` must be supplied iff the network has a latent input.
Eigen::MatrixXf evaluate_outputs(const NeuralField& field, const Eigen::MatrixXf& points,
                                 const Eigen::VectorXf* code = nullptr);

/// Gradient of the (scalar) first output wrt the spatial input, per point.
Eigen::MatrixXf evaluate_input_gradient(const NeuralField& field, const Eigen::MatrixXf& points,
                                        const Eigen::VectorXf* code = nullptr);

/// Output for a single point.
Eigen::VectorXf forward(const NeuralField& field, const Vec3& x, const Eigen::VectorXf* code = nullptr);

/// Unsigned distance and unit direction toward the surface at each point.
/// GDF and CSP decompose their outputs directly; UDF takes u from its output
/// and g as the negated, normalized input-gradient obtained by reverse mode.
std::vector<field::Decomposition> evaluate_distance(const NeuralField& field, const std::vector<Vec3>& points,
                                                    const Eigen::VectorXf* code = nullptr);

Eigen::MatrixXf to_matrix(const std::vector<Vec3>& points);

// Checkpoint: "GDFN", u32 version, u8 representation, u32 depth, width,
// spatial_dim, latent_len, output_dim; u32 latent count, u32 latent length,
// codes (float32, code by code); per layer the weights (row-major, out x in)
// then biases as float32; finally the normalization scale and translation as
// four float32 values. Everything little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NeuralField field;
    LatentTable latents;
};

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace gdf::neural
