#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "gdf/geometry/mesh.hpp"

namespace gdf::geometry {

using Rng = std::mt19937_64;

/// Query-point sampling around a normalized mesh. Offsets are fractions of
/// the mesh bounding-box diagonal.
struct SamplingConfig {
    std::size_t n_near_surface = 400000;
    std::size_t n_uniform = 20000;
    std::array<double, 2> sigma_near{0.005, 0.0005};
    std::uint64_t seed = 0;
    double uniform_half_extent = 0.55;

    std::size_t total() const { return n_near_surface + n_uniform; }
};

/// Area-weighted sampling on the triangles of a mesh.
class SurfaceSampler {
public:
    explicit SurfaceSampler(const TriangleMesh& mesh);

    struct Sample {
        Vec3 point;
        std::uint32_t triangle_id;
    };
    Sample sample(Rng& rng) const;

    const TriangleMesh& mesh() const { return *mesh_; }

private:
    const TriangleMesh* mesh_;
    std::vector<double> cumulative_area_;
};

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n, Rng& rng,
                                 std::vector<std::uint32_t>* triangle_ids = nullptr);

/// n_near_surface surface samples displaced by isotropic Gaussian offsets
/// (first half with sigma_near[0], second half with sigma_near[1]), followed
/// by n_uniform points uniform in [-h, h]^3 with h = uniform_half_extent.
std::vector<Vec3> sample_training_points(const TriangleMesh& mesh, const SamplingConfig& config, Rng& rng);

/// Displaces each point by a Gaussian offset, alternating halves between the
/// two sigma_near scales (absolute units here, already multiplied by the diagonal).
std::vector<Vec3> perturb_points(const std::vector<Vec3>& points, std::size_t count, std::array<double, 2> sigma,
                                 Rng& rng);

}  // namespace gdf::geometry
