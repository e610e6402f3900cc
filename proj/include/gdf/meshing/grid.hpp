#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gdf/field/gdf.hpp"
#include "gdf/geometry/bvh.hpp"
#include "gdf/neural/network.hpp"

namespace gdf::meshing {

using geometry::Aabb;
using geometry::Vec3;

/// Regular lattice of (u, g) samples. `resolution` counts cells per axis, so
/// there are resolution + 1 nodes per axis and node (i, j, k) sits at
/// bounds.lo + (i, j, k) * cell_size().
struct FieldGrid {
    std::array<int, 3> resolution{0, 0, 0};
    Aabb bounds;
    std::vector<float> u;
    std::vector<Eigen::Vector3f> g;

    std::array<int, 3> nodes_per_axis() const {
        return {resolution[0] + 1, resolution[1] + 1, resolution[2] + 1};
    }
    std::size_t node_count() const;
    std::size_t node_index(int i, int j, int k) const {
        const auto n = nodes_per_axis();
        return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
    }
    Vec3 cell_size() const;
    Vec3 node_position(int i, int j, int k) const;
};

/// Batched distance oracle: (u, g) per point, g pointing toward the surface.
using DistanceFunction = std::function<std::vector<field::Decomposition>(const std::vector<Vec3>&)>;

/// Evaluates `fn` at every lattice node, `chunk`^3 nodes at a time.
FieldGrid evaluate_grid(const DistanceFunction& fn, std::array<int, 3> resolution, const Aabb& bounds,
                        int chunk = 32);

/// Network-backed lattice via neural::evaluate_distance.
FieldGrid evaluate_grid(const neural::NeuralField& field, const Eigen::VectorXf* code,
                        std::array<int, 3> resolution, const Aabb& bounds, int chunk = 32);

inline std::array<int, 3> cube_resolution(int n) { return {n, n, n}; }
/// Default meshing volume: the normalized unit box padded by 10%.
Aabb default_bounds();

// Analytic oracles.
DistanceFunction sphere_distance(const Vec3& center, double radius);
DistanceFunction mesh_distance(const geometry::MeshIndex& index);
DistanceFunction network_distance(const neural::NeuralField& field, const Eigen::VectorXf* code);

// GDFG dump: "GDFG", u32 version, 3 x u32 resolution, 6 x float32 bounds
// (lo, hi), node_count float32 u values, node_count x 3 float32 g values.
inline constexpr std::uint32_t kGridVersion = 1;
void write_grid(const FieldGrid& grid, const std::filesystem::path& path);
FieldGrid read_grid(const std::filesystem::path& path);

}  // namespace gdf::meshing
