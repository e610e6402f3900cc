#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gdf/geometry/bvh.hpp"
#include "gdf/meshing/grid.hpp"

namespace gdf::metrics {

using geometry::TriangleMesh;

enum class ChamferVariant { Squared, Unsquared };

/// Symmetric Chamfer distance between area-weighted point samples of the two
/// meshes: mean nearest-neighbour (squared) distance a -> b plus b -> a. Both
/// meshes are sampled with the same seed, so swapping arguments gives the
/// identical value.
double chamfer_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed,
                        ChamferVariant variant = ChamferVariant::Squared);

/// Mean |cos| between each sample's face normal and the face normal at its
/// nearest point on the other mesh, averaged over both directions. The
/// absolute value makes it independent of face orientation.
double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed);

/// Point-sampled symmetric Hausdorff distance (max over samples and vertices
/// of the distance to the other mesh).
double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed);

struct FieldError {
    double dist_err = 0.0;
    double grad_err = 0.0;
    std::size_t n_nodes = 0;
};

/// Compares a predicted distance field with the exact one on the lattice
/// nodes lying within threshold_cells cell sizes of the ground-truth surface.
/// dist_err is the mean |u_pred - u_true|, grad_err the mean L1 difference of
/// the unit directions.
FieldError near_surface_field_error(const meshing::DistanceFunction& predicted, const geometry::MeshIndex& gt,
                                    int resolution, double threshold_cells,
                                    const geometry::Aabb& bounds = meshing::default_bounds());

FieldError near_surface_field_error(const neural::NeuralField& field, const Eigen::VectorXf* code,
                                    const geometry::MeshIndex& gt, int resolution, double threshold_cells,
                                    const geometry::Aabb& bounds = meshing::default_bounds());

/// One evaluation row. cd is stored raw; the CSV reports it times 1e4 and nc
/// as a percentage.
struct EvalReport {
    std::string method;
    std::string shape;
    // NaN marks a metric that was not measured; it prints as an empty CSV cell.
    double cd = std::numeric_limits<double>::quiet_NaN();
    double nc = std::numeric_limits<double>::quiet_NaN();
    double dist_err = std::numeric_limits<double>::quiet_NaN();
    double grad_err = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;

    static std::string csv_header();
    std::string csv_row() const;
    std::string table() const;
};

}  // namespace gdf::metrics
