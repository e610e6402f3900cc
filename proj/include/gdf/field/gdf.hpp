#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "gdf/geometry/bvh.hpp"
#include "gdf/geometry/sampling.hpp"

namespace gdf::field {

using geometry::Vec3;

/// Query point x with the vector v = x_hat - x to its nearest surface point.
struct GdfSample {
    Vec3 x = Vec3::Zero();
    Vec3 v = Vec3::Zero();
};

/// Unsigned distance u = |v| and unit direction g = v / u. At the surface
/// (u below kZeroDistance) g is the null vector.
struct Decomposition {
    double u = 0.0;
    Vec3 g = Vec3::Zero();
};

inline constexpr double kZeroDistance = 1e-12;

Decomposition decompose(const Vec3& v);
inline Vec3 recompose(const Decomposition& d) { return d.u * d.g; }

enum class Representation : std::uint8_t { Gdf = 0, Udf = 1, Csp = 2 };

/// Output width for 3D inputs; output_dim(r, d) for d-dimensional inputs.
int output_dim(Representation r);
int output_dim(Representation r, int spatial_dim);
std::string_view to_string(Representation r);
Representation representation_from_string(std::string_view name);

/// Regression target for one sample: v for GDF, |v| for UDF, x + v for CSP.
/// Returns output_dim(r) leading entries in a 3-vector; the rest are zero.
Vec3 target_for(Representation r, const GdfSample& sample);

/// Reverse of target_for for network outputs: the implied nearest-point vector
/// v for GDF and CSP. UDF carries no direction and is not accepted.
Vec3 vector_from_output(Representation r, const Vec3& x, const Vec3& output);

GdfSample gdf_ground_truth(const geometry::Bvh& bvh, const geometry::TriangleMesh& mesh, const Vec3& x);

struct TrainingSet {
    std::vector<GdfSample> samples;
    std::uint32_t shape_id = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

/// Samples query points on a normalized mesh and labels each with its exact
/// ground-truth GDF vector. Deterministic for config.seed.
TrainingSet build_training_set(const geometry::TriangleMesh& mesh, const geometry::SamplingConfig& config);

/// Labels an existing point list against a mesh.
TrainingSet label_points(const geometry::MeshIndex& index, const std::vector<Vec3>& points);

// GDFS cache: "GDFS", u32 version, u64 count, then count records of six
// little-endian float32 values (x, y, z, vx, vy, vz).
inline constexpr std::uint32_t kSampleCacheVersion = 1;
void write_sample_cache(const TrainingSet& set, const std::filesystem::path& path);
TrainingSet read_sample_cache(const std::filesystem::path& path);

}  // namespace gdf::field
