#include "gdf/field/gdf.hpp"

#include <fstream>
#include <string>

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"
#include "gdf/common/parallel.hpp"

namespace gdf::field {

Decomposition decompose(const Vec3& v) {
    Decomposition d;
    d.u = v.norm();
    if (d.u < kZeroDistance) {
        d.u = 0.0;
        return d;
    }
    d.g = v / d.u;
    return d;
}

int output_dim(Representation r) { return output_dim(r, 3); }
int output_dim(Representation r, int spatial_dim) { return r == Representation::Udf ? 1 : spatial_dim; }

std::string_view to_string(Representation r) {
    switch (r) {
        case Representation::Gdf: return "gdf";
        case Representation::Udf: return "udf";
        case Representation::Csp: return "csp";
    }
    return "?";
}

Representation representation_from_string(std::string_view name) {
    if (name == "gdf" || name == "GDF") return Representation::Gdf;
    if (name == "udf" || name == "UDF") return Representation::Udf;
    if (name == "csp" || name == "CSP") return Representation::Csp;
    throw InvalidInputError("unknown representation '" + std::string(name) + "' (expected gdf, udf or csp)");
}

Vec3 target_for(Representation r, const GdfSample& sample) {
    switch (r) {
        case Representation::Gdf: return sample.v;
        case Representation::Udf: return {sample.v.norm(), 0.0, 0.0};
        case Representation::Csp: return sample.x + sample.v;
    }
    return Vec3::Zero();
}

Vec3 vector_from_output(Representation r, const Vec3& x, const Vec3& output) {
    switch (r) {
        case Representation::Gdf: return output;
        case Representation::Csp: return output - x;
        case Representation::Udf: break;
    }
    throw InvalidInputError("UDF outputs have no direction");
}

GdfSample gdf_ground_truth(const geometry::Bvh& bvh, const geometry::TriangleMesh& mesh, const Vec3& x) {
    const auto hit = bvh.closest_point(mesh, x);
    return {x, hit.point - x};
}

TrainingSet label_points(const geometry::MeshIndex& index, const std::vector<Vec3>& points) {
    TrainingSet set;
    set.samples.resize(points.size());
    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            set.samples[i] = gdf_ground_truth(index.bvh(), index.mesh(), points[i]);
        }
    });
    return set;
}

TrainingSet build_training_set(const geometry::TriangleMesh& mesh, const geometry::SamplingConfig& config) {
    geometry::Rng rng(config.seed);
    const auto points = geometry::sample_training_points(mesh, config, rng);
    const geometry::MeshIndex index(mesh);
    return label_points(index, points);
}

void write_sample_cache(const TrainingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    io::write_magic(out, "GDFS");
    io::write_le(out, kSampleCacheVersion);
    io::write_le(out, static_cast<std::uint64_t>(set.samples.size()));
    for (const auto& s : set.samples) {
        for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(s.x[a]));
        for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(s.v[a]));
    }
    if (!out) throw InvalidInputError("write failed: " + path.string());
}

TrainingSet read_sample_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    io::expect_magic(in, "GDFS");
    const auto version = io::read_le<std::uint32_t>(in, "version");
    if (version != kSampleCacheVersion) {
        throw FormatError(path.string() + ": unsupported GDFS version " + std::to_string(version));
    }
    const auto count = io::read_le<std::uint64_t>(in, "count");
    TrainingSet set;
    set.samples.resize(count);
    for (auto& s : set.samples) {
        for (int a = 0; a < 3; ++a) s.x[a] = io::read_le<float>(in, "record");
        for (int a = 0; a < 3; ++a) s.v[a] = io::read_le<float>(in, "record");
    }
    return set;
}

}  // namespace gdf::field
