#include "gdf/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gdf/common/error.hpp"
#include "gdf/common/parallel.hpp"
#include "gdf/geometry/kdtree.hpp"
#include "gdf/geometry/sampling.hpp"

namespace gdf::metrics {

using geometry::Vec3;

namespace {

void require_nonempty(const TriangleMesh& a, const TriangleMesh& b) {
    if (a.empty() || b.empty()) throw InvalidInputError("metric needs two non-empty meshes");
}

struct SampleSet {
    std::vector<Vec3> points;
    std::vector<std::uint32_t> triangles;
};

SampleSet sample(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    geometry::Rng rng(seed);
    SampleSet s;
    s.points = geometry::sample_surface(mesh, n, rng, &s.triangles);
    return s;
}

// Per-item values are computed in parallel into fixed slots, then summed in order.
template <typename Fn>
double ordered_mean(std::size_t n, Fn&& value) {
    std::vector<double> values(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) values[i] = value(i);
    });
    double sum = 0.0;
    for (double v : values) sum += v;
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double one_sided_chamfer(const std::vector<Vec3>& from, const geometry::PointIndex& to, ChamferVariant variant) {
    return ordered_mean(from.size(), [&](std::size_t i) {
        const double d2 = to.nearest(from[i]).squared_distance;
        return variant == ChamferVariant::Squared ? d2 : std::sqrt(d2);
    });
}

double one_sided_normal(const SampleSet& from, const TriangleMesh& from_mesh, const TriangleMesh& to,
                        const geometry::Bvh& to_bvh) {
    return ordered_mean(from.points.size(), [&](std::size_t i) {
        const Vec3 na = from_mesh.triangle_normal(from.triangles[i]);
        const Vec3 nb = to.triangle_normal(to_bvh.closest_point(to, from.points[i]).triangle_id);
        return std::abs(na.dot(nb));
    });
}

}  // namespace

double chamfer_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed,
                        ChamferVariant variant) {
    require_nonempty(a, b);
    if (n_samples == 0) throw InvalidInputError("chamfer distance needs at least one sample");
    const SampleSet sa = sample(a, n_samples, seed);
    const SampleSet sb = sample(b, n_samples, seed);
    const geometry::PointIndex ia(sa.points);
    const geometry::PointIndex ib(sb.points);
    return one_sided_chamfer(sa.points, ib, variant) + one_sided_chamfer(sb.points, ia, variant);
}

double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed) {
    require_nonempty(a, b);
    if (n_samples == 0) throw InvalidInputError("normal consistency needs at least one sample");
    const SampleSet sa = sample(a, n_samples, seed);
    const SampleSet sb = sample(b, n_samples, seed);
    const geometry::Bvh ba(a);
    const geometry::Bvh bb(b);
    return 0.5 * (one_sided_normal(sa, a, b, bb) + one_sided_normal(sb, b, a, ba));
}

double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples, std::uint64_t seed) {
    require_nonempty(a, b);
    auto one_sided = [&](const TriangleMesh& from, const TriangleMesh& to) {
        const geometry::Bvh bvh(to);
        std::vector<Vec3> points = sample(from, n_samples, seed).points;
        points.insert(points.end(), from.vertices.begin(), from.vertices.end());
        double worst = 0.0;
        for (const auto& p : points) worst = std::max(worst, bvh.closest_point(to, p).distance);
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

FieldError near_surface_field_error(const meshing::DistanceFunction& predicted, const geometry::MeshIndex& gt,
                                    int resolution, double threshold_cells, const geometry::Aabb& bounds) {
    if (resolution < 1) throw InvalidInputError("resolution must be positive");
    meshing::FieldGrid lattice;
    lattice.resolution = meshing::cube_resolution(resolution);
    lattice.bounds = bounds;
    const double cutoff = threshold_cells * lattice.cell_size().maxCoeff();
    const auto n = lattice.nodes_per_axis();

    std::vector<Vec3> nodes;
    std::vector<field::Decomposition> truth;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const Vec3 p = lattice.node_position(i, j, k);
                const auto hit = gt.closest_point(p);
                if (hit.distance < cutoff) {
                    nodes.push_back(p);
                    truth.push_back(field::decompose(hit.point - p));
                }
            }
    if (nodes.empty()) {
        std::ostringstream msg;
        msg << "no lattice node lies within " << threshold_cells << " cells of the surface";
        throw InvalidInputError(msg.str());
    }
    const auto pred = predicted(nodes);
    FieldError err;
    err.n_nodes = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        err.dist_err += std::abs(pred[i].u - truth[i].u);
        err.grad_err += (pred[i].g - truth[i].g).cwiseAbs().sum();
    }
    err.dist_err /= static_cast<double>(nodes.size());
    err.grad_err /= static_cast<double>(nodes.size());
    return err;
}

FieldError near_surface_field_error(const neural::NeuralField& field, const Eigen::VectorXf* code,
                                    const geometry::MeshIndex& gt, int resolution, double threshold_cells,
                                    const geometry::Aabb& bounds) {
    return near_surface_field_error(meshing::network_distance(field, code), gt, resolution, threshold_cells, bounds);
}

namespace {

std::string cell(double value, double scale, const char* fmt) {
    if (std::isnan(value)) return {};
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value * scale);
    return buf;
}

}  // namespace

std::string EvalReport::csv_header() { return "method,shape,cd_x1e4,nc_pct,dist_err,grad_err,n_samples,seed"; }

std::string EvalReport::csv_row() const {
    return method + "," + shape + "," + cell(cd, 1e4, "%.6f") + "," + cell(nc, 100.0, "%.4f") + "," +
           cell(dist_err, 1.0, "%.6g") + "," + cell(grad_err, 1.0, "%.6g") + "," + std::to_string(n_samples) + "," +
           std::to_string(seed);
}

std::string EvalReport::table() const {
    auto show = [](double v, double scale, const char* fmt) {
        const auto s = cell(v, scale, fmt);
        return s.empty() ? std::string("-") : s;
    };
    return "method     " + method + "\nshape      " + shape + "\nCD (x1e4)  " + show(cd, 1e4, "%.6f") +
           "\nNC (%)     " + show(nc, 100.0, "%.4f") + "\ndist_err   " + show(dist_err, 1.0, "%.6g") +
           "\ngrad_err   " + show(grad_err, 1.0, "%.6g") + "\nsamples    " + std::to_string(n_samples) +
           "\nseed       " + std::to_string(seed) + "\n";
}

}  // namespace gdf::metrics
