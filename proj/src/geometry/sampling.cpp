#include "gdf/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "gdf/common/error.hpp"

namespace gdf::geometry {

SurfaceSampler::SurfaceSampler(const TriangleMesh& mesh) : mesh_(&mesh) {
    if (mesh.empty()) throw InvalidInputError("cannot sample an empty mesh");
    cumulative_area_.resize(mesh.triangle_count());
    double acc = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        acc += mesh.triangle_area(t);
        cumulative_area_[t] = acc;
    }
    if (!(acc > 0.0)) throw InvalidInputError("mesh has zero surface area");
}

SurfaceSampler::Sample SurfaceSampler::sample(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double pick = unit(rng) * cumulative_area_.back();
    auto it = std::upper_bound(cumulative_area_.begin(), cumulative_area_.end(), pick);
    if (it == cumulative_area_.end()) --it;
    const auto t = static_cast<std::uint32_t>(it - cumulative_area_.begin());

    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const Vec3& a = mesh_->corner(t, 0);
    const Vec3& b = mesh_->corner(t, 1);
    const Vec3& c = mesh_->corner(t, 2);
    return {(1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c, t};
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n, Rng& rng,
                                 std::vector<std::uint32_t>* triangle_ids) {
    const SurfaceSampler sampler(mesh);
    std::vector<Vec3> points;
    points.reserve(n);
    if (triangle_ids) {
        triangle_ids->clear();
        triangle_ids->reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = sampler.sample(rng);
        points.push_back(s.point);
        if (triangle_ids) triangle_ids->push_back(s.triangle_id);
    }
    return points;
}

std::vector<Vec3> perturb_points(const std::vector<Vec3>& points, std::size_t count, std::array<double, 2> sigma,
                                 Rng& rng) {
    if (points.empty() && count > 0) throw InvalidInputError("cannot perturb an empty point set");
    std::vector<Vec3> out;
    out.reserve(count);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t first_half = (count + 1) / 2;
    for (std::size_t i = 0; i < count; ++i) {
        const double s = i < first_half ? sigma[0] : sigma[1];
        const Vec3& base = points[i % points.size()];
        Vec3 offset;
        for (int a = 0; a < 3; ++a) offset[a] = normal(rng);
        out.push_back(s > 0.0 ? Vec3(base + s * offset) : base);
    }
    return out;
}

std::vector<Vec3> sample_training_points(const TriangleMesh& mesh, const SamplingConfig& config, Rng& rng) {
    const double diagonal = mesh.bounds().diagonal();
    const std::array<double, 2> sigma{config.sigma_near[0] * diagonal, config.sigma_near[1] * diagonal};

    std::vector<Vec3> points = sample_surface(mesh, config.n_near_surface, rng);
    points = perturb_points(points, points.size(), sigma, rng);

    std::uniform_real_distribution<double> box(-config.uniform_half_extent, config.uniform_half_extent);
    points.reserve(config.total());
    for (std::size_t i = 0; i < config.n_uniform; ++i) {
        Vec3 p;
        for (int a = 0; a < 3; ++a) p[a] = box(rng);
        points.push_back(p);
    }
    return points;
}

}  // namespace gdf::geometry
