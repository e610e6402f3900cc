// Desk-scale training runs (tens of seconds each).

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "gdf/field/gdf.hpp"
#include "gdf/geometry/bvh.hpp"
#include "gdf/geometry/sampling.hpp"
#include "gdf/neural/network.hpp"
#include "gdf/neural/training.hpp"

using namespace gdf;
using field::Representation;
using geometry::Vec3;

namespace {

struct PlaneFit {
    geometry::TriangleMesh mesh;
    geometry::MeshIndex index;
    field::TrainingSet train;
    std::vector<Vec3> held_out;
    std::vector<double> held_out_u;
    // Wider near-surface draw for the direction check, which skips the band
    // closest to the surface.
    std::vector<Vec3> probe;
    double sigma_wide = 0.0;

    PlaneFit() : mesh(geometry::normalize_mesh(fixtures::planar_patch()).first), index(mesh) {
        geometry::SamplingConfig sc;
        sc.n_near_surface = 20000;
        sc.n_uniform = 1000;
        sc.seed = 21;
        train = field::build_training_set(mesh, sc);
        sc.n_near_surface = 4000;
        sc.n_uniform = 0;
        geometry::Rng rng(77);
        held_out = geometry::sample_training_points(mesh, sc, rng);
        for (const auto& p : held_out) held_out_u.push_back(index.closest_point(p).distance);
        sigma_wide = sc.sigma_near[0] * mesh.bounds().diagonal();
        sc.sigma_near = {0.01, 0.01};
        geometry::Rng probe_rng(78);
        probe = geometry::sample_training_points(mesh, sc, probe_rng);
    }

    double held_out_error(const neural::NeuralField& f, const Eigen::VectorXf* code = nullptr) const {
        const auto d = neural::evaluate_distance(f, held_out, code);
        double e = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) e += std::abs(d[i].u - held_out_u[i]);
        return e / static_cast<double>(d.size());
    }
};

const PlaneFit& plane_fit() {
    static const PlaneFit p;
    return p;
}

neural::TrainConfig desk_config() {
    neural::TrainConfig tc;
    tc.iterations = 3000;
    tc.batch_size = 2048;
    tc.adam.learning_rate = 1e-3;
    tc.seed = 2;
    tc.history_every = 100;
    return tc;
}

const neural::TrainResult& plane_gdf() {
    static const auto r =
        neural::train_single(plane_fit().train, {.depth = 4, .width = 128}, Representation::Gdf, desk_config());
    return r;
}

}  // namespace

TEST_SUITE("desk") {

TEST_CASE("4x128 GDF on a planar patch: held-out distance error below 5e-3") {
    const double err = plane_fit().held_out_error(plane_gdf().field);
    MESSAGE("held-out mean |u error| " << err);
    CHECK(err < 5e-3);
    const auto& h = plane_gdf().history;
    REQUIRE(h.size() >= 2);
    CHECK(h.back().loss < h.front().loss);
}

TEST_CASE("directions from the vector output agree with the distance gradient") {
    // g = decompose(f(x)).g against -grad |f| by central differences. On a
    // flat patch the only kink of |v| is the surface itself, so points within
    // 2 sigma (wide scale) of it are skipped.
    const auto& p = plane_fit();
    const auto& f = plane_gdf().field;
    const double h = 1e-4;
    double sum = 0.0;
    int n = 0;
    for (const Vec3& x : p.probe) {
        if (p.index.closest_point(x).distance < 2 * p.sigma_wide) continue;
        const Eigen::Vector3d out = neural::forward(f, x).cast<double>();
        const Vec3 g = field::decompose(out).g;
        Vec3 grad;
        for (int a = 0; a < 3; ++a) {
            Vec3 up = x, down = x;
            up[a] += h;
            down[a] -= h;
            grad[a] = (neural::forward(f, up).cast<double>().norm() - neural::forward(f, down).cast<double>().norm()) /
                      (2 * h);
        }
        if (grad.norm() == 0.0 || g.norm() == 0.0) continue;
        const double c = std::clamp(g.dot(-grad.normalized()), -1.0, 1.0);
        sum += std::acos(c) * 180.0 / std::numbers::pi;
        ++n;
    }
    REQUIRE(n > 1000);
    MESSAGE("mean angle " << sum / n << " degrees over " << n << " points");
    CHECK(sum / n < 15.0);
}

TEST_CASE("a one-shape auto-decoder matches single-shape training") {
    const auto& p = plane_fit();
    const auto ad = neural::train_autodecoder({p.train}, {.depth = 4, .width = 128, .spatial_dim = 3, .latent_len = 8},
                                              Representation::Gdf, desk_config());
    const Eigen::VectorXf code = ad.latents.code(0);
    const double single = p.held_out_error(plane_gdf().field);
    const double shared = p.held_out_error(ad.field, &code);
    MESSAGE("single " << single << " auto-decoder " << shared);
    CHECK(shared <= 1.1 * single);
}

}
