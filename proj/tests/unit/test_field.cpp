#include <cmath>
#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"
#include "gdf/field/gdf.hpp"
#include "gdf/geometry/bvh.hpp"

using namespace gdf;
using namespace gdf::field;
using geometry::Vec3;

TEST_SUITE("field") {

TEST_CASE("decompose a Pythagorean vector") {
    const auto d = decompose(Vec3(3, 0, 4));
    CHECK(d.u == 5.0);
    CHECK(d.g.isApprox(Vec3(0.6, 0, 0.8)));
}

TEST_CASE("null vector has a null gradient") {
    const auto d = decompose(Vec3::Zero());
    CHECK(d.u == 0.0);
    CHECK(d.g == Vec3::Zero());
    const auto tiny = decompose(Vec3(1e-13, 0, 0));
    CHECK(tiny.g == Vec3::Zero());
}

TEST_CASE("recompose inverts decompose") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> scale(-8.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = n(rng), y = n(rng), z = n(rng);
        const Vec3 v = Vec3(x, y, z) * std::pow(10.0, scale(rng));
        const auto d = decompose(v);
        CHECK((recompose(d) - v).norm() <= 1e-12 * std::max(1.0, v.norm()));
        CHECK(std::abs(d.g.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("targets per representation") {
    const GdfSample s{Vec3(0, 0, 0), Vec3(1, 2, 2)};
    CHECK(target_for(Representation::Gdf, s) == Vec3(1, 2, 2));
    CHECK(target_for(Representation::Udf, s).x() == 3.0);
    CHECK(target_for(Representation::Csp, s) == Vec3(1, 2, 2));
    const GdfSample shifted{Vec3(1, 1, 1), Vec3(1, 2, 2)};
    CHECK(target_for(Representation::Csp, shifted) == Vec3(2, 3, 3));
    CHECK(vector_from_output(Representation::Csp, shifted.x, Vec3(2, 3, 3)) == shifted.v);
    CHECK(output_dim(Representation::Gdf) == 3);
    CHECK(output_dim(Representation::Udf) == 1);
    CHECK(output_dim(Representation::Csp) == 3);
    CHECK(output_dim(Representation::Gdf, 2) == 2);
    CHECK(representation_from_string("csp") == Representation::Csp);
    CHECK_THROWS_AS(representation_from_string("sdf"), InvalidInputError);
}

TEST_CASE("ground truth on a planar patch") {
    const auto m = fixtures::planar_patch(4, 0.4);
    const geometry::Bvh bvh(m);
    const auto s = gdf_ground_truth(bvh, m, Vec3(0.1, -0.05, 0.2));
    CHECK((s.v - Vec3(0, 0, -0.2)).norm() < 1e-12);
    CHECK(gdf_ground_truth(bvh, m, Vec3(0.1, 0.1, 0.0)).v.norm() == 0.0);
}

TEST_CASE("ground truth equals the exhaustive oracle") {
    const auto m = fixtures::random_soup(200, 21);
    const geometry::Bvh bvh(m);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-0.7, 0.7);
    for (int i = 0; i < 500; ++i) {
        const Vec3 x(d(rng), d(rng), d(rng));
        const auto s = gdf_ground_truth(bvh, m, x);
        const auto ref = fixtures::reference_closest(m, x);
        CHECK((s.v - (ref.point - x)).norm() < 1e-9);
    }
}

TEST_CASE("training set on a plane: x + v on the plane") {
    const auto m = fixtures::planar_patch(6, 0.5, 0.0);
    geometry::SamplingConfig cfg;
    cfg.n_near_surface = 900;
    cfg.n_uniform = 100;
    cfg.seed = 4;
    const auto set = build_training_set(m, cfg);
    REQUIRE(set.size() == 1000);
    const geometry::MeshIndex index(m);
    for (const auto& s : set.samples) {
        CHECK(std::abs((s.x + s.v).z()) < 1e-9);
        CHECK(std::abs(s.v.norm() - index.closest_point(s.x).distance) < 1e-12);
    }
}

TEST_CASE("different seeds give different points with the same invariants") {
    const auto m = fixtures::hemisphere_patch();
    const geometry::MeshIndex index(m);
    geometry::SamplingConfig cfg;
    cfg.n_near_surface = 300;
    cfg.n_uniform = 20;
    cfg.seed = 1;
    const auto a = build_training_set(m, cfg);
    cfg.seed = 2;
    const auto b = build_training_set(m, cfg);
    CHECK(a.samples[0].x != b.samples[0].x);
    for (const auto* set : {&a, &b})
        for (const auto& s : set->samples) CHECK(index.closest_point(s.x + s.v).distance < 1e-9);
}

TEST_CASE("sample cache round trip is bitwise") {
    const auto dir = fixtures::scratch_dir("gdfs");
    const auto m = fixtures::cylinder_patch();
    geometry::SamplingConfig cfg;
    cfg.n_near_surface = 500;
    cfg.n_uniform = 25;
    const auto set = build_training_set(m, cfg);
    write_sample_cache(set, dir / "s.gdfs");
    const auto back = read_sample_cache(dir / "s.gdfs");
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(back.samples[i].x == set.samples[i].x.cast<float>().cast<double>());
        CHECK(back.samples[i].v == set.samples[i].v.cast<float>().cast<double>());
    }
    write_sample_cache(back, dir / "t.gdfs");
    CHECK(io::fnv1a_file(dir / "s.gdfs") == io::fnv1a_file(dir / "t.gdfs"));
    CHECK(std::filesystem::file_size(dir / "s.gdfs") == 4 + 4 + 8 + 525 * 24);
}

TEST_CASE("truncated or foreign caches are format errors") {
    const auto dir = fixtures::scratch_dir("gdfs_bad");
    fixtures::write_text(dir / "x.gdfs", "GDFN\x01\0\0\0");
    CHECK_THROWS_AS(read_sample_cache(dir / "x.gdfs"), FormatError);
    fixtures::write_text(dir / "y.gdfs", std::string("GDFS\x01\0\0\0\x05\0\0\0\0\0\0\0", 16));
    CHECK_THROWS_AS(read_sample_cache(dir / "y.gdfs"), FormatError);
}

TEST_CASE("sign flip along a probe through a planar patch") {
    const auto m = fixtures::planar_patch(4, 0.4);
    const geometry::Bvh bvh(m);
    // Oblique probe crossing the plane at (0.05, 0.1, 0).
    const Vec3 cross(0.05, 0.1, 0.0);
    const Vec3 dir = Vec3(0.3, -0.2, 1.0).normalized();
    int flips = 0;
    double prev = 0.0;
    double min_u = 1.0;
    for (int i = -50; i <= 50; ++i) {
        const Vec3 x = cross + dir * (0.002 * i + 0.0005);
        const auto s = gdf_ground_truth(bvh, m, x);
        min_u = std::min(min_u, s.v.norm());
        if (i > -50 && prev * s.v.z() < 0) ++flips;
        prev = s.v.z();
        // The only nonzero coordinate is z.
        CHECK(std::abs(s.v.x()) < 1e-12);
        CHECK(std::abs(s.v.y()) < 1e-12);
    }
    CHECK(flips == 1);
    CHECK(min_u < 1e-3);
    CHECK(gdf_ground_truth(bvh, m, cross).v.norm() < 1e-15);
}

TEST_CASE("g is the negative distance gradient on the plane oracle") {
    const auto m = fixtures::planar_patch(4, 0.4);
    const geometry::MeshIndex index(m);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 x(d(rng), d(rng), 0.2 * d(rng) + 0.07);
        const auto g = decompose(gdf_ground_truth(index.bvh(), index.mesh(), x).v).g;
        const auto fd = fixtures::central_differences(
            [&](const std::vector<double>& p) { return index.closest_point(Vec3(p[0], p[1], p[2])).distance; },
            {x.x(), x.y(), x.z()}, 1e-6);
        CHECK((g + Vec3(fd[0], fd[1], fd[2])).norm() < 1e-9);
    }
}

TEST_CASE("|v| is 1-Lipschitz near the surface") {
    const auto m = fixtures::hemisphere_patch();
    const geometry::MeshIndex index(m);
    geometry::SamplingConfig cfg;
    cfg.n_near_surface = 2000;
    cfg.n_uniform = 0;
    const auto set = build_training_set(m, cfg);
    for (std::size_t i = 0; i + 1 < set.size(); i += 2) {
        const auto& a = set.samples[i];
        const auto& b = set.samples[i + 1];
        CHECK(std::abs(a.v.norm() - b.v.norm()) <= (a.x - b.x).norm() + 1e-12);
    }
}

}
