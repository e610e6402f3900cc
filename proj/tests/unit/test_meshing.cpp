#include <cmath>
#include <random>
#include <map>
#include <set>
#include <utility>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "gdf/common/error.hpp"
#include "gdf/geometry/sampling.hpp"
#include "gdf/meshing/extract.hpp"
#include "gdf/meshing/grid.hpp"
#include "gdf/metrics/metrics.hpp"
#include "gdf/neural/network.hpp"

using namespace gdf;
using namespace gdf::meshing;
using geometry::Aabb;
using geometry::TriangleMesh;
using geometry::Vec3;

namespace {

long euler_characteristic(const TriangleMesh& m) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& t : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto a = t[k], b = t[(k + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    return static_cast<long>(m.vertex_count()) - static_cast<long>(edges.size()) +
           static_cast<long>(m.triangle_count());
}

// Every undirected edge is shared by exactly two faces.
bool closed_manifold(const TriangleMesh& m) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
    for (const auto& t : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto a = t[k], b = t[(k + 1) % 3];
            ++uses[{std::min(a, b), std::max(a, b)}];
        }
    }
    for (const auto& [e, n] : uses) {
        if (n != 2) return false;
    }
    return !uses.empty();
}

std::size_t component_count(const TriangleMesh& m) {
    std::vector<std::uint32_t> parent(m.vertex_count());
    for (std::uint32_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& t : m.triangles) {
        parent[find(t[1])] = find(t[0]);
        parent[find(t[2])] = find(t[0]);
    }
    std::set<std::uint32_t> roots;
    for (const auto& t : m.triangles) roots.insert(find(t[0]));
    return roots.size();
}

std::array<bool, 8> signs(const std::array<float, 8>& u, const std::array<Eigen::Vector3f, 8>& g) {
    std::array<bool, 8> p{};
    REQUIRE(pseudo_signs(u, g, 0.0, p));
    return p;
}

}  // namespace

TEST_SUITE("meshing") {

TEST_CASE("analytic sphere field") {
    const auto f = sphere_distance(Vec3(0.1, 0, 0), 0.3);
    const auto d = f({Vec3(0.1, 0, 0), Vec3(0.6, 0, 0), Vec3(0.1, 0.2, 0)});
    CHECK(d[0].u == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d[1].u == doctest::Approx(0.2));
    CHECK(d[1].g.isApprox(Vec3(-1, 0, 0)));
    CHECK(d[2].g.isApprox(Vec3(0, 1, 0)));
}

TEST_CASE("planar patch field points along the normal") {
    const geometry::MeshIndex index(fixtures::planar_patch(4, 0.4));
    const auto f = mesh_distance(index);
    const auto d = f({Vec3(0.1, 0.1, 0.2), Vec3(-0.1, 0.2, -0.05)});
    CHECK(d[0].g.isApprox(Vec3(0, 0, -1)));
    CHECK(d[1].g.isApprox(Vec3(0, 0, 1)));
    CHECK(d[1].u == doctest::Approx(0.05));
}

TEST_CASE("grid evaluation does not depend on the chunk size") {
    const auto field = neural::make_field({.depth = 3, .width = 32}, field::Representation::Gdf, 5);
    const auto a = evaluate_grid(field, nullptr, cube_resolution(9), default_bounds(), 1);
    const auto b = evaluate_grid(field, nullptr, cube_resolution(9), default_bounds(), 32);
    REQUIRE(a.u.size() == 1000);
    CHECK(a.u == b.u);
    CHECK(a.g == b.g);
}

TEST_CASE("node layout") {
    FieldGrid grid;
    grid.resolution = {4, 2, 8};
    grid.bounds = {Vec3(-1, 0, 0), Vec3(1, 1, 2)};
    CHECK(grid.node_count() == 5 * 3 * 9);
    CHECK(grid.cell_size().isApprox(Vec3(0.5, 0.5, 0.25)));
    CHECK(grid.node_position(4, 2, 8) == Vec3(1, 1, 2));
    CHECK(grid.node_index(1, 0, 0) == 1);
    CHECK(grid.node_index(0, 1, 0) == 5);
    CHECK(grid.node_index(0, 0, 1) == 15);
}

TEST_CASE("sphere meshes to a closed genus-0 surface") {
    const Vec3 c(0.03, -0.02, 0.01);
    const double r = 0.33;
    const auto grid = evaluate_grid(sphere_distance(c, r), cube_resolution(64), default_bounds());
    const auto mesh = extract_mesh(grid);
    REQUIRE(!mesh.empty());
    CHECK(euler_characteristic(mesh) == 2);
    CHECK(closed_manifold(mesh));
    double worst = 0.0;
    for (const auto& v : mesh.vertices) worst = std::max(worst, std::abs((v - c).norm() - r));
    CHECK(worst < grid.cell_size().x());
}

TEST_CASE("open planar patch meshes to one sheet with full coverage") {
    const auto patch = fixtures::planar_patch(8, 0.4, 0.0);
    const geometry::MeshIndex index(patch);
    const auto grid = evaluate_grid(mesh_distance(index), cube_resolution(64), default_bounds());
    const auto mesh = extract_mesh(grid);
    REQUIRE(!mesh.empty());
    const double diag = grid.cell_size().norm();
    for (const auto& v : mesh.vertices) {
        CHECK(std::abs(v.z()) < diag);
        CHECK(index.closest_point(v).distance < diag);
    }
    // The plane lies on a node layer, so crossings sit on nodes and must weld.
    CHECK(component_count(mesh) == 1);
    // A second sheet would double the area.
    CHECK(mesh.total_area() == doctest::Approx(patch.total_area()).epsilon(0.1));
    geometry::Rng rng(3);
    const auto samples = geometry::sample_surface(patch, 20000, rng);
    CHECK(hole_metric(mesh, samples, grid.cell_size().x()) >= 0.99);
}

TEST_CASE("crossings on a plane between node layers are exact") {
    const double h = 0.0123;
    const geometry::MeshIndex index(fixtures::planar_patch(8, 0.4, h));
    const auto grid = evaluate_grid(mesh_distance(index), cube_resolution(32), default_bounds());
    const auto mesh = extract_mesh(grid);
    REQUIRE(!mesh.empty());
    CHECK(component_count(mesh) == 1);
    for (const auto& v : mesh.vertices) {
        if (std::abs(v.x()) < 0.35 && std::abs(v.y()) < 0.35) CHECK(v.z() == doctest::Approx(h).epsilon(1e-5));
    }
}

TEST_CASE("vertices stay inside the grid bounds") {
    const Aabb box{Vec3(-0.3, -0.3, -0.3), Vec3(0.3, 0.3, 0.3)};
    const auto grid = evaluate_grid(sphere_distance(Vec3(0.2, 0, 0), 0.25), cube_resolution(24), box);
    const auto mesh = extract_mesh(grid);
    REQUIRE(!mesh.empty());
    for (const auto& v : mesh.vertices) {
        CHECK((v.array() >= box.lo.array() - 1e-12).all());
        CHECK((v.array() <= box.hi.array() + 1e-12).all());
    }
}

TEST_CASE("a field that is far everywhere gives an empty mesh") {
    const Aabb box{Vec3(-0.1, -0.1, -0.1), Vec3(0.1, 0.1, 0.1)};
    const auto grid = evaluate_grid(sphere_distance(Vec3::Zero(), 5.0), cube_resolution(16), box);
    CHECK(extract_mesh(grid).empty());
}

TEST_CASE("extraction validates its configuration") {
    const auto grid = evaluate_grid(sphere_distance(Vec3::Zero(), 0.3), cube_resolution(4), default_bounds());
    CHECK_THROWS_AS(extract_mesh(grid, {.far_cutoff = 0.0}), InvalidInputError);
    CHECK_THROWS_AS(extract_mesh(grid, {.crossing_slack = -1.0}), InvalidInputError);
    auto broken = grid;
    broken.u.pop_back();
    CHECK_THROWS_AS(extract_mesh(broken), InvalidInputError);
}

TEST_CASE("pseudo-signs: anchor choice and global flips") {
    // Corners 0-3 form the bottom face of the cell, 4-7 the top; the plane
    // runs between them.
    std::array<float, 8> u{0.2f, 0.3f, 0.25f, 0.2f, 0.1f, 0.15f, 0.2f, 0.1f};
    std::array<Eigen::Vector3f, 8> g;
    for (int c = 0; c < 8; ++c) g[c] = c < 4 ? Eigen::Vector3f(0, 0, 1) : Eigen::Vector3f(0, 0, -1);
    const auto base = signs(u, g);
    for (int c = 0; c < 8; ++c) CHECK(base[c] == (c < 4));

    // Moving the anchor to the other side keeps the pattern.
    u[1] = 0.01f;
    CHECK(signs(u, g) == base);

    // Negating every gradient complements it.
    auto neg = g;
    for (auto& v : neg) v = -v;
    const auto flipped = signs(u, neg);
    for (int c = 0; c < 8; ++c) CHECK(flipped[c] == !base[c]);

    // Null corners are always false; an all-null cell has no pattern.
    g[4] = Eigen::Vector3f::Zero();
    u[4] = 0.0f;
    CHECK(signs(u, g)[4] == false);
    std::array<Eigen::Vector3f, 8> null;
    for (auto& v : null) v.setZero();
    std::array<bool, 8> p{};
    CHECK_FALSE(pseudo_signs(u, null, 0.0, p));
}

TEST_CASE("meshing a sphere is unchanged by a global gradient flip") {
    auto grid = evaluate_grid(sphere_distance(Vec3(0.01, 0.02, -0.01), 0.3), cube_resolution(32), default_bounds());
    const auto a = extract_mesh(grid);
    for (auto& g : grid.g) g = -g;
    const auto b = extract_mesh(grid);
    REQUIRE(a.vertex_count() == b.vertex_count());
    CHECK(a.triangle_count() == b.triangle_count());
    CHECK(metrics::hausdorff_distance(a, b, 2000, 1) < 1e-9);
}

TEST_CASE("hole metric") {
    const auto patch = fixtures::planar_patch(64, 0.4);
    geometry::Rng rng(7);
    const auto samples = geometry::sample_surface(patch, 50000, rng);
    CHECK(hole_metric(patch, samples, 1e-6) == 1.0);
    CHECK(hole_metric(TriangleMesh{}, samples, 1.0) == 0.0);

    // Cut a disk of triangles out of the middle.
    TriangleMesh holed;
    holed.vertices = patch.vertices;
    double removed = 0.0;
    for (std::size_t t = 0; t < patch.triangle_count(); ++t) {
        const Vec3 c = (patch.corner(t, 0) + patch.corner(t, 1) + patch.corner(t, 2)) / 3.0;
        if (c.head<2>().norm() < 0.15) {
            removed += patch.triangle_area(t);
        } else {
            holed.triangles.push_back(patch.triangles[t]);
        }
    }
    const double expected = 1.0 - removed / patch.total_area();
    CHECK(std::abs(hole_metric(holed, samples, 1e-4) - expected) < 0.02);
}

TEST_CASE("grid dump round trip") {
    const auto dir = fixtures::scratch_dir("gdfg");
    FieldGrid grid = evaluate_grid(sphere_distance(Vec3::Zero(), 0.3), {3, 4, 5}, default_bounds());
    write_grid(grid, dir / "g.gdfg");
    const auto back = read_grid(dir / "g.gdfg");
    CHECK(back.resolution == grid.resolution);
    CHECK(back.u == grid.u);
    CHECK(back.g == grid.g);
    CHECK(back.bounds.lo == grid.bounds.lo.cast<float>().cast<double>());
    CHECK(back.bounds.hi == grid.bounds.hi.cast<float>().cast<double>());
    CHECK(std::filesystem::file_size(dir / "g.gdfg") == 4 + 4 + 12 + 24 + grid.node_count() * 16);
    fixtures::write_text(dir / "bad.gdfg", "GDFX");
    CHECK_THROWS_AS(read_grid(dir / "bad.gdfg"), FormatError);
}

TEST_CASE("non-finite field values name the grid node") {
    FieldGrid probe;
    probe.resolution = {4, 4, 4};
    probe.bounds = default_bounds();
    const Vec3 bad = probe.node_position(1, 2, 3);
    const DistanceFunction f = [&](const std::vector<Vec3>& pts) {
        std::vector<field::Decomposition> out(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out[i] = field::decompose(Vec3(0.1, 0, 0));
            if (pts[i] == bad) out[i].u = std::nan("");
        }
        return out;
    };
    try {
        evaluate_grid(f, probe.resolution, probe.bounds);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("(1, 2, 3)") != std::string::npos);
    }
}

}
