#pragma once

// Test meshes and independent reference computations shared by the unit tests
// and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gdf/geometry/mesh.hpp"

namespace fixtures {

using gdf::geometry::Triangle;
using gdf::geometry::TriangleMesh;
using gdf::geometry::Vec3;

/// Builds a mesh from an (nu+1) x (nv+1) lattice of points p(s, t), s and t in [0, 1].
inline TriangleMesh lattice_mesh(int nu, int nv, const std::function<Vec3(double, double)>& p) {
    TriangleMesh m;
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i <= nu; ++i) m.vertices.push_back(p(static_cast<double>(i) / nu, static_cast<double>(j) / nv));
    auto id = [nu](int i, int j) { return static_cast<std::uint32_t>(j * (nu + 1) + i); };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.compute_face_normals();
    return m;
}

/// Square patch [-half, half]^2 in the plane z = height.
inline TriangleMesh planar_patch(int n = 8, double half = 0.4, double height = 0.0) {
    return lattice_mesh(n, n, [=](double s, double t) { return Vec3(-half + 2 * half * s, -half + 2 * half * t, height); });
}

/// Upper half of a sphere (open along its equator).
inline TriangleMesh hemisphere_patch(double radius = 0.4, int n = 24, const Vec3& center = Vec3(0, 0, -0.2)) {
    TriangleMesh m = lattice_mesh(n, n / 2, [&](double s, double t) {
        const double phi = 2.0 * std::numbers::pi * s;
        const double theta = 0.5 * std::numbers::pi * t;  // 0 at the equator
        return Vec3(center.x() + radius * std::cos(theta) * std::cos(phi),
                    center.y() + radius * std::cos(theta) * std::sin(phi), center.z() + radius * std::sin(theta));
    });
    // Weld the seam and collapse the pole row so the surface is a single open cap.
    const int nu = n;
    const int nv = n / 2;
    std::vector<std::uint32_t> remap(m.vertices.size());
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i <= nu; ++i) {
            int ii = i == nu ? 0 : i;
            if (j == nv) ii = 0;
            remap[static_cast<std::size_t>(j * (nu + 1) + i)] = static_cast<std::uint32_t>(j * (nu + 1) + ii);
        }
    for (auto& t : m.triangles)
        for (auto& k : t) k = remap[k];
    gdf::geometry::drop_degenerate_faces(m);
    m.compute_face_normals();
    return m;
}

/// Partial cylinder around the z axis spanning `angle` radians.
inline TriangleMesh cylinder_patch(double radius = 0.35, double height = 0.8, double angle = 1.5 * std::numbers::pi,
                                   int n = 24) {
    return lattice_mesh(n, n / 2, [=](double s, double t) {
        const double phi = -0.5 * angle + angle * s;
        return Vec3(radius * std::cos(phi), radius * std::sin(phi), -0.5 * height + height * t);
    });
}

/// Open curved sheet z = a * sin(2x) * cos(y) over [-0.45, 0.45]^2.
inline TriangleMesh wavy_patch(int n = 24, double amplitude = 0.15) {
    return lattice_mesh(n, n, [=](double s, double t) {
        const double x = -0.45 + 0.9 * s;
        const double y = -0.45 + 0.9 * t;
        return Vec3(x, y, amplitude * std::sin(2.0 * x * std::numbers::pi) * std::cos(y * std::numbers::pi));
    });
}

/// Triangles with independent random corners in [-0.5, 0.5]^3.
inline TriangleMesh random_soup(std::size_t n_triangles, std::uint64_t seed, double size = 0.2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-0.5, 0.5);
    std::uniform_real_distribution<double> off(-size, size);
    TriangleMesh m;
    while (m.triangles.size() < n_triangles) {
        const Vec3 c(pos(rng), pos(rng), pos(rng));
        Vec3 p[3];
        for (auto& q : p) {
            const double x = off(rng);
            const double y = off(rng);
            const double z = off(rng);
            q = c + Vec3(x, y, z);
        }
        if ((p[1] - p[0]).cross(p[2] - p[0]).norm() < 1e-4) continue;
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        for (const auto& q : p) m.vertices.push_back(q);
        m.triangles.push_back({base, base + 1, base + 2});
    }
    m.compute_face_normals();
    return m;
}

/// Nearest point on a triangle by projection onto its plane followed, when the
/// projection falls outside, by clamped projection onto each edge.
inline Vec3 reference_closest_on_triangle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    const Vec3 p = q - n * ((q - a).dot(n) / n.squaredNorm());
    // Inside test via signed sub-triangle areas.
    const double s0 = (b - a).cross(p - a).dot(n);
    const double s1 = (c - b).cross(p - b).dot(n);
    const double s2 = (a - c).cross(p - c).dot(n);
    if (s0 >= 0 && s1 >= 0 && s2 >= 0) return p;
    auto on_segment = [&](const Vec3& x, const Vec3& y) {
        const double t = std::clamp((q - x).dot(y - x) / (y - x).squaredNorm(), 0.0, 1.0);
        return Vec3(x + t * (y - x));
    };
    Vec3 best = on_segment(a, b);
    for (const Vec3& cand : {on_segment(b, c), on_segment(c, a)})
        if ((cand - q).squaredNorm() < (best - q).squaredNorm()) best = cand;
    return best;
}

struct ReferenceHit {
    Vec3 point;
    double distance = std::numeric_limits<double>::infinity();
    std::size_t triangle = 0;
};

/// Exhaustive nearest point over all triangles.
inline ReferenceHit reference_closest(const TriangleMesh& m, const Vec3& q) {
    ReferenceHit best;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const Vec3 p = reference_closest_on_triangle(q, m.corner(t, 0), m.corner(t, 1), m.corner(t, 2));
        const double d = (p - q).norm();
        if (d < best.distance) best = {p, d, t};
    }
    return best;
}

/// Central difference of a scalar function along each coordinate.
template <class F>
std::vector<double> central_differences(F&& f, std::vector<double> x, double h) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("gdf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace fixtures
