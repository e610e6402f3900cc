#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gdf::geometry {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<std::uint32_t, 3>;

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void extend(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    bool valid() const { return (lo.array() <= hi.array()).all(); }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double diagonal() const { return extent().norm(); }
    bool contains(const Aabb& b) const {
        return (lo.array() <= b.lo.array()).all() && (b.hi.array() <= hi.array()).all();
    }
    /// Squared distance from p to the box (0 inside).
    double squared_distance(const Vec3& p) const {
        const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
        return d.squaredNorm();
    }
};

/// Indexed triangle soup. Face normals are optional; when present there is one
/// unit vector per triangle.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<Vec3> face_normals;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    const Vec3& corner(std::size_t t, int k) const { return vertices[triangles[t][k]]; }
    double triangle_area(std::size_t t) const;
    Vec3 triangle_normal(std::size_t t) const;
    double total_area() const;
    Aabb bounds() const;

    /// Recomputes face_normals from the winding. Zero-area faces get a zero normal.
    void compute_face_normals();
};

struct LoadReport {
    std::size_t degenerate_dropped = 0;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
};

struct LoadedMesh {
    TriangleMesh mesh;
    LoadReport report;
};

/// Reads OBJ (ASCII) or PLY (ASCII / binary little-endian), chosen by extension.
/// Polygons are fan-triangulated. Degenerate faces are dropped and counted.
LoadedMesh load_mesh(const std::filesystem::path& path);

/// Vertices only; faces, if any, are ignored. Accepts .obj, .ply and .xyz.
std::vector<Vec3> load_point_cloud(const std::filesystem::path& path);

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
/// Binary little-endian PLY with float32 vertices and int32 face indices.
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path);
/// Dispatches on extension (.obj or .ply).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Removes faces with out-of-range or repeated indices, or with area at most
/// 1e-12 relative to the squared longest bounding-box side. Returns the drop count.
std::size_t drop_degenerate_faces(TriangleMesh& mesh);

/// Maps original coordinates p to scale * (p + translation).
struct NormalizeTransform {
    double scale = 1.0;
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return scale * (p + translation); }
    Vec3 invert(const Vec3& n) const { return n / scale - translation; }
};

/// Centers the bounding box at the origin and scales its longest side to 1.
std::pair<TriangleMesh, NormalizeTransform> normalize_mesh(const TriangleMesh& mesh);

TriangleMesh apply_transform(const TriangleMesh& mesh, const NormalizeTransform& t);

}  // namespace gdf::geometry
