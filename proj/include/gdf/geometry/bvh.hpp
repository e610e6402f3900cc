#pragma once

#include <cstdint>
#include <vector>

#include "gdf/geometry/mesh.hpp"

namespace gdf::geometry {

struct ClosestPointResult {
    Vec3 point = Vec3::Zero();
    double distance = 0.0;
    std::uint32_t triangle_id = 0;
};

/// Nearest point to q on the closed triangle (a, b, c), covering the face
/// interior, edge and vertex regions.
Vec3 closest_point_on_triangle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c);

/// Binary bounding-volume hierarchy over the triangles of a mesh. The tree
/// holds triangle indices only; queries take the mesh it was built from.
class Bvh {
public:
    struct Node {
        Aabb box;
        // Interior: child node indices.
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        // Leaf: triangles order_[first, first + count).
        std::uint32_t first = 0;
        std::uint32_t count = 0;
        bool is_leaf() const { return count > 0; }
    };

    Bvh() = default;
    explicit Bvh(const TriangleMesh& mesh, std::uint32_t leaf_size = 4);

    /// Globally nearest surface point; ties go to the lowest triangle index.
    ClosestPointResult closest_point(const TriangleMesh& mesh, const Vec3& q) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& leaf_order() const { return order_; }
    bool empty() const { return nodes_.empty(); }

private:
    std::uint32_t build(const TriangleMesh& mesh, const std::vector<Aabb>& boxes,
                        const std::vector<Vec3>& centroids, std::uint32_t first, std::uint32_t count,
                        std::uint32_t leaf_size);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

ClosestPointResult closest_point_mesh(const Bvh& bvh, const TriangleMesh& mesh, const Vec3& q);

/// Owns a mesh together with its hierarchy.
class MeshIndex {
public:
    explicit MeshIndex(TriangleMesh mesh) : mesh_(std::move(mesh)), bvh_(mesh_) {}

    ClosestPointResult closest_point(const Vec3& q) const { return bvh_.closest_point(mesh_, q); }
    const TriangleMesh& mesh() const { return mesh_; }
    const Bvh& bvh() const { return bvh_; }

private:
    TriangleMesh mesh_;
    Bvh bvh_;
};

}  // namespace gdf::geometry
