#include "gdf/geometry/bvh.hpp"

#include <algorithm>
#include <numeric>

#include "gdf/common/error.hpp"

namespace gdf::geometry {

// Region-based closest point (Ericson, Real-Time Collision Detection, 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = q - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = q - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Vec3 cp = q - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

Bvh::Bvh(const TriangleMesh& mesh, std::uint32_t leaf_size) {
    const auto n = static_cast<std::uint32_t>(mesh.triangle_count());
    if (n == 0) return;
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t t = 0; t < n; ++t) {
        for (int k = 0; k < 3; ++k) boxes[t].extend(mesh.corner(t, k));
        centroids[t] = (mesh.corner(t, 0) + mesh.corner(t, 1) + mesh.corner(t, 2)) / 3.0;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * (n / std::max(1u, leaf_size)) + 1);
    build(mesh, boxes, centroids, 0, n, std::max(1u, leaf_size));
}

std::uint32_t Bvh::build(const TriangleMesh& mesh, const std::vector<Aabb>& boxes,
                         const std::vector<Vec3>& centroids, std::uint32_t first, std::uint32_t count,
                         std::uint32_t leaf_size) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t i = first; i < first + count; ++i) {
        box.extend(boxes[order_[i]]);
        centroid_box.extend(centroids[order_[i]]);
    }
    nodes_[index].box = box;

    if (count <= leaf_size) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }

    int axis = 0;
    centroid_box.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    // Ties on the centroid coordinate are broken by triangle index so the
    // tree shape is independent of the sort implementation.
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centroids[a][axis];
                         const double cb = centroids[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const std::uint32_t left = build(mesh, boxes, centroids, first, mid - first, leaf_size);
    const std::uint32_t right = build(mesh, boxes, centroids, mid, first + count - mid, leaf_size);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

ClosestPointResult Bvh::closest_point(const TriangleMesh& mesh, const Vec3& q) const {
    if (nodes_.empty()) throw InvalidInputError("closest-point query on an empty mesh");

    double best_d2 = std::numeric_limits<double>::infinity();
    ClosestPointResult best;
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        // Non-strict so that equal-distance triangles can still win on index.
        if (node.box.squared_distance(q) > best_d2) continue;
        if (node.is_leaf()) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t t = order_[i];
                const Vec3 p = closest_point_on_triangle(q, mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
                const double d2 = (q - p).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && t < best.triangle_id)) {
                    best_d2 = d2;
                    best.point = p;
                    best.triangle_id = t;
                }
            }
            continue;
        }
        const double dl = nodes_[node.left].box.squared_distance(q);
        const double dr = nodes_[node.right].box.squared_distance(q);
        // Push the farther child first so the nearer one is popped next.
        if (dl <= dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    best.distance = (q - best.point).norm();
    return best;
}

ClosestPointResult closest_point_mesh(const Bvh& bvh, const TriangleMesh& mesh, const Vec3& q) {
    return bvh.closest_point(mesh, q);
}

}  // namespace gdf::geometry
