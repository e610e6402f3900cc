#include "gdf/geometry/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "gdf/common/error.hpp"

namespace gdf::geometry {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t PointIndex::build(std::uint32_t begin, std::uint32_t end) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return index;

    Aabb box;
    for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
    int axis = 0;
    box.extent().maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = points_[a][axis];
                         const double cb = points_[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const double split = points_[order_[mid]][axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[index].axis = axis;
    nodes_[index].split = split;
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

PointIndex::Hit PointIndex::nearest(const Vec3& q) const {
    if (points_.empty()) throw InvalidInputError("nearest-neighbour query on an empty point set");
    Hit best{0, std::numeric_limits<double>::infinity()};

    struct Entry {
        std::uint32_t node;
        double bound;  // lower bound on squared distance to anything below
    };
    Entry stack[128];
    int top = 0;
    stack[top++] = {0, 0.0};
    while (top > 0) {
        const Entry e = stack[--top];
        if (e.bound > best.squared_distance) continue;
        const Node& node = nodes_[e.node];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t id = order_[i];
                const double d2 = (points_[id] - q).squaredNorm();
                if (d2 < best.squared_distance || (d2 == best.squared_distance && id < best.index)) {
                    best = {id, d2};
                }
            }
            continue;
        }
        const double diff = q[node.axis] - node.split;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        stack[top++] = {far, std::max(e.bound, diff * diff)};
        stack[top++] = {near, e.bound};
    }
    return best;
}

}  // namespace gdf::geometry
