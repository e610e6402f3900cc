#pragma once

#include <cstdint>
#include <vector>

#include "gdf/geometry/mesh.hpp"

namespace gdf::geometry {

/// Exact nearest-neighbour queries over a fixed 3D point set.
class PointIndex {
public:
    PointIndex() = default;
    explicit PointIndex(std::vector<Vec3> points);

    struct Hit {
        std::uint32_t index = 0;
        double squared_distance = 0.0;
    };
    /// Nearest stored point; ties go to the lowest index.
    Hit nearest(const Vec3& q) const;

    const std::vector<Vec3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        std::uint32_t begin, end;  // range into order_
        std::uint32_t left = 0, right = 0;
        int axis = -1;  // -1 for leaves
        double split = 0.0;
    };
    std::uint32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace gdf::geometry
