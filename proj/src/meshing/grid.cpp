#include "gdf/meshing/grid.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"
#include "gdf/common/parallel.hpp"

namespace gdf::meshing {

std::size_t FieldGrid::node_count() const {
    const auto n = nodes_per_axis();
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
}

Vec3 FieldGrid::cell_size() const {
    const Vec3 ext = bounds.extent();
    return {ext.x() / resolution[0], ext.y() / resolution[1], ext.z() / resolution[2]};
}

Vec3 FieldGrid::node_position(int i, int j, int k) const {
    const Vec3 ext = bounds.extent();
    // Lerp form so the last node lands exactly on bounds.hi.
    auto coord = [&](int axis, int idx) {
        const double t = static_cast<double>(idx) / resolution[axis];
        return idx == resolution[axis] ? bounds.hi[axis] : bounds.lo[axis] + t * ext[axis];
    };
    return {coord(0, i), coord(1, j), coord(2, k)};
}

Aabb default_bounds() { return {Vec3::Constant(-0.55), Vec3::Constant(0.55)}; }

FieldGrid evaluate_grid(const DistanceFunction& fn, std::array<int, 3> resolution, const Aabb& bounds, int chunk) {
    for (int r : resolution) {
        if (r < 1) throw InvalidInputError("grid resolution must be at least 1 cell per axis");
    }
    if (!bounds.valid() || (bounds.extent().array() <= 0.0).any()) throw InvalidInputError("grid bounds are empty");
    if (chunk < 1) throw InvalidInputError("grid chunk size must be positive");

    FieldGrid grid;
    grid.resolution = resolution;
    grid.bounds = bounds;
    grid.u.resize(grid.node_count());
    grid.g.resize(grid.node_count());
    const auto n = grid.nodes_per_axis();

    std::vector<std::array<int, 3>> chunks;
    for (int k0 = 0; k0 < n[2]; k0 += chunk)
        for (int j0 = 0; j0 < n[1]; j0 += chunk)
            for (int i0 = 0; i0 < n[0]; i0 += chunk) chunks.push_back({i0, j0, k0});

    parallel_for(chunks.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<Vec3> points;
        std::vector<std::size_t> slots;
        for (std::size_t c = begin; c < end; ++c) {
            const auto [i0, j0, k0] = chunks[c];
            points.clear();
            slots.clear();
            for (int k = k0; k < std::min(k0 + chunk, n[2]); ++k)
                for (int j = j0; j < std::min(j0 + chunk, n[1]); ++j)
                    for (int i = i0; i < std::min(i0 + chunk, n[0]); ++i) {
                        points.push_back(grid.node_position(i, j, k));
                        slots.push_back(grid.node_index(i, j, k));
                    }
            const auto values = fn(points);
            for (std::size_t p = 0; p < points.size(); ++p) {
                const auto& d = values[p];
                if (!std::isfinite(d.u) || !d.g.allFinite()) {
                    const std::size_t s = slots[p];
                    const auto i = static_cast<int>(s % n[0]);
                    const auto j = static_cast<int>((s / n[0]) % n[1]);
                    const auto k = static_cast<int>(s / (static_cast<std::size_t>(n[0]) * n[1]));
                    throw NumericalError("non-finite field value at grid node (" + std::to_string(i) + ", " +
                                         std::to_string(j) + ", " + std::to_string(k) + ")");
                }
                grid.u[slots[p]] = static_cast<float>(d.u);
                grid.g[slots[p]] = d.g.cast<float>();
            }
        }
    });
    return grid;
}

DistanceFunction sphere_distance(const Vec3& center, double radius) {
    return [center, radius](const std::vector<Vec3>& points) {
        std::vector<field::Decomposition> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Vec3 d = points[i] - center;
            const double r = d.norm();
            // Nearest sphere point is center + radius * d / r; at the center
            // every sphere point is nearest and +x is taken.
            const Vec3 dir = r > 0.0 ? Vec3(d / r) : Vec3::UnitX();
            out[i] = field::decompose(center + radius * dir - points[i]);
        }
        return out;
    };
}

DistanceFunction mesh_distance(const geometry::MeshIndex& index) {
    return [&index](const std::vector<Vec3>& points) {
        std::vector<field::Decomposition> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            out[i] = field::decompose(index.closest_point(points[i]).point - points[i]);
        }
        return out;
    };
}

DistanceFunction network_distance(const neural::NeuralField& field, const Eigen::VectorXf* code) {
    return [&field, code](const std::vector<Vec3>& points) { return neural::evaluate_distance(field, points, code); };
}

FieldGrid evaluate_grid(const neural::NeuralField& field, const Eigen::VectorXf* code,
                        std::array<int, 3> resolution, const Aabb& bounds, int chunk) {
    return evaluate_grid(network_distance(field, code), resolution, bounds, chunk);
}

void write_grid(const FieldGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    io::write_magic(out, "GDFG");
    io::write_le(out, kGridVersion);
    for (int r : grid.resolution) io::write_le(out, static_cast<std::uint32_t>(r));
    for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(grid.bounds.lo[a]));
    for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(grid.bounds.hi[a]));
    for (float u : grid.u) io::write_le(out, u);
    for (const auto& g : grid.g) {
        for (int a = 0; a < 3; ++a) io::write_le(out, g[a]);
    }
    if (!out) throw InvalidInputError("write failed: " + path.string());
}

FieldGrid read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    io::expect_magic(in, "GDFG");
    const auto version = io::read_le<std::uint32_t>(in, "version");
    if (version != kGridVersion) throw FormatError(path.string() + ": unsupported GDFG version");
    FieldGrid grid;
    for (int& r : grid.resolution) {
        r = static_cast<int>(io::read_le<std::uint32_t>(in, "resolution"));
        if (r < 1) throw FormatError(path.string() + ": bad grid resolution");
    }
    for (int a = 0; a < 3; ++a) grid.bounds.lo[a] = io::read_le<float>(in, "bounds");
    for (int a = 0; a < 3; ++a) grid.bounds.hi[a] = io::read_le<float>(in, "bounds");
    grid.u.resize(grid.node_count());
    grid.g.resize(grid.node_count());
    for (float& u : grid.u) u = io::read_le<float>(in, "u");
    for (auto& g : grid.g) {
        for (int a = 0; a < 3; ++a) g[a] = io::read_le<float>(in, "g");
    }
    return grid;
}

}  // namespace gdf::meshing
