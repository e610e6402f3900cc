#include "gdf/meshing/extract.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>

#include "gdf/common/error.hpp"
#include "gdf/common/parallel.hpp"
#include "gdf/geometry/bvh.hpp"
#include "mc_tables.hpp"

namespace gdf::meshing {

bool pseudo_signs(const std::array<float, 8>& u, const std::array<Eigen::Vector3f, 8>& g, double threshold,
                  std::array<bool, 8>& positive) {
    int anchor = 0;
    for (int c = 1; c < 8; ++c) {
        if (u[c] < u[anchor]) anchor = c;
    }
    int reference = -1;
    if (g[anchor].squaredNorm() > 0.0f) {
        reference = anchor;
    } else {
        for (int c = 0; c < 8; ++c) {
            if (g[c].squaredNorm() > 0.0f && (reference < 0 || u[c] < u[reference])) reference = c;
        }
    }
    if (reference < 0) return false;
    const Eigen::Vector3f& ref = g[reference];
    // Orient the reference into a fixed half-space so that on-surface nodes
    // (null gradient, always negative) land on the same side in every cell.
    bool flip = false;
    for (int a = 0; a < 3; ++a) {
        if (ref[a] != 0.0f) {
            flip = ref[a] < 0.0f;
            break;
        }
    }
    for (int c = 0; c < 8; ++c) {
        if (g[c].squaredNorm() == 0.0f) {
            positive[c] = false;
            continue;
        }
        const bool same = c == reference || static_cast<double>(g[c].dot(ref)) > threshold;
        positive[c] = same != flip;
    }
    return true;
}

namespace {

struct CellTriangle {
    std::array<std::uint64_t, 3> edges;
};

// Global edge key: 3 * (index of the edge's lower node) + axis.
std::uint64_t edge_key(const FieldGrid& grid, int i, int j, int k, int edge) {
    const auto [ca, cb] = tables::kEdgeCorners[edge];
    const auto& oa = tables::kCornerOffset[ca];
    const auto& ob = tables::kCornerOffset[cb];
    int lo[3];
    int axis = 0;
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(oa[a], ob[a]);
        if (oa[a] != ob[a]) axis = a;
    }
    return 3 * static_cast<std::uint64_t>(grid.node_index(i + lo[0], j + lo[1], k + lo[2])) + axis;
}

struct EdgeEnds {
    std::array<int, 3> a;
    std::array<int, 3> b;
};

EdgeEnds edge_ends(const FieldGrid& grid, std::uint64_t key) {
    const auto axis = static_cast<int>(key % 3);
    const std::size_t node = key / 3;
    const auto n = grid.nodes_per_axis();
    EdgeEnds e;
    e.a = {static_cast<int>(node % n[0]), static_cast<int>((node / n[0]) % n[1]),
           static_cast<int>(node / (static_cast<std::size_t>(n[0]) * n[1]))};
    e.b = e.a;
    e.b[axis] += 1;
    return e;
}

// Crossings that land exactly on a node (u = 0 there) are shared by every
// edge touching that node, so they are keyed by the node instead.
constexpr std::uint64_t kNodeKeyBit = std::uint64_t{1} << 63;

std::uint64_t vertex_key(const FieldGrid& grid, std::uint64_t key) {
    const auto [a, b] = edge_ends(grid, key);
    const std::size_t ia = grid.node_index(a[0], a[1], a[2]);
    const std::size_t ib = grid.node_index(b[0], b[1], b[2]);
    if (grid.u[ia] == 0.0f) return kNodeKeyBit | ia;
    if (grid.u[ib] == 0.0f) return kNodeKeyBit | ib;
    return key;
}

Vec3 edge_vertex(const FieldGrid& grid, std::uint64_t key) {
    const auto [a, b] = edge_ends(grid, key);
    const double ua = grid.u[grid.node_index(a[0], a[1], a[2])];
    const double ub = grid.u[grid.node_index(b[0], b[1], b[2])];
    const double sum = ua + ub;
    const double t = sum > 0.0 ? ua / sum : 0.5;
    const Vec3 pa = grid.node_position(a[0], a[1], a[2]);
    const Vec3 pb = grid.node_position(b[0], b[1], b[2]);
    return pa + t * (pb - pa);
}

}  // namespace

geometry::TriangleMesh extract_mesh(const FieldGrid& grid, const ExtractionConfig& config) {
    if (!(config.far_cutoff > 0.0)) throw InvalidInputError("far_cutoff must be positive");
    if (grid.u.size() != grid.node_count() || grid.g.size() != grid.node_count()) {
        throw InvalidInputError("grid arrays do not match its resolution");
    }
    const auto [rx, ry, rz] = grid.resolution;
    if (config.crossing_slack < 0.0) throw InvalidInputError("crossing_slack must be non-negative");
    const Vec3 cell = grid.cell_size();
    const double far = config.far_cutoff * cell.norm();

    // Cells are emitted slab by slab (one z layer each) and merged in slab
    // order, so the result does not depend on the worker count.
    std::vector<std::vector<CellTriangle>> slabs(static_cast<std::size_t>(rz));
    parallel_for(slabs.size(), [&](std::size_t begin, std::size_t end) {
        std::array<float, 8> u{};
        std::array<Eigen::Vector3f, 8> g;
        std::array<bool, 8> positive{};
        for (std::size_t kk = begin; kk < end; ++kk) {
            const int k = static_cast<int>(kk);
            auto& out = slabs[kk];
            for (int j = 0; j < ry; ++j) {
                for (int i = 0; i < rx; ++i) {
                    float min_u = std::numeric_limits<float>::infinity();
                    for (int c = 0; c < 8; ++c) {
                        const auto& o = tables::kCornerOffset[c];
                        const std::size_t idx = grid.node_index(i + o[0], j + o[1], k + o[2]);
                        u[c] = grid.u[idx];
                        g[c] = grid.g[idx];
                        min_u = std::min(min_u, u[c]);
                    }
                    if (!(min_u < far)) continue;
                    if (!pseudo_signs(u, g, config.sign_dot_threshold, positive)) continue;
                    int mask = 0;
                    for (int c = 0; c < 8; ++c) {
                        if (!positive[c]) mask |= 1 << c;
                    }
                    if (mask == 0 || mask == 255) continue;
                    if (config.crossing_slack > 0.0) {
                        bool plausible = true;
                        for (int e = 0; e < 12 && plausible; ++e) {
                            const auto [ca, cb] = tables::kEdgeCorners[e];
                            if (positive[ca] == positive[cb]) continue;
                            int axis = 0;
                            while (tables::kCornerOffset[ca][axis] == tables::kCornerOffset[cb][axis]) ++axis;
                            plausible = u[ca] + u[cb] <= config.crossing_slack * cell[axis];
                        }
                        if (!plausible) continue;
                    }
                    const auto& row = tables::kTriTable[mask];
                    for (int t = 0; row[t] >= 0; t += 3) {
                        out.push_back({{edge_key(grid, i, j, k, row[t]), edge_key(grid, i, j, k, row[t + 1]),
                                        edge_key(grid, i, j, k, row[t + 2])}});
                    }
                }
            }
        }
    });

    geometry::TriangleMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> welded;
    for (const auto& slab : slabs) {
        for (const auto& tri : slab) {
            geometry::Triangle face{};
            for (int v = 0; v < 3; ++v) {
                const std::uint64_t key = vertex_key(grid, tri.edges[v]);
                auto [it, inserted] = welded.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
                if (inserted) mesh.vertices.push_back(edge_vertex(grid, tri.edges[v]));
                face[v] = it->second;
            }
            // Node-welded corners can collapse a triangle.
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) continue;
            mesh.triangles.push_back(face);
        }
    }
    return mesh;
}

double hole_metric(const geometry::TriangleMesh& mesh, const std::vector<Vec3>& gt_samples, double epsilon) {
    if (mesh.empty() || gt_samples.empty()) return 0.0;
    const geometry::Bvh bvh(mesh);
    std::vector<unsigned char> covered(gt_samples.size(), 0);
    parallel_for(gt_samples.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            covered[i] = bvh.closest_point(mesh, gt_samples[i]).distance < epsilon ? 1 : 0;
        }
    });
    const auto hits = std::count(covered.begin(), covered.end(), static_cast<unsigned char>(1));
    return static_cast<double>(hits) / static_cast<double>(gt_samples.size());
}

}  // namespace gdf::meshing
