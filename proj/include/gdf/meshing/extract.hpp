#pragma once

#include <array>
#include <vector>

#include "gdf/geometry/mesh.hpp"
#include "gdf/meshing/grid.hpp"

namespace gdf::meshing {

struct ExtractionConfig {
    /// Cells whose smallest node distance is at least this many cell
    /// diagonals are skipped.
    double far_cutoff = 3.0;
    /// A node takes the anchor's pseudo-sign when dot(g_node, g_anchor)
    /// exceeds this level.
    double sign_dot_threshold = 0.0;
    /// A cell is skipped when some sign-changing edge has u_a + u_b above
    /// this multiple of the edge length. A surface crossing the edge gives at
    /// most one edge length; pseudo-sign flips past an open boundary give
    /// more. 0 disables the test.
    double crossing_slack = 2.0;
};

/// Pseudo-signs of one cell's 8 corners (marching-cubes corner order). The
/// anchor is the corner with the smallest u (lowest corner index on ties) and
/// its direction is the reference; when the anchor has a null gradient the
/// nearest corner with a non-null gradient provides it instead. Corners whose
/// dot product with the reference exceeds the threshold share the
/// reference's side. After orienting the reference so its first nonzero
/// component is positive, the side it points away from is marked true, so the
/// pattern does not depend on which corner became the anchor. Corners with a
/// null gradient are always false. Returns false when no corner has a
/// non-null gradient.
bool pseudo_signs(const std::array<float, 8>& u, const std::array<Eigen::Vector3f, 8>& g, double threshold,
                  std::array<bool, 8>& positive);

/// Meshes the zero level set of an unsigned field by running the marching
/// cubes case table on per-cell pseudo-signs. Crossings on sign-changing
/// edges sit at t = u_a / (u_a + u_b). Vertices are welded by global edge
/// index, or by node when the crossing falls on a node with u = 0; triangles
/// that collapse under that welding are dropped. No smoothing or hole filling
/// is applied.
geometry::TriangleMesh extract_mesh(const FieldGrid& grid, const ExtractionConfig& config = {});

/// Fraction of `gt_samples` closer than epsilon to `mesh` (0 for an empty mesh).
double hole_metric(const geometry::TriangleMesh& mesh, const std::vector<Vec3>& gt_samples, double epsilon);

}  // namespace gdf::meshing
