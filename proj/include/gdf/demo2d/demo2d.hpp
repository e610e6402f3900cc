#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gdf/neural/training.hpp"

namespace gdf::demo2d {

using Vec2 = Eigen::Vector2d;

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Union of open polylines, stored as segments.
struct Contour2D {
    std::vector<Segment> segments;

    bool empty() const { return segments.empty(); }
    double length() const;
};

/// Builds segments from polylines, skipping zero-length ones.
Contour2D make_contour(const std::vector<std::vector<Vec2>>& polylines);

/// CSV of "x,y" rows; a blank line starts a new polyline; '#' lines are comments.
Contour2D load_contour(const std::filesystem::path& path);

/// Uniformly rescales the contour so its bounding box is centered and its
/// longest side is 1.
Contour2D normalize_contour(const Contour2D& contour);

Vec2 closest_point_on_segment(const Vec2& q, const Segment& s);

/// Vector from x to its nearest contour point (exhaustive over segments,
/// lowest segment index on ties).
Vec2 gdf2d_ground_truth(const Contour2D& contour, const Vec2& x);

struct DemoConfig {
    int image_size = 256;
    /// The rasterized square is [-half_extent, half_extent]^2.
    double half_extent = 0.55;
    neural::MlpConfig mlp{.depth = 8, .width = 256, .spatial_dim = 2};
    neural::TrainConfig train{.iterations = 10000, .batch_size = 256, .adam = {.learning_rate = 1e-3}};
    std::size_t n_samples = 20000;
    /// Share of samples drawn uniformly over the square.
    double uniform_fraction = 0.05;
    /// Offset scales as fractions of the contour's bounding-box diagonal.
    std::array<double, 2> sigma_near{0.005, 0.0005};
    /// A pixel belongs to the predicted contour when its predicted distance
    /// is below this many pixels.
    double surface_px = 0.5;
    /// Contour points within this many pixels of a predicted-contour pixel
    /// count as covered.
    double coverage_px = 2.0;
    /// Offset of the paired points used for the x-gradient sign check.
    double pair_offset_px = 2.0;
    /// Only probes whose unit normal has |n_x| at least this large enter the
    /// sign check; elsewhere the x-channel is near zero on both sides.
    double pair_min_normal_x = 0.5;
};

struct RepresentationResult {
    neural::NeuralField field;
    double coverage = 0.0;
    /// Mean over probes of the smallest predicted distance along a short line
    /// crossing the contour perpendicularly.
    double probe_min = 0.0;
    /// Mean of g_x(A) * g_x(B) over point pairs on opposite sides of the contour.
    double sign_flip_product = 0.0;
    std::vector<float> distance_image;
    std::vector<float> vx_image;
    std::vector<float> gx_image;
};

struct Demo2dReport {
    RepresentationResult gdf;
    RepresentationResult udf;
    double ground_truth_coverage = 0.0;
    int image_size = 0;
};

/// Trains identical UDF and GDF networks on identical samples of the
/// (normalized) contour and measures their contour coverage.
Demo2dReport run_demo(const Contour2D& contour, const DemoConfig& config);

/// Coverage of a rasterized distance image against the contour.
double contour_coverage(const Contour2D& contour, const std::vector<float>& distance_image, const DemoConfig& config);

/// Writes {gt,gdf,udf}_{distance,vx,gx}.pgm and report.csv into `dir`.
void write_outputs(const Contour2D& contour, const Demo2dReport& report, const DemoConfig& config,
                   const std::filesystem::path& dir);

/// 8-bit binary PGM; values are mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const std::vector<float>& image, int size, float lo, float hi);

}  // namespace gdf::demo2d
