#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "gdf/common/error.hpp"
#include "gdf/demo2d/demo2d.hpp"

using namespace gdf;
using namespace gdf::demo2d;

namespace {

Contour2D corner_contour() { return make_contour({{Vec2(-0.5, 0.0), Vec2(0.0, 0.0), Vec2(0.0, 0.5)}}); }

// Exact ground-truth distance raster, same pixel layout as the demo.
std::vector<float> exact_image(const Contour2D& c, const DemoConfig& cfg) {
    const double px = 2.0 * cfg.half_extent / cfg.image_size;
    std::vector<float> img(static_cast<std::size_t>(cfg.image_size) * cfg.image_size);
    for (int y = 0; y < cfg.image_size; ++y)
        for (int x = 0; x < cfg.image_size; ++x) {
            const Vec2 p(-cfg.half_extent + (x + 0.5) * px, cfg.half_extent - (y + 0.5) * px);
            img[static_cast<std::size_t>(y) * cfg.image_size + x] =
                static_cast<float>(gdf2d_ground_truth(c, p).norm());
        }
    return img;
}

}  // namespace

TEST_SUITE("demo2d") {

TEST_CASE("closest point on a segment") {
    const Segment s{Vec2(0, 0), Vec2(2, 0)};
    CHECK(closest_point_on_segment(Vec2(1, 3), s) == Vec2(1, 0));
    CHECK(closest_point_on_segment(Vec2(-1, 1), s) == Vec2(0, 0));
    CHECK(closest_point_on_segment(Vec2(5, -1), s) == Vec2(2, 0));
}

TEST_CASE("2D ground truth examples") {
    const auto c = corner_contour();
    CHECK(gdf2d_ground_truth(c, Vec2(-0.2, 0.3)).isApprox(Vec2(0.2, 0)));
    CHECK(gdf2d_ground_truth(c, Vec2(-0.3, 0.1)).isApprox(Vec2(0, -0.1)));
    CHECK(gdf2d_ground_truth(c, Vec2(0.1, 0.2)).isApprox(Vec2(-0.1, 0)));
    CHECK(gdf2d_ground_truth(c, Vec2(0.3, -0.4)).isApprox(Vec2(-0.3, 0.4)));
    CHECK(gdf2d_ground_truth(c, Vec2(-0.25, 0.0)).norm() == 0.0);
    CHECK_THROWS_AS(gdf2d_ground_truth(Contour2D{}, Vec2(0, 0)), InvalidInputError);
}

TEST_CASE("horizontal segment") {
    const auto c = make_contour({{Vec2(0, 0), Vec2(1, 0)}});
    CHECK(gdf2d_ground_truth(c, Vec2(0.5, 0.3)).isApprox(Vec2(0, -0.3)));
}

TEST_CASE("2D ground truth equals a per-segment exhaustive check") {
    const auto c = normalize_contour(load_contour(GDF_DATA_DIR "/bunny_contour.csv"));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x(d(rng), d(rng));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : c.segments) {
            const Vec2 ab = s.b - s.a;
            const double t = std::clamp((x - s.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
            best = std::min(best, (s.a + t * ab - x).norm());
        }
        CHECK(gdf2d_ground_truth(c, x).norm() == best);
    }
}

TEST_CASE("2D ground truth matches dense sampling of the contour") {
    const auto c = make_contour({{Vec2(-0.4, -0.1), Vec2(-0.1, 0.3), Vec2(0.2, 0.1), Vec2(0.45, 0.35)}});
    std::vector<Vec2> dense;
    for (const auto& s : c.segments) {
        for (int i = 0; i <= 20000; ++i) dense.push_back(s.a + (s.b - s.a) * (i / 20000.0));
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    for (int k = 0; k < 50; ++k) {
        const Vec2 x(d(rng), d(rng));
        double best = 1e9;
        for (const auto& p : dense) best = std::min(best, (p - x).norm());
        const Vec2 v = gdf2d_ground_truth(c, x);
        CHECK(v.norm() <= best + 1e-12);
        CHECK(v.norm() >= best - 3e-5);
    }
}

TEST_CASE("contour files") {
    const auto dir = fixtures::scratch_dir("contour");
    fixtures::write_text(dir / "a.csv", "# two pieces\n0,0\n1,0\n1,1\n\n2,2\n3,2\n");
    const auto c = load_contour(dir / "a.csv");
    CHECK(c.segments.size() == 3);
    CHECK(c.length() == doctest::Approx(3.0));
    fixtures::write_text(dir / "b.csv", "0,0\n1,zero\n");
    try {
        load_contour(dir / "b.csv");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("b.csv:2") != std::string::npos);
    }
    fixtures::write_text(dir / "c.csv", "# nothing\n5,5\n");
    CHECK_THROWS_AS(load_contour(dir / "c.csv"), InvalidInputError);
    CHECK_THROWS_AS(load_contour(dir / "missing.csv"), InvalidInputError);
}

TEST_CASE("bundled contour is open and normalizes to the unit box") {
    const auto c = normalize_contour(load_contour(GDF_DATA_DIR "/bunny_contour.csv"));
    CHECK(c.segments.size() > 100);
    CHECK((c.segments.front().a - c.segments.back().b).norm() > 0.1);
    Vec2 lo = Vec2::Constant(1e9), hi = -lo;
    for (const auto& s : c.segments) {
        lo = lo.cwiseMin(s.a).cwiseMin(s.b);
        hi = hi.cwiseMax(s.a).cwiseMax(s.b);
    }
    CHECK((hi - lo).maxCoeff() == doctest::Approx(1.0));
    CHECK((hi + lo).norm() < 1e-12);
}

TEST_CASE("coverage of the exact distance image is one") {
    DemoConfig cfg;
    cfg.image_size = 128;
    const auto c = normalize_contour(load_contour(GDF_DATA_DIR "/bunny_contour.csv"));
    CHECK(contour_coverage(c, exact_image(c, cfg), cfg) == 1.0);
    std::vector<float> blank(128 * 128, 1.0f);
    CHECK(contour_coverage(c, blank, cfg) == 0.0);
    CHECK_THROWS_AS(contour_coverage(c, std::vector<float>(10), cfg), InvalidInputError);
}

TEST_CASE("small demo on a straight line") {
    DemoConfig cfg;
    cfg.image_size = 64;
    cfg.mlp = {.depth = 4, .width = 64, .spatial_dim = 2};
    cfg.train.iterations = 1500;
    cfg.n_samples = 4000;
    const auto c = make_contour({{Vec2(-0.4, -0.3), Vec2(0.4, 0.3)}});
    const auto report = run_demo(c, cfg);
    CHECK(report.image_size == 64);
    CHECK(report.ground_truth_coverage == 1.0);
    CHECK(report.gdf.coverage > 0.95);
    CHECK(report.udf.coverage > 0.95);
    CHECK(report.gdf.sign_flip_product < 0.0);
    CHECK(report.gdf.distance_image.size() == 64 * 64);

    const auto dir = fixtures::scratch_dir("demo_out");
    write_outputs(c, report, cfg, dir);
    for (const char* name : {"gt_distance.pgm", "gdf_gx.pgm", "udf_vx.pgm", "report.csv"}) {
        CHECK(std::filesystem::exists(dir / name));
    }
    CHECK(std::filesystem::file_size(dir / "gdf_distance.pgm") > 64 * 64);
}

TEST_CASE("demo validates its configuration") {
    DemoConfig cfg;
    cfg.image_size = 4;
    CHECK_THROWS_AS(run_demo(corner_contour(), cfg), InvalidInputError);
    CHECK_THROWS_AS(run_demo(Contour2D{}, DemoConfig{}), InvalidInputError);
}

}
