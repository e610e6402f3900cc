#include "gdf/demo2d/demo2d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "gdf/common/error.hpp"

namespace gdf::demo2d {

namespace fs = std::filesystem;

double Contour2D::length() const {
    double total = 0.0;
    for (const auto& s : segments) total += (s.b - s.a).norm();
    return total;
}

Contour2D make_contour(const std::vector<std::vector<Vec2>>& polylines) {
    Contour2D c;
    for (const auto& line : polylines) {
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            if ((line[i + 1] - line[i]).norm() > 0.0) c.segments.push_back({line[i], line[i + 1]});
        }
    }
    return c;
}

Contour2D load_contour(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    std::vector<std::vector<Vec2>> polylines(1);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.find_first_not_of(" \t") == std::string::npos) {
            if (!polylines.back().empty()) polylines.emplace_back();
            continue;
        }
        if (raw[raw.find_first_not_of(" \t")] == '#') continue;
        std::replace(raw.begin(), raw.end(), ',', ' ');
        std::istringstream line(raw);
        Vec2 p;
        if (!(line >> p.x() >> p.y())) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'x,y'");
        }
        polylines.back().push_back(p);
    }
    Contour2D c = make_contour(polylines);
    if (c.empty()) throw InvalidInputError("contour has no segments: " + path.string());
    return c;
}

Contour2D normalize_contour(const Contour2D& contour) {
    if (contour.empty()) throw InvalidInputError("cannot normalize an empty contour");
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const auto& s : contour.segments) {
        lo = lo.cwiseMin(s.a).cwiseMin(s.b);
        hi = hi.cwiseMax(s.a).cwiseMax(s.b);
    }
    const double longest = (hi - lo).maxCoeff();
    const Vec2 center = 0.5 * (lo + hi);
    Contour2D out;
    for (const auto& s : contour.segments) out.segments.push_back({(s.a - center) / longest, (s.b - center) / longest});
    return out;
}

Vec2 closest_point_on_segment(const Vec2& q, const Segment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((q - s.a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return s.a + t * d;
}

Vec2 gdf2d_ground_truth(const Contour2D& contour, const Vec2& x) {
    if (contour.empty()) throw InvalidInputError("empty contour");
    Vec2 best = closest_point_on_segment(x, contour.segments[0]);
    double best_d2 = (best - x).squaredNorm();
    for (std::size_t i = 1; i < contour.segments.size(); ++i) {
        const Vec2 p = closest_point_on_segment(x, contour.segments[i]);
        const double d2 = (p - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = p;
        }
    }
    return best - x;
}

namespace {

struct Raster {
    int size;
    double half;
    double pixel() const { return 2.0 * half / size; }
    Vec2 center(int px, int py) const { return {-half + (px + 0.5) * pixel(), half - (py + 0.5) * pixel()}; }
    // Continuous pixel coordinates of a point (pixel centers at integers).
    Vec2 to_pixel(const Vec2& p) const { return {(p.x() + half) / pixel() - 0.5, (half - p.y()) / pixel() - 0.5}; }
};

struct Evaluated {
    std::vector<double> u;
    Eigen::Matrix2Xd g;
    Eigen::Matrix2Xd v;
};

Evaluated evaluate(const neural::NeuralField& field, const Eigen::Matrix2Xd& points) {
    const Eigen::MatrixXf input = points.cast<float>();
    const Eigen::MatrixXf out = neural::evaluate_outputs(field, input);
    const auto n = points.cols();
    Evaluated e;
    e.u.resize(static_cast<std::size_t>(n));
    e.g.setZero(2, n);
    e.v.setZero(2, n);
    if (field.representation == field::Representation::Udf) {
        const Eigen::MatrixXf grad = neural::evaluate_input_gradient(field, input);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double u = std::max(0.0, static_cast<double>(out(0, j)));
            const Vec2 d = grad.col(j).cast<double>();
            const double len = d.norm();
            e.u[static_cast<std::size_t>(j)] = u;
            if (len > 0.0) e.g.col(j) = -d / len;
            e.v.col(j) = u * e.g.col(j);
        }
        return e;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec2 v = out.col(j).cast<double>();
        if (field.representation == field::Representation::Csp) v -= points.col(j);
        const double u = v.norm();
        e.u[static_cast<std::size_t>(j)] = u;
        e.v.col(j) = v;
        if (u >= field::kZeroDistance) e.g.col(j) = v / u;
    }
    return e;
}

Eigen::Matrix2Xd pixel_centers(const Raster& r) {
    Eigen::Matrix2Xd pts(2, r.size * r.size);
    for (int py = 0; py < r.size; ++py)
        for (int px = 0; px < r.size; ++px) pts.col(py * r.size + px) = r.center(px, py);
    return pts;
}

struct Probe {
    Vec2 point;
    Vec2 normal;
};

// Segment midpoints whose neighbourhood of +-reach along the normal has the
// midpoint itself as nearest contour point (locally straight, away from the
// medial axis and the open ends).
std::vector<Probe> select_probes(const Contour2D& c, double reach) {
    std::vector<Probe> probes;
    for (const auto& s : c.segments) {
        const Vec2 mid = 0.5 * (s.a + s.b);
        const Vec2 d = (s.b - s.a).normalized();
        const Vec2 n(-d.y(), d.x());
        bool ok = true;
        for (double side : {-1.0, 1.0}) {
            const Vec2 q = mid + side * reach * n;
            if ((gdf2d_ground_truth(c, q) + q - mid).norm() > 1e-9 * (1.0 + reach)) ok = false;
        }
        if (ok) probes.push_back({mid, n});
    }
    return probes;
}

std::vector<Vec2> contour_samples(const Contour2D& c, double spacing) {
    std::vector<Vec2> pts;
    for (const auto& s : c.segments) {
        const double len = (s.b - s.a).norm();
        const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        for (int i = 0; i < n; ++i) pts.push_back(s.a + (s.b - s.a) * (static_cast<double>(i) / n));
    }
    pts.push_back(c.segments.back().b);
    return pts;
}

std::pair<Eigen::MatrixXf, Eigen::MatrixXf> training_data(const Contour2D& c, const DemoConfig& cfg,
                                                          field::Representation repr) {
    std::mt19937_64 rng(cfg.train.seed ^ 0x2d2d2d2dULL);
    std::vector<double> cumulative;
    double acc = 0.0;
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const auto& s : c.segments) {
        acc += (s.b - s.a).norm();
        cumulative.push_back(acc);
        lo = lo.cwiseMin(s.a).cwiseMin(s.b);
        hi = hi.cwiseMax(s.a).cwiseMax(s.b);
    }
    const double diag = (hi - lo).norm();
    const auto n_uniform = static_cast<std::size_t>(std::round(cfg.uniform_fraction * cfg.n_samples));
    const std::size_t n_near = cfg.n_samples - n_uniform;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> box(-cfg.half_extent, cfg.half_extent);

    std::vector<Vec2> points;
    points.reserve(cfg.n_samples);
    for (std::size_t i = 0; i < n_near; ++i) {
        const double pick = unit(rng) * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        if (it == cumulative.end()) --it;
        const auto& s = c.segments[static_cast<std::size_t>(it - cumulative.begin())];
        const Vec2 base = s.a + unit(rng) * (s.b - s.a);
        const double sigma = (i < (n_near + 1) / 2 ? cfg.sigma_near[0] : cfg.sigma_near[1]) * diag;
        const double ox = normal(rng);
        const double oy = normal(rng);
        points.push_back(base + sigma * Vec2(ox, oy));
    }
    for (std::size_t i = 0; i < n_uniform; ++i) {
        const double x = box(rng);
        const double y = box(rng);
        points.emplace_back(x, y);
    }

    const int out_dim = field::output_dim(repr, 2);
    Eigen::MatrixXf inputs(2, static_cast<Eigen::Index>(points.size()));
    Eigen::MatrixXf targets(out_dim, inputs.cols());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        const Vec2 v = gdf2d_ground_truth(c, points[i]);
        inputs.col(j) = points[i].cast<float>();
        if (repr == field::Representation::Udf) targets(0, j) = static_cast<float>(v.norm());
        else if (repr == field::Representation::Gdf) targets.col(j) = v.cast<float>();
        else targets.col(j) = (points[i] + v).cast<float>();
    }
    return {inputs, targets};
}

RepresentationResult analyse(const Contour2D& c, neural::NeuralField field, const DemoConfig& cfg,
                             const std::vector<Probe>& probes) {
    const Raster r{cfg.image_size, cfg.half_extent};
    RepresentationResult res;
    const Evaluated img = evaluate(field, pixel_centers(r));
    res.distance_image.assign(img.u.begin(), img.u.end());
    res.vx_image.resize(img.u.size());
    res.gx_image.resize(img.u.size());
    for (std::size_t i = 0; i < img.u.size(); ++i) {
        res.vx_image[i] = static_cast<float>(img.v(0, static_cast<Eigen::Index>(i)));
        res.gx_image[i] = static_cast<float>(img.g(0, static_cast<Eigen::Index>(i)));
    }
    res.coverage = contour_coverage(c, res.distance_image, cfg);

    if (!probes.empty()) {
        const double px = r.pixel();
        const int steps = 121;  // +-3 px at 0.05 px
        Eigen::Matrix2Xd line(2, static_cast<Eigen::Index>(probes.size()) * steps);
        Eigen::Matrix2Xd pairs(2, static_cast<Eigen::Index>(probes.size()) * 2);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            for (int s = 0; s < steps; ++s) {
                const double t = (-3.0 + 0.05 * s) * px;
                line.col(static_cast<Eigen::Index>(p) * steps + s) = probes[p].point + t * probes[p].normal;
            }
            const double d = cfg.pair_offset_px * px;
            pairs.col(2 * static_cast<Eigen::Index>(p)) = probes[p].point + d * probes[p].normal;
            pairs.col(2 * static_cast<Eigen::Index>(p) + 1) = probes[p].point - d * probes[p].normal;
        }
        const Evaluated on_line = evaluate(field, line);
        const Evaluated on_pairs = evaluate(field, pairs);
        double min_sum = 0.0;
        double prod_sum = 0.0;
        std::size_t n_pairs = 0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            double m = std::numeric_limits<double>::infinity();
            for (int s = 0; s < steps; ++s) m = std::min(m, on_line.u[p * steps + s]);
            min_sum += m;
            if (std::abs(probes[p].normal.x()) < cfg.pair_min_normal_x) continue;
            const auto a = 2 * static_cast<Eigen::Index>(p);
            prod_sum += on_pairs.g(0, a) * on_pairs.g(0, a + 1);
            ++n_pairs;
        }
        res.probe_min = min_sum / static_cast<double>(probes.size());
        res.sign_flip_product = n_pairs > 0 ? prod_sum / static_cast<double>(n_pairs) : 0.0;
    }
    res.field = std::move(field);
    return res;
}

}  // namespace

double contour_coverage(const Contour2D& contour, const std::vector<float>& distance_image, const DemoConfig& cfg) {
    const Raster r{cfg.image_size, cfg.half_extent};
    if (distance_image.size() != static_cast<std::size_t>(r.size) * r.size) {
        throw InvalidInputError("distance image does not match the configured size");
    }
    const double threshold = cfg.surface_px * r.pixel();
    const auto samples = contour_samples(contour, 0.25 * r.pixel());
    const int reach = static_cast<int>(std::ceil(cfg.coverage_px)) + 1;
    std::size_t covered = 0;
    for (const auto& s : samples) {
        const Vec2 pc = r.to_pixel(s);
        const int cx = static_cast<int>(std::lround(pc.x()));
        const int cy = static_cast<int>(std::lround(pc.y()));
        bool hit = false;
        for (int py = cy - reach; py <= cy + reach && !hit; ++py) {
            for (int px = cx - reach; px <= cx + reach && !hit; ++px) {
                if (px < 0 || py < 0 || px >= r.size || py >= r.size) continue;
                if ((Vec2(px, py) - pc).norm() >= cfg.coverage_px) continue;
                hit = distance_image[static_cast<std::size_t>(py) * r.size + px] < threshold;
            }
        }
        covered += hit ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(samples.size());
}

Demo2dReport run_demo(const Contour2D& input, const DemoConfig& cfg) {
    if (input.empty()) throw InvalidInputError("empty contour");
    if (cfg.image_size < 8) throw InvalidInputError("image size must be at least 8");
    if (cfg.n_samples < 1) throw InvalidInputError("demo needs at least one training sample");
    const Contour2D c = normalize_contour(input);
    const Raster r{cfg.image_size, cfg.half_extent};
    const auto probes = select_probes(c, 3.0 * r.pixel());

    Demo2dReport report;
    report.image_size = cfg.image_size;
    neural::MlpConfig mlp = cfg.mlp;
    mlp.spatial_dim = 2;
    mlp.latent_len = 0;
    for (auto repr : {field::Representation::Gdf, field::Representation::Udf}) {
        const auto [inputs, targets] = training_data(c, cfg, repr);
        auto trained = neural::train_regression(inputs, targets, mlp, repr, cfg.train);
        auto result = analyse(c, std::move(trained.field), cfg, probes);
        (repr == field::Representation::Gdf ? report.gdf : report.udf) = std::move(result);
    }

    std::vector<float> gt(static_cast<std::size_t>(r.size) * r.size);
    for (int py = 0; py < r.size; ++py)
        for (int px = 0; px < r.size; ++px)
            gt[static_cast<std::size_t>(py) * r.size + px] =
                static_cast<float>(gdf2d_ground_truth(c, r.center(px, py)).norm());
    report.ground_truth_coverage = contour_coverage(c, gt, cfg);
    return report;
}

void write_pgm(const fs::path& path, const std::vector<float>& image, int size, float lo, float hi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << "P5\n" << size << ' ' << size << "\n255\n";
    for (float v : image) {
        const float t = std::clamp((v - lo) / (hi - lo), 0.0f, 1.0f);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0f))));
    }
}

void write_outputs(const Contour2D& contour, const Demo2dReport& report, const DemoConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const Contour2D c = normalize_contour(contour);
    const Raster r{cfg.image_size, cfg.half_extent};
    const auto n = static_cast<std::size_t>(r.size) * r.size;
    std::vector<float> gt_u(n), gt_vx(n), gt_gx(n);
    for (int py = 0; py < r.size; ++py)
        for (int px = 0; px < r.size; ++px) {
            const std::size_t i = static_cast<std::size_t>(py) * r.size + px;
            const Vec2 v = gdf2d_ground_truth(c, r.center(px, py));
            gt_u[i] = static_cast<float>(v.norm());
            gt_vx[i] = static_cast<float>(v.x());
            gt_gx[i] = v.norm() >= field::kZeroDistance ? static_cast<float>(v.x() / v.norm()) : 0.0f;
        }
    // Distances are shown up to 20 pixels; vx symmetric over the same range.
    const auto max_d = static_cast<float>(20.0 * r.pixel());
    auto dump = [&](const std::string& name, const std::vector<float>& u, const std::vector<float>& vx,
                    const std::vector<float>& gx) {
        write_pgm(dir / (name + "_distance.pgm"), u, r.size, 0.0f, max_d);
        write_pgm(dir / (name + "_vx.pgm"), vx, r.size, -max_d, max_d);
        write_pgm(dir / (name + "_gx.pgm"), gx, r.size, -1.0f, 1.0f);
    };
    dump("gt", gt_u, gt_vx, gt_gx);
    dump("gdf", report.gdf.distance_image, report.gdf.vx_image, report.gdf.gx_image);
    dump("udf", report.udf.distance_image, report.udf.vx_image, report.udf.gx_image);

    std::ofstream csv(dir / "report.csv");
    csv << "representation,coverage,probe_min_px,sign_flip_product\n";
    auto row = [&](const char* name, const RepresentationResult& res) {
        csv << name << ',' << res.coverage << ',' << res.probe_min / r.pixel() << ',' << res.sign_flip_product << '\n';
    };
    row("gdf", report.gdf);
    row("udf", report.udf);
    csv << "ground_truth," << report.ground_truth_coverage << ",0,\n";
}

}  // namespace gdf::demo2d
