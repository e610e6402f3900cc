// gdf: sample, fit, train-ad, fit-latent, mesh, eval and demo2d commands.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"
#include "gdf/common/parallel.hpp"
#include "gdf/demo2d/demo2d.hpp"
#include "gdf/field/gdf.hpp"
#include "gdf/geometry/bvh.hpp"
#include "gdf/geometry/mesh.hpp"
#include "gdf/geometry/sampling.hpp"
#include "gdf/meshing/extract.hpp"
#include "gdf/meshing/grid.hpp"
#include "gdf/metrics/metrics.hpp"
#include "gdf/neural/network.hpp"
#include "gdf/neural/training.hpp"

namespace fs = std::filesystem;
using namespace gdf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

/// Options every subcommand shares, plus what goes into its manifest.
struct Command {
    CLI::App* app = nullptr;
    std::uint64_t seed = 0;
    std::string config_path;
    unsigned threads = 1;
    std::function<void(Command&)> run;

    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

void add_common(Command& cmd) {
    cmd.app->add_option("--seed", cmd.seed, "Random seed")->capture_default_str();
    cmd.app->add_option("--config", cmd.config_path, "Flat key=value file; command-line flags take precedence");
    cmd.app->add_option("--threads", cmd.threads, "Worker threads for sampling, grids and metrics")
        ->capture_default_str();
}

/// Applies a key=value file to every option not given on the command line.
void apply_config_file(Command& cmd) {
    if (cmd.config_path.empty()) return;
    std::ifstream in(cmd.config_path);
    if (!in) throw InvalidInputError("cannot open config file " + cmd.config_path);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] == '#' || raw[first] == ';') continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) {
            throw InvalidInputError(cmd.config_path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\"");
            const auto e = s.find_last_not_of(" \t\r\"");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        CLI::Option* opt = nullptr;
        try {
            opt = cmd.app->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw InvalidInputError(cmd.config_path + ":" + std::to_string(line_no) + ": unknown option '" + key + "'");
        }
        if (key == "config" || opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            // Flags accept true/false style values.
            if (value == "true" || value == "1" || value == "on" || value == "yes") opt->add_result("true");
            else continue;
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_manifest(const Command& cmd, const fs::path& primary_output, double seconds) {
    nlohmann::ordered_json m;
    m["command"] = cmd.app->get_name();
    m["seed"] = cmd.seed;
    nlohmann::ordered_json config;
    std::istringstream resolved(cmd.app->config_to_str(true, false));
    std::string line;
    while (std::getline(resolved, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string value = line.substr(eq + 1);
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        config[line.substr(0, eq)] = value;
    }
    m["config"] = config;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& path : cmd.inputs) {
        if (fs::is_regular_file(path)) inputs[path] = "fnv1a64:" + hex64(io::fnv1a_file(path));
    }
    m["inputs"] = inputs;
    m["outputs"] = cmd.outputs;
    m["wall_time_s"] = seconds;
    fs::path manifest = primary_output;
    if (fs::is_directory(primary_output)) manifest /= "manifest.json";
    else manifest += ".manifest.json";
    std::ofstream out(manifest);
    out << m.dump(2) << '\n';
}

neural::LossWeights parse_weights(const std::string& text) {
    neural::LossWeights w;
    char sep1 = 0;
    char sep2 = 0;
    std::istringstream in(text);
    if (!(in >> w.adf >> sep1 >> w.grad >> sep2 >> w.udf) || sep1 != ',' || sep2 != ',') {
        throw InvalidInputError("--weights expects three comma-separated numbers, got '" + text + "'");
    }
    w.validate();
    return w;
}

geometry::TriangleMesh load_normalized(const std::string& path, geometry::NormalizeTransform* transform) {
    auto loaded = geometry::load_mesh(path);
    if (loaded.report.degenerate_dropped > 0) {
        std::cerr << "note: dropped " << loaded.report.degenerate_dropped << " degenerate face(s) from " << path
                  << "\n";
    }
    auto [mesh, t] = geometry::normalize_mesh(loaded.mesh);
    if (transform) *transform = t;
    return mesh;
}

void progress_printer(std::int64_t total, std::int64_t it, double loss) {
    const std::int64_t every = std::max<std::int64_t>(1, total / 10);
    if ((it + 1) % every == 0 || it + 1 == total) {
        std::cerr << "  iter " << it + 1 << "/" << total << "  loss " << loss << "\n";
    }
}

// ---------------------------------------------------------------- sample

void setup_sample(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("sample", "Sample query points around a mesh and label them with exact GDF vectors");
    struct Opts {
        std::string mesh, out, normalized_out;
        geometry::SamplingConfig cfg;
        bool no_normalize = false;
    };
    auto o = std::make_shared<Opts>();
    cmd.app->add_option("--mesh", o->mesh, "Input mesh (.obj or .ply)")->required();
    cmd.app->add_option("--out", o->out, "Output sample cache (.gdfs)")->required();
    cmd.app->add_option("--near", o->cfg.n_near_surface, "Near-surface sample count")->capture_default_str();
    cmd.app->add_option("--uniform", o->cfg.n_uniform, "Uniform volume sample count")->capture_default_str();
    cmd.app->add_option("--sigma0", o->cfg.sigma_near[0], "Wide offset scale (fraction of bbox diagonal)")
        ->capture_default_str();
    cmd.app->add_option("--sigma1", o->cfg.sigma_near[1], "Narrow offset scale (fraction of bbox diagonal)")
        ->capture_default_str();
    cmd.app->add_flag("--no-normalize", o->no_normalize, "Use the mesh coordinates as given");
    cmd.app->add_option("--normalized-mesh", o->normalized_out,
                        "Also write the mesh as sampled, i.e. in the frame of extracted meshes");
    add_common(cmd);
    cmd.run = [o](Command& c) {
        c.inputs.push_back(o->mesh);
        geometry::TriangleMesh mesh;
        if (o->no_normalize) {
            mesh = geometry::load_mesh(o->mesh).mesh;
        } else {
            mesh = load_normalized(o->mesh, nullptr);
        }
        geometry::SamplingConfig cfg = o->cfg;
        cfg.seed = c.seed;
        const auto set = field::build_training_set(mesh, cfg);
        field::write_sample_cache(set, o->out);
        c.outputs.push_back(o->out);
        if (!o->normalized_out.empty()) {
            geometry::save_mesh(mesh, o->normalized_out);
            c.outputs.push_back(o->normalized_out);
        }
        std::cout << "wrote " << set.size() << " samples to " << o->out << "\n";
    };
}

// ---------------------------------------------------------------- fit

struct NetOptions {
    std::string repr = "gdf";
    int depth = 8;
    int width = 512;
    std::int64_t iters = 30000;
    std::int64_t batch = 32000;
    double lr = 1e-4;
    std::string weights = "1,0,0";
    double clamp = 0.0;
    std::string history;
};

void add_net_options(CLI::App* app, NetOptions& o) {
    app->add_option("--repr", o.repr, "Representation: gdf, udf or csp")->capture_default_str();
    app->add_option("--depth", o.depth, "Linear layers in the MLP")->capture_default_str();
    app->add_option("--width", o.width, "Hidden units per layer")->capture_default_str();
    app->add_option("--iters", o.iters, "Training iterations")->capture_default_str();
    app->add_option("--batch", o.batch, "Query points per batch")->capture_default_str();
    app->add_option("--lr", o.lr, "Base Adam learning rate (x0.75 at each quarter)")->capture_default_str();
    app->add_option("--weights", o.weights, "GDF loss weights adf,grad,udf; 100,4,50 for the composite loss")
        ->capture_default_str();
    app->add_option("--clamp", o.clamp, "Cap target distances (0 = off)")->capture_default_str();
    app->add_option("--history", o.history, "Write the loss history as CSV (iteration,loss)");
}

neural::TrainConfig train_config(const NetOptions& o, std::uint64_t seed) {
    neural::TrainConfig t;
    t.iterations = o.iters;
    t.batch_size = o.batch;
    t.adam.learning_rate = o.lr;
    t.weights = parse_weights(o.weights);
    t.clamp_distance = o.clamp;
    t.seed = seed;
    t.on_progress = [total = o.iters](std::int64_t it, double loss) { progress_printer(total, it, loss); };
    return t;
}

void write_history(const std::string& path, const std::vector<neural::LossRecord>& history) {
    if (path.empty()) return;
    std::ofstream out(path);
    out << "iteration,loss\n";
    for (const auto& r : history) out << r.iteration << ',' << r.loss << '\n';
}

void setup_fit(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("fit", "Fit one network to one shape's samples");
    auto opts = std::make_shared<std::tuple<std::string, std::string, std::string, NetOptions>>();
    auto& [samples, out, mesh_path, net] = *opts;
    cmd.app->add_option("--samples", samples, "Sample cache (.gdfs)")->required();
    cmd.app->add_option("--out", out, "Output checkpoint (.gdfn)")->required();
    cmd.app->add_option("--mesh", mesh_path, "Original mesh, to record its normalization in the checkpoint");
    add_net_options(cmd.app, net);
    add_common(cmd);
    cmd.run = [opts](Command& c) {
        auto& [samples, out, mesh_path, net] = *opts;
        c.inputs.push_back(samples);
        const auto set = field::read_sample_cache(samples);
        neural::MlpConfig mlp{.depth = net.depth, .width = net.width};
        auto result = neural::train_single(set, mlp, field::representation_from_string(net.repr),
                                           train_config(net, c.seed));
        if (!mesh_path.empty()) {
            c.inputs.push_back(mesh_path);
            load_normalized(mesh_path, &result.field.normalization);
        }
        neural::write_checkpoint({result.field, {}}, out);
        write_history(net.history, result.history);
        c.outputs.push_back(out);
        std::cout << "wrote checkpoint " << out << "\n";
    };
}

// ---------------------------------------------------------------- train-ad

void setup_train_ad(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("train-ad", "Train an auto-decoder over every .gdfs file in a directory");
    auto opts = std::make_shared<std::tuple<std::string, std::string, int, double, NetOptions>>();
    auto& [dir, out, latent, latent_l2, net] = *opts;
    latent = 512;
    net.depth = 12;
    net.width = 1024;
    cmd.app->add_option("--samples-dir", dir, "Directory of sample caches, one per shape (sorted by name)")
        ->required();
    cmd.app->add_option("--out", out, "Output checkpoint (.gdfn)")->required();
    cmd.app->add_option("--latent", latent, "Latent code length")->capture_default_str();
    cmd.app->add_option("--latent-l2", latent_l2, "Squared-norm penalty on codes (0 = off)")->capture_default_str();
    add_net_options(cmd.app, net);
    add_common(cmd);
    cmd.run = [opts](Command& c) {
        auto& [dir, out, latent, latent_l2, net] = *opts;
        if (!fs::is_directory(dir)) throw InvalidInputError("not a directory: " + dir);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".gdfs") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw InvalidInputError("no .gdfs files in " + dir);
        std::vector<field::TrainingSet> shapes;
        for (std::size_t i = 0; i < files.size(); ++i) {
            c.inputs.push_back(files[i].string());
            shapes.push_back(field::read_sample_cache(files[i]));
            shapes.back().shape_id = static_cast<std::uint32_t>(i);
            std::cout << "shape " << i << ": " << files[i].filename().string() << "\n";
        }
        neural::MlpConfig mlp{.depth = net.depth, .width = net.width, .spatial_dim = 3, .latent_len = latent};
        auto cfg = train_config(net, c.seed);
        cfg.latent_l2 = latent_l2;
        auto result = neural::train_autodecoder(shapes, mlp, field::representation_from_string(net.repr), cfg);
        neural::write_checkpoint({result.field, result.latents}, out);
        write_history(net.history, result.history);
        c.outputs.push_back(out);
        std::cout << "wrote checkpoint " << out << " with " << result.latents.count() << " codes\n";
    };
}

// ---------------------------------------------------------------- mesh helpers

struct MeshOptions {
    int res = 128;
    int code_index = 0;
    double far_cutoff = 3.0;
    double sign_threshold = 0.0;
    double extent = 0.55;
};

void add_mesh_options(CLI::App* app, MeshOptions& o) {
    app->add_option("--res", o.res, "Grid cells per axis")->capture_default_str();
    app->add_option("--far-cutoff", o.far_cutoff, "Skip cells farther than this many cell diagonals")
        ->capture_default_str();
    app->add_option("--sign-threshold", o.sign_threshold, "Dot-product level for pseudo-sign agreement")
        ->capture_default_str();
    app->add_option("--extent", o.extent, "Half-size of the meshing cube")->capture_default_str();
}

const Eigen::VectorXf* select_code(const neural::Checkpoint& ck, int index, Eigen::VectorXf& storage) {
    if (ck.field.config.latent_len == 0) return nullptr;
    if (index < 0 || index >= ck.latents.count()) {
        throw InvalidInputError("code index " + std::to_string(index) + " out of range (checkpoint has " +
                                std::to_string(ck.latents.count()) + " codes)");
    }
    storage = ck.latents.code(index);
    return &storage;
}

geometry::TriangleMesh mesh_field(const neural::NeuralField& field, const Eigen::VectorXf* code,
                                  const MeshOptions& o, meshing::FieldGrid* grid_out = nullptr) {
    const geometry::Aabb bounds{geometry::Vec3::Constant(-o.extent), geometry::Vec3::Constant(o.extent)};
    auto grid = meshing::evaluate_grid(field, code, meshing::cube_resolution(o.res), bounds);
    auto mesh = meshing::extract_mesh(grid, {o.far_cutoff, o.sign_threshold});
    if (grid_out) *grid_out = std::move(grid);
    return mesh;
}

// ---------------------------------------------------------------- fit-latent

void setup_fit_latent(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("fit-latent", "Fit a latent code to a point cloud with frozen auto-decoder weights");
    struct Opts {
        std::string cloud, checkpoint, out, gt, csv, shape;
        std::size_t points = 10000;
        neural::LatentFitConfig fit;
        MeshOptions mesh;
        std::size_t eval_samples = 30000;
        bool include_uniform = false;
    };
    auto o = std::make_shared<Opts>();
    cmd.app->add_option("--cloud", o->cloud, "Point cloud (.xyz, or a mesh whose surface is sampled)")->required();
    cmd.app->add_option("--checkpoint", o->checkpoint, "Auto-decoder checkpoint")->required();
    cmd.app->add_option("--out", o->out, "Output checkpoint holding the fitted code")->required();
    cmd.app->add_option("--points", o->points, "Cloud points used for fitting")->capture_default_str();
    cmd.app->add_option("--iters", o->fit.iterations, "Optimization iterations")->capture_default_str();
    cmd.app->add_option("--batch", o->fit.batch_size, "Queries per batch")->capture_default_str();
    cmd.app->add_option("--queries", o->fit.n_queries, "Pseudo ground-truth query count")->capture_default_str();
    cmd.app->add_option("--lr", o->fit.adam.learning_rate, "Base learning rate")->capture_default_str();
    cmd.app->add_flag("--include-uniform", o->include_uniform, "Add 5% uniform-volume queries");
    cmd.app->add_option("--gt", o->gt, "Ground-truth mesh (normalized space) to evaluate the fitted shape against");
    cmd.app->add_option("--csv", o->csv, "Append an evaluation row to this CSV (needs --gt)");
    cmd.app->add_option("--shape", o->shape, "Shape name for the CSV row");
    cmd.app->add_option("--eval-samples", o->eval_samples, "Samples per mesh for CD/NC")->capture_default_str();
    add_mesh_options(cmd.app, o->mesh);
    add_common(cmd);
    cmd.run = [o](Command& c) {
        c.inputs.push_back(o->cloud);
        c.inputs.push_back(o->checkpoint);
        auto ck = neural::read_checkpoint(o->checkpoint);

        std::vector<geometry::Vec3> cloud;
        geometry::Rng rng(c.seed);
        const auto loaded = geometry::load_point_cloud(o->cloud);
        bool has_faces = false;
        if (fs::path(o->cloud).extension() != ".xyz") {
            try {
                const auto m = geometry::load_mesh(o->cloud).mesh;
                has_faces = true;
                cloud = geometry::sample_surface(m, o->points, rng);
            } catch (const InvalidInputError&) {
                has_faces = false;
            }
        }
        if (!has_faces) {
            cloud = loaded;
            std::shuffle(cloud.begin(), cloud.end(), rng);
            if (cloud.size() > o->points) cloud.resize(o->points);
        }
        o->fit.seed = c.seed;
        o->fit.include_uniform = o->include_uniform;
        const auto result = neural::fit_latent(cloud, ck.field, o->fit);

        neural::Checkpoint fitted{ck.field, {}};
        fitted.latents.codes = result.code;
        neural::write_checkpoint(fitted, o->out);
        c.outputs.push_back(o->out);
        std::cout << "fitted a " << result.code.size() << "-d code to " << cloud.size() << " points\n";

        if (!o->gt.empty()) {
            c.inputs.push_back(o->gt);
            const auto gt = geometry::load_mesh(o->gt).mesh;
            const auto mesh = mesh_field(fitted.field, &result.code, o->mesh);
            metrics::EvalReport report;
            report.method = "fit-latent-" + std::to_string(cloud.size());
            report.shape = o->shape.empty() ? fs::path(o->gt).stem().string() : o->shape;
            report.n_samples = o->eval_samples;
            report.seed = c.seed;
            if (!mesh.empty()) {
                report.cd = metrics::chamfer_distance(mesh, gt, o->eval_samples, c.seed);
                report.nc = metrics::normal_consistency(mesh, gt, o->eval_samples, c.seed);
            } else {
                report.cd = std::numeric_limits<double>::infinity();
            }
            std::cout << report.table();
            if (!o->csv.empty()) {
                const bool fresh = !fs::exists(o->csv) || fs::file_size(o->csv) == 0;
                std::ofstream csv(o->csv, std::ios::app);
                if (fresh) csv << metrics::EvalReport::csv_header() << '\n';
                csv << report.csv_row() << '\n';
                c.outputs.push_back(o->csv);
            }
        }
    };
}

// ---------------------------------------------------------------- mesh

void setup_mesh(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("mesh", "Extract a triangle mesh from a checkpoint or a grid dump");
    struct Opts {
        std::string checkpoint, grid, out, dump_grid;
        MeshOptions mesh;
    };
    auto o = std::make_shared<Opts>();
    auto* ck_opt = cmd.app->add_option("--checkpoint", o->checkpoint, "Network checkpoint (.gdfn)");
    auto* grid_opt = cmd.app->add_option("--grid", o->grid, "Grid dump (.gdfg) to mesh without the network");
    ck_opt->excludes(grid_opt);
    cmd.app->add_option("--out", o->out, "Output mesh (.ply or .obj)")->required();
    cmd.app->add_option("--code-index", o->mesh.code_index, "Latent code to decode")->capture_default_str();
    cmd.app->add_option("--dump-grid", o->dump_grid, "Also write the evaluated grid (.gdfg)");
    add_mesh_options(cmd.app, o->mesh);
    add_common(cmd);
    cmd.run = [o](Command& c) {
        geometry::TriangleMesh mesh;
        if (!o->grid.empty()) {
            c.inputs.push_back(o->grid);
            const auto grid = meshing::read_grid(o->grid);
            mesh = meshing::extract_mesh(grid, {o->mesh.far_cutoff, o->mesh.sign_threshold});
        } else if (!o->checkpoint.empty()) {
            c.inputs.push_back(o->checkpoint);
            const auto ck = neural::read_checkpoint(o->checkpoint);
            Eigen::VectorXf storage;
            const auto* code = select_code(ck, o->mesh.code_index, storage);
            meshing::FieldGrid grid;
            mesh = mesh_field(ck.field, code, o->mesh, &grid);
            if (!o->dump_grid.empty()) {
                meshing::write_grid(grid, o->dump_grid);
                c.outputs.push_back(o->dump_grid);
            }
        } else {
            throw InvalidInputError("mesh needs --checkpoint or --grid");
        }
        geometry::save_mesh(mesh, o->out);
        c.outputs.push_back(o->out);
        std::cout << "wrote " << mesh.vertex_count() << " vertices, " << mesh.triangle_count() << " triangles to "
                  << o->out << "\n";
    };
}

// ---------------------------------------------------------------- eval

void setup_eval(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand(
        "eval", "Compare a mesh (and optionally a checkpoint's field) against ground truth.\n"
                "CSV columns: method,shape,cd_x1e4,nc_pct,dist_err,grad_err,n_samples,seed");
    struct Opts {
        std::string mesh, gt, checkpoint, csv, method = "gdf", shape;
        std::size_t samples = 30000;
        int res = 64;
        double threshold_cells = 1.0;
        int code_index = 0;
        bool unsquared = false;
    };
    auto o = std::make_shared<Opts>();
    cmd.app->add_option("--mesh", o->mesh, "Predicted mesh");
    cmd.app->add_option("--gt", o->gt, "Ground-truth mesh (same coordinate frame)")->required();
    cmd.app->add_option("--checkpoint", o->checkpoint, "Also measure near-surface field errors of this network");
    cmd.app->add_option("--csv", o->csv, "Append the result row to this CSV");
    cmd.app->add_option("--method", o->method, "Method name for the report")->capture_default_str();
    cmd.app->add_option("--shape", o->shape, "Shape name for the report");
    cmd.app->add_option("--samples", o->samples, "Surface samples per mesh")->capture_default_str();
    cmd.app->add_option("--res", o->res, "Lattice resolution for field errors")->capture_default_str();
    cmd.app->add_option("--threshold-cells", o->threshold_cells, "Near-surface band in cells")->capture_default_str();
    cmd.app->add_option("--code-index", o->code_index, "Latent code for auto-decoder checkpoints")
        ->capture_default_str();
    cmd.app->add_flag("--unsquared", o->unsquared, "Use unsquared nearest-neighbour distances in the Chamfer term");
    add_common(cmd);
    cmd.run = [o](Command& c) {
        if (o->mesh.empty() && o->checkpoint.empty()) throw InvalidInputError("eval needs --mesh and/or --checkpoint");
        c.inputs.push_back(o->gt);
        const auto gt = geometry::load_mesh(o->gt).mesh;
        metrics::EvalReport report;
        report.method = o->method;
        report.shape = o->shape.empty() ? fs::path(o->gt).stem().string() : o->shape;
        report.n_samples = o->samples;
        report.seed = c.seed;
        if (!o->mesh.empty()) {
            c.inputs.push_back(o->mesh);
            const auto pred = geometry::load_mesh(o->mesh).mesh;
            report.cd = metrics::chamfer_distance(
                pred, gt, o->samples, c.seed,
                o->unsquared ? metrics::ChamferVariant::Unsquared : metrics::ChamferVariant::Squared);
            report.nc = metrics::normal_consistency(pred, gt, o->samples, c.seed);
        }
        if (!o->checkpoint.empty()) {
            c.inputs.push_back(o->checkpoint);
            const auto ck = neural::read_checkpoint(o->checkpoint);
            Eigen::VectorXf storage;
            const auto* code = select_code(ck, o->code_index, storage);
            const geometry::MeshIndex index(gt);
            const auto err = metrics::near_surface_field_error(ck.field, code, index, o->res, o->threshold_cells);
            report.dist_err = err.dist_err;
            report.grad_err = err.grad_err;
        }
        std::cout << report.table();
        if (!o->csv.empty()) {
            const bool fresh = !fs::exists(o->csv) || fs::file_size(o->csv) == 0;
            std::ofstream csv(o->csv, std::ios::app);
            if (fresh) csv << metrics::EvalReport::csv_header() << '\n';
            csv << report.csv_row() << '\n';
            c.outputs.push_back(o->csv);
        }
    };
}

// ---------------------------------------------------------------- demo2d

void setup_demo2d(Command& cmd, CLI::App& root) {
    cmd.app = root.add_subcommand("demo2d", "Fit UDF and GDF networks to an open 2D contour and compare coverage.\n"
                                            "report.csv columns: representation,coverage,probe_min_px,sign_flip_product");
    struct Opts {
        std::string contour, out;
        demo2d::DemoConfig cfg;
    };
    auto o = std::make_shared<Opts>();
    cmd.app->add_option("--contour", o->contour, "Polyline CSV (x,y rows, blank line between polylines)")->required();
    cmd.app->add_option("--out", o->out, "Output directory")->required();
    cmd.app->add_option("--size", o->cfg.image_size, "Image size in pixels")->capture_default_str();
    cmd.app->add_option("--depth", o->cfg.mlp.depth, "Linear layers")->capture_default_str();
    cmd.app->add_option("--width", o->cfg.mlp.width, "Hidden units")->capture_default_str();
    cmd.app->add_option("--iters", o->cfg.train.iterations, "Training iterations")->capture_default_str();
    cmd.app->add_option("--batch", o->cfg.train.batch_size, "Batch size")->capture_default_str();
    cmd.app->add_option("--lr", o->cfg.train.adam.learning_rate, "Base learning rate")->capture_default_str();
    cmd.app->add_option("--samples", o->cfg.n_samples, "Training samples")->capture_default_str();
    add_common(cmd);
    cmd.run = [o](Command& c) {
        c.inputs.push_back(o->contour);
        const auto contour = demo2d::load_contour(o->contour);
        o->cfg.train.seed = c.seed;
        const auto report = demo2d::run_demo(contour, o->cfg);
        demo2d::write_outputs(contour, report, o->cfg, o->out);
        c.outputs.push_back(o->out);
        std::printf("coverage  gdf %.4f  udf %.4f  (ground truth %.4f)\n", report.gdf.coverage, report.udf.coverage,
                    report.ground_truth_coverage);
        std::printf("x-gradient sign product across the contour: gdf %.4f  udf %.4f\n",
                    report.gdf.sign_flip_product, report.udf.sign_flip_product);
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App root("Gradient distance functions for open surfaces: sampling, fitting, meshing and evaluation");
    root.require_subcommand(1);

    std::vector<Command> commands(7);
    setup_sample(commands[0], root);
    setup_fit(commands[1], root);
    setup_train_ad(commands[2], root);
    setup_fit_latent(commands[3], root);
    setup_mesh(commands[4], root);
    setup_eval(commands[5], root);
    setup_demo2d(commands[6], root);

    try {
        root.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return root.exit(e);
    } catch (const CLI::ParseError& e) {
        root.exit(e);
        return kExitInput;
    }

    for (auto& cmd : commands) {
        if (!cmd.app->parsed()) continue;
        try {
            apply_config_file(cmd);
            set_thread_count(cmd.threads);
            const auto start = std::chrono::steady_clock::now();
            cmd.run(cmd);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (!cmd.outputs.empty()) write_manifest(cmd, cmd.outputs.front(), seconds);
        } catch (const NumericalError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        } catch (const CLI::ParseError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }
        return kExitOk;
    }
    return kExitInput;
}
