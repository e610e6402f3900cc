#include "gdf/neural/training.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gdf/common/error.hpp"
#include "gdf/geometry/kdtree.hpp"
#include "gdf/geometry/sampling.hpp"

namespace gdf::neural {

using Matrix = Eigen::MatrixXf;
using Vector = Eigen::VectorXf;

void LossWeights::validate() const {
    if (adf < 0.0 || grad < 0.0 || udf < 0.0) throw InvalidInputError("loss weights must be non-negative");
    if (adf == 0.0 && grad == 0.0 && udf == 0.0) throw InvalidInputError("loss weights must not all be zero");
}

void TrainConfig::validate() const {
    if (iterations < 0) throw InvalidInputError("iterations must be non-negative");
    if (batch_size < 1) throw InvalidInputError("batch size must be positive");
    if (history_every < 1) throw InvalidInputError("history interval must be positive");
    if (latent_init_std < 0.0 || latent_l2 < 0.0 || clamp_distance < 0.0) {
        throw InvalidInputError("negative latent/clamp settings");
    }
    adam.validate();
    weights.validate();
}

namespace {

// Separate streams for initialization and batch drawing.
constexpr std::uint64_t kBatchStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kLatentStream = 0xbf58476d1ce4e5b9ULL;

/// Inputs (3 x N) and regression targets (out x N) of a training set, as float.
struct PackedSet {
    Matrix inputs;
    Matrix targets;
};

PackedSet pack(const field::TrainingSet& set, Representation repr, double clamp) {
    const int out_dim = field::output_dim(repr);
    PackedSet p;
    const auto n = static_cast<Eigen::Index>(set.size());
    p.inputs.resize(3, n);
    p.targets.resize(out_dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        field::GdfSample s = set.samples[static_cast<std::size_t>(i)];
        if (clamp > 0.0) {
            const double len = s.v.norm();
            if (len > clamp) s.v *= clamp / len;
        }
        const Vec3 t = field::target_for(repr, s);
        p.inputs.col(i) = s.x.cast<float>();
        p.targets.col(i) = t.head(out_dim).cast<float>();
    }
    return p;
}

class HistoryRecorder {
public:
    HistoryRecorder(std::int64_t every, std::vector<LossRecord>& out) : every_(every), out_(out) {}

    void add(std::int64_t iteration, double loss) {
        sum_ += loss;
        if (++count_ == every_) flush(iteration);
    }
    void finish(std::int64_t last_iteration) {
        if (count_ > 0) flush(last_iteration);
    }

private:
    void flush(std::int64_t iteration) {
        out_.push_back({iteration, sum_ / static_cast<double>(count_)});
        sum_ = 0.0;
        count_ = 0;
    }
    std::int64_t every_;
    std::vector<LossRecord>& out_;
    double sum_ = 0.0;
    std::int64_t count_ = 0;
};

void check_finite(double loss, std::int64_t iteration) {
    if (!std::isfinite(loss)) {
        throw NumericalError("training diverged: non-finite loss at iteration " + std::to_string(iteration));
    }
}

}  // namespace

TrainResult train_single(const field::TrainingSet& set, MlpConfig mlp, Representation repr,
                         const TrainConfig& config) {
    if (set.empty()) throw InvalidInputError("training set is empty");
    if (mlp.spatial_dim != 3 || mlp.latent_len != 0) {
        throw InvalidInputError("single-shape training expects 3D inputs without a latent code");
    }
    const PackedSet data = pack(set, repr, config.clamp_distance);
    return train_regression(data.inputs, data.targets, mlp, repr, config);
}

TrainResult train_regression(const Matrix& inputs, const Matrix& targets, MlpConfig mlp, Representation repr,
                             const TrainConfig& config) {
    config.validate();
    if (inputs.cols() == 0 || inputs.cols() != targets.cols()) {
        throw InvalidInputError("training data is empty or inputs and targets differ in count");
    }
    if (mlp.latent_len != 0 || inputs.rows() != mlp.spatial_dim) {
        throw InvalidInputError("training inputs do not match the network's spatial dimension");
    }

    TrainResult result;
    result.field = make_field(mlp, repr, config.seed);
    if (targets.rows() != result.field.config.output_dim) {
        throw InvalidInputError("training targets do not match the representation's output width");
    }
    Mlp<float>& net = result.field.mlp;

    Adam<float> adam(net.parameter_count(), config.adam);
    std::mt19937_64 rng(config.seed ^ kBatchStream);
    std::uniform_int_distribution<Eigen::Index> pick(0, inputs.cols() - 1);

    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    Matrix x(inputs.rows(), batch);
    Matrix t(targets.rows(), batch);
    Matrix grad_out;
    Vector grad;
    Mlp<float>::Tape tape;
    HistoryRecorder history(config.history_every, result.history);

    for (std::int64_t it = 0; it < config.iterations; ++it) {
        for (Eigen::Index j = 0; j < batch; ++j) {
            const Eigen::Index i = pick(rng);
            x.col(j) = inputs.col(i);
            t.col(j) = targets.col(i);
        }
        const Matrix pred = net.forward(x, tape);
        const double loss = batch_loss<float>(repr, config.weights, pred, t, &grad_out);
        check_finite(loss, it);
        grad.setZero(net.parameter_count());
        net.backward(tape, grad_out, &grad, nullptr);
        adam.step(net.parameters(), grad,
                  scheduled_learning_rate(config.adam.learning_rate, config.adam.decay_factor, it, config.iterations));
        if (!net.parameters().allFinite()) {
            throw NumericalError("training diverged: non-finite weights at iteration " + std::to_string(it));
        }
        history.add(it, loss);
        if (config.on_progress) config.on_progress(it, loss);
    }
    history.finish(config.iterations - 1);
    return result;
}

AutoDecoderResult train_autodecoder(const std::vector<field::TrainingSet>& shapes, MlpConfig mlp,
                                    Representation repr, const TrainConfig& config) {
    config.validate();
    if (shapes.empty()) throw InvalidInputError("auto-decoder training needs at least one shape");
    if (mlp.spatial_dim != 3 || mlp.latent_len < 1) {
        throw InvalidInputError("auto-decoder training expects 3D inputs and a positive latent length");
    }
    std::vector<PackedSet> data;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        if (shapes[s].empty()) throw InvalidInputError("training set " + std::to_string(s) + " is empty");
        data.push_back(pack(shapes[s], repr, config.clamp_distance));
    }

    AutoDecoderResult result;
    result.field = make_field(mlp, repr, config.seed);
    Mlp<float>& net = result.field.mlp;
    const int latent = mlp.latent_len;
    const auto n_shapes = static_cast<Eigen::Index>(shapes.size());

    Vector codes(latent * n_shapes);
    {
        std::mt19937_64 init(config.seed ^ kLatentStream);
        std::normal_distribution<double> normal(0.0, config.latent_init_std);
        for (Eigen::Index k = 0; k < codes.size(); ++k) codes[k] = static_cast<float>(normal(init));
    }

    Adam<float> adam(net.parameter_count(), config.adam);
    Adam<float> code_adam(codes.size(), config.adam);
    std::mt19937_64 rng(config.seed ^ kBatchStream);
    std::uniform_int_distribution<Eigen::Index> pick_shape(0, n_shapes - 1);

    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    const int out_dim = field::output_dim(repr);
    Matrix x(mlp.input_dim(), batch);
    Matrix t(out_dim, batch);
    std::vector<Eigen::Index> slot_shape(static_cast<std::size_t>(batch));
    Matrix grad_out;
    Matrix grad_in;
    Vector grad;
    Vector code_grad;
    Mlp<float>::Tape tape;
    HistoryRecorder history(config.history_every, result.history);

    for (std::int64_t it = 0; it < config.iterations; ++it) {
        for (Eigen::Index j = 0; j < batch; ++j) {
            const Eigen::Index s = pick_shape(rng);
            const PackedSet& d = data[static_cast<std::size_t>(s)];
            const Eigen::Index i = std::uniform_int_distribution<Eigen::Index>(0, d.inputs.cols() - 1)(rng);
            slot_shape[static_cast<std::size_t>(j)] = s;
            x.col(j).head(3) = d.inputs.col(i);
            x.col(j).tail(latent) = codes.segment(s * latent, latent);
            t.col(j) = d.targets.col(i);
        }
        const Matrix pred = net.forward(x, tape);
        double loss = batch_loss<float>(repr, config.weights, pred, t, &grad_out);
        grad.setZero(net.parameter_count());
        net.backward(tape, grad_out, &grad, &grad_in);

        code_grad.setZero(codes.size());
        for (Eigen::Index j = 0; j < batch; ++j) {
            const Eigen::Index s = slot_shape[static_cast<std::size_t>(j)];
            code_grad.segment(s * latent, latent) += grad_in.col(j).tail(latent);
        }
        if (config.latent_l2 > 0.0) {
            const float scale = static_cast<float>(config.latent_l2 / static_cast<double>(batch));
            for (Eigen::Index j = 0; j < batch; ++j) {
                const Eigen::Index s = slot_shape[static_cast<std::size_t>(j)];
                const auto c = codes.segment(s * latent, latent);
                loss += scale * c.squaredNorm();
                code_grad.segment(s * latent, latent) += 2.0f * scale * c;
            }
        }
        check_finite(loss, it);

        const double lr =
            scheduled_learning_rate(config.adam.learning_rate, config.adam.decay_factor, it, config.iterations);
        adam.step(net.parameters(), grad, lr);
        code_adam.step(codes, code_grad, lr);
        if (!net.parameters().allFinite() || !codes.allFinite()) {
            throw NumericalError("training diverged: non-finite parameters at iteration " + std::to_string(it));
        }
        history.add(it, loss);
        if (config.on_progress) config.on_progress(it, loss);
    }
    history.finish(config.iterations - 1);

    result.latents.codes = Eigen::Map<const Matrix>(codes.data(), latent, n_shapes);
    return result;
}

field::TrainingSet pseudo_training_set(const std::vector<Vec3>& cloud, const LatentFitConfig& config) {
    if (cloud.empty()) throw InvalidInputError("point cloud is empty");
    if (config.n_queries < 1) throw InvalidInputError("latent fitting needs at least one query point");
    geometry::Aabb box;
    for (const auto& p : cloud) box.extend(p);
    const double diagonal = box.diagonal();

    geometry::Rng rng(config.seed ^ kBatchStream);
    const auto n_queries = static_cast<std::size_t>(config.n_queries);
    const std::size_t n_uniform = config.include_uniform ? n_queries / 20 : 0;
    // Cycle through the cloud in a shuffled order so every point is used
    // before any repeats.
    std::vector<Vec3> shuffled = cloud;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<Vec3> queries = geometry::perturb_points(
        shuffled, n_queries - n_uniform, {config.sigma_near[0] * diagonal, config.sigma_near[1] * diagonal}, rng);
    std::uniform_real_distribution<double> uniform(-0.55, 0.55);
    for (std::size_t i = 0; i < n_uniform; ++i) {
        Vec3 q;
        for (int a = 0; a < 3; ++a) q[a] = uniform(rng);
        queries.push_back(q);
    }

    const geometry::PointIndex index(cloud);
    field::TrainingSet set;
    set.samples.reserve(queries.size());
    for (const auto& q : queries) set.samples.push_back({q, cloud[index.nearest(q).index] - q});
    return set;
}

LatentFitResult fit_latent(const std::vector<Vec3>& cloud, const NeuralField& f, const LatentFitConfig& config) {
    if (cloud.empty()) throw InvalidInputError("point cloud is empty");
    if (f.config.latent_len < 1 || f.config.spatial_dim != 3) {
        throw InvalidInputError("latent fitting needs a 3D network with a latent input");
    }
    if (config.iterations < 0 || config.batch_size < 1) throw InvalidInputError("bad latent-fit iteration settings");
    config.adam.validate();
    config.weights.validate();

    const int latent = f.config.latent_len;
    LatentFitResult result;
    result.code.resize(latent);
    std::mt19937_64 init(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_std);
    for (int k = 0; k < latent; ++k) result.code[k] = static_cast<float>(normal(init));
    if (config.iterations == 0) return result;

    const PackedSet data = pack(pseudo_training_set(cloud, config), f.representation, 0.0);
    const Mlp<float>& net = f.mlp;
    Adam<float> adam(latent, config.adam);
    std::mt19937_64 rng(config.seed ^ (kBatchStream << 1));
    std::uniform_int_distribution<Eigen::Index> pick(0, data.inputs.cols() - 1);

    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    Matrix x(f.config.input_dim(), batch);
    Matrix t(data.targets.rows(), batch);
    Matrix grad_out;
    Matrix grad_in;
    Vector code_grad;
    Mlp<float>::Tape tape;
    HistoryRecorder history(1, result.history);

    for (std::int64_t it = 0; it < config.iterations; ++it) {
        for (Eigen::Index j = 0; j < batch; ++j) {
            const Eigen::Index i = pick(rng);
            x.col(j).head(3) = data.inputs.col(i);
            t.col(j) = data.targets.col(i);
        }
        x.bottomRows(latent) = result.code.replicate(1, batch);
        const Matrix pred = net.forward(x, tape);
        const double loss = batch_loss<float>(f.representation, config.weights, pred, t, &grad_out);
        check_finite(loss, it);
        net.backward(tape, grad_out, nullptr, &grad_in);
        code_grad = grad_in.bottomRows(latent).rowwise().sum();
        adam.step(result.code, code_grad,
                  scheduled_learning_rate(config.adam.learning_rate, config.adam.decay_factor, it, config.iterations));
        history.add(it, loss);
    }
    return result;
}

}  // namespace gdf::neural
