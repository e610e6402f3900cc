#include "gdf/neural/network.hpp"

#include <fstream>
#include <string>

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"

namespace gdf::neural {

NeuralField make_field(MlpConfig config, Representation repr, std::uint64_t seed) {
    config.output_dim = field::output_dim(repr, config.spatial_dim);
    NeuralField f;
    f.config = config;
    f.representation = repr;
    f.mlp = Mlp<float>(config);
    std::mt19937_64 rng(seed);
    f.mlp.init_he_uniform(rng);
    return f;
}

Eigen::MatrixXf to_matrix(const std::vector<Vec3>& points) {
    Eigen::MatrixXf m(3, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = points[i].cast<float>();
    return m;
}

namespace {

void check_code(const NeuralField& field, const Eigen::MatrixXf& points, const Eigen::VectorXf* code) {
    if (points.rows() != field.config.spatial_dim) {
        throw InvalidInputError("points have " + std::to_string(points.rows()) + " coordinates, network expects " +
                                std::to_string(field.config.spatial_dim));
    }
    const int latent = field.config.latent_len;
    if (latent > 0 && (!code || code->size() != latent)) {
        throw InvalidInputError("network expects a latent code of length " + std::to_string(latent));
    }
    if (latent == 0 && code && code->size() != 0) {
        throw InvalidInputError("network has no latent input");
    }
}

// Fills block columns [0, n) from points[first, first + n); remaining columns are zero.
void fill_block(const NeuralField& field, const Eigen::MatrixXf& points, const Eigen::VectorXf* code,
                Eigen::Index first, Eigen::Index n, Eigen::MatrixXf& block) {
    const int dim = field.config.spatial_dim;
    block.setZero(field.config.input_dim(), kEvalBlock);
    block.topLeftCorner(dim, n) = points.middleCols(first, n);
    if (field.config.latent_len > 0) {
        block.bottomLeftCorner(field.config.latent_len, n) = code->replicate(1, n);
    }
}

}  // namespace

Eigen::MatrixXf evaluate_outputs(const NeuralField& field, const Eigen::MatrixXf& points, const Eigen::VectorXf* code) {
    check_code(field, points, code);
    const Eigen::Index total = points.cols();
    Eigen::MatrixXf out(field.config.output_dim, total);
    Eigen::MatrixXf block;
    for (Eigen::Index first = 0; first < total; first += kEvalBlock) {
        const Eigen::Index n = std::min(kEvalBlock, total - first);
        fill_block(field, points, code, first, n, block);
        out.middleCols(first, n) = field.mlp.forward(block).leftCols(n);
    }
    return out;
}

Eigen::MatrixXf evaluate_input_gradient(const NeuralField& field, const Eigen::MatrixXf& points,
                                        const Eigen::VectorXf* code) {
    check_code(field, points, code);
    const Eigen::Index total = points.cols();
    const int dim = field.config.spatial_dim;
    Eigen::MatrixXf out(dim, total);
    Eigen::MatrixXf block;
    Eigen::MatrixXf grad_in;
    Mlp<float>::Tape tape;
    Eigen::MatrixXf seed = Eigen::MatrixXf::Zero(field.config.output_dim, kEvalBlock);
    seed.row(0).setOnes();
    for (Eigen::Index first = 0; first < total; first += kEvalBlock) {
        const Eigen::Index n = std::min(kEvalBlock, total - first);
        fill_block(field, points, code, first, n, block);
        field.mlp.forward(block, tape);
        field.mlp.backward(tape, seed, nullptr, &grad_in);
        out.middleCols(first, n) = grad_in.topLeftCorner(dim, n);
    }
    return out;
}

Eigen::VectorXf forward(const NeuralField& field, const Vec3& x, const Eigen::VectorXf* code) {
    Eigen::MatrixXf p(field.config.spatial_dim, 1);
    for (int a = 0; a < field.config.spatial_dim; ++a) p(a, 0) = static_cast<float>(x[a]);
    return evaluate_outputs(field, p, code).col(0);
}

std::vector<field::Decomposition> evaluate_distance(const NeuralField& f, const std::vector<Vec3>& points,
                                                    const Eigen::VectorXf* code) {
    if (f.config.spatial_dim != 3) throw InvalidInputError("evaluate_distance needs a 3D network");
    const Eigen::MatrixXf input = to_matrix(points);
    const Eigen::MatrixXf out = evaluate_outputs(f, input, code);
    std::vector<field::Decomposition> result(points.size());
    if (f.representation == Representation::Udf) {
        const Eigen::MatrixXf grad = evaluate_input_gradient(f, input, code);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            result[i].u = std::max(0.0, static_cast<double>(out(0, j)));
            const Vec3 g = grad.col(j).cast<double>();
            const double norm = g.norm();
            result[i].g = norm > 0.0 ? Vec3(-g / norm) : Vec3::Zero();
        }
        return result;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 o = out.col(static_cast<Eigen::Index>(i)).cast<double>();
        result[i] = field::decompose(field::vector_from_output(f.representation, points[i], o));
    }
    return result;
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    const NeuralField& f = ck.field;
    io::write_magic(out, "GDFN");
    io::write_le(out, kCheckpointVersion);
    io::write_le(out, static_cast<std::uint8_t>(f.representation));
    for (int v : {f.config.depth, f.config.width, f.config.spatial_dim, f.config.latent_len, f.config.output_dim}) {
        io::write_le(out, static_cast<std::uint32_t>(v));
    }
    io::write_le(out, static_cast<std::uint32_t>(ck.latents.count()));
    io::write_le(out, static_cast<std::uint32_t>(ck.latents.length()));
    for (int c = 0; c < ck.latents.count(); ++c) {
        for (int k = 0; k < ck.latents.length(); ++k) io::write_le(out, ck.latents.codes(k, c));
    }
    for (int l = 0; l < f.mlp.depth(); ++l) {
        const auto w = f.mlp.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) io::write_le(out, w(r, c));
        }
        const auto b = f.mlp.bias(l);
        for (Eigen::Index r = 0; r < b.size(); ++r) io::write_le(out, b[r]);
    }
    io::write_le(out, static_cast<float>(f.normalization.scale));
    for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(f.normalization.translation[a]));
    if (!out) throw InvalidInputError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    io::expect_magic(in, "GDFN");
    const auto version = io::read_le<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion) {
        throw FormatError(path.string() + ": unsupported GDFN version " + std::to_string(version));
    }
    Checkpoint ck;
    const auto repr = io::read_le<std::uint8_t>(in, "representation");
    if (repr > 2) throw FormatError(path.string() + ": bad representation byte " + std::to_string(repr));
    ck.field.representation = static_cast<Representation>(repr);
    MlpConfig& cfg = ck.field.config;
    cfg.depth = static_cast<int>(io::read_le<std::uint32_t>(in, "depth"));
    cfg.width = static_cast<int>(io::read_le<std::uint32_t>(in, "width"));
    cfg.spatial_dim = static_cast<int>(io::read_le<std::uint32_t>(in, "spatial_dim"));
    cfg.latent_len = static_cast<int>(io::read_le<std::uint32_t>(in, "latent_len"));
    cfg.output_dim = static_cast<int>(io::read_le<std::uint32_t>(in, "output_dim"));
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (cfg.output_dim != field::output_dim(ck.field.representation, cfg.spatial_dim)) {
        throw FormatError(path.string() + ": output_dim does not match representation");
    }
    const auto count = io::read_le<std::uint32_t>(in, "latent count");
    const auto length = io::read_le<std::uint32_t>(in, "latent length");
    ck.latents.codes.resize(length, count);
    for (std::uint32_t c = 0; c < count; ++c) {
        for (std::uint32_t k = 0; k < length; ++k) ck.latents.codes(k, c) = io::read_le<float>(in, "latent");
    }
    ck.field.mlp = Mlp<float>(cfg);
    for (int l = 0; l < ck.field.mlp.depth(); ++l) {
        auto w = ck.field.mlp.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = io::read_le<float>(in, "weights");
        }
        auto b = ck.field.mlp.bias(l);
        for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = io::read_le<float>(in, "biases");
    }
    ck.field.normalization.scale = io::read_le<float>(in, "normalization");
    for (int a = 0; a < 3; ++a) ck.field.normalization.translation[a] = io::read_le<float>(in, "normalization");
    return ck;
}

}  // namespace gdf::neural
