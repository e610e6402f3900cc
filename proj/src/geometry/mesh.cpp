#include "gdf/geometry/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "gdf/common/binary_io.hpp"
#include "gdf/common/error.hpp"

namespace gdf::geometry {

namespace fs = std::filesystem;

double TriangleMesh::triangle_area(std::size_t t) const {
    return 0.5 * (corner(t, 1) - corner(t, 0)).cross(corner(t, 2) - corner(t, 0)).norm();
}

Vec3 TriangleMesh::triangle_normal(std::size_t t) const {
    const Vec3 n = (corner(t, 1) - corner(t, 0)).cross(corner(t, 2) - corner(t, 0));
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriangleMesh::total_area() const {
    double area = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) area += triangle_area(t);
    return area;
}

Aabb TriangleMesh::bounds() const {
    Aabb box;
    for (const auto& v : vertices) box.extend(v);
    return box;
}

void TriangleMesh::compute_face_normals() {
    face_normals.resize(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) face_normals[t] = triangle_normal(t);
}

std::size_t drop_degenerate_faces(TriangleMesh& mesh) {
    const Aabb box = mesh.bounds();
    const double longest = box.valid() ? box.extent().maxCoeff() : 0.0;
    const double min_area = 1e-12 * longest * longest;
    const auto nv = static_cast<std::uint32_t>(mesh.vertices.size());

    std::vector<Triangle> kept;
    std::vector<Vec3> kept_normals;
    kept.reserve(mesh.triangles.size());
    const bool has_normals = mesh.face_normals.size() == mesh.triangles.size();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri[0] >= nv || tri[1] >= nv || tri[2] >= nv) continue;
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
        if (!(mesh.triangle_area(t) > min_area)) continue;
        kept.push_back(tri);
        if (has_normals) kept_normals.push_back(mesh.face_normals[t]);
    }
    const std::size_t dropped = mesh.triangles.size() - kept.size();
    mesh.triangles = std::move(kept);
    mesh.face_normals = has_normals ? std::move(kept_normals) : std::vector<Vec3>{};
    return dropped;
}

namespace {

std::string lower_ext(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& msg) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

// Parses "12", "12/3", "12//4", "-1/2/3" -> 0-based vertex index.
std::uint32_t parse_obj_index(std::string_view token, std::size_t nverts, const fs::path& path,
                              std::size_t line) {
    const auto slash = token.find('/');
    const std::string_view head = token.substr(0, slash);
    long long idx = 0;
    const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
    if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
        parse_fail(path, line, "bad face index '" + std::string(token) + "'");
    }
    const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(nverts) + idx;
    if (resolved < 0 || resolved >= static_cast<long long>(nverts)) {
        parse_fail(path, line, "face index " + std::to_string(idx) + " out of range");
    }
    return static_cast<std::uint32_t>(resolved);
}

TriangleMesh read_obj(const fs::path& path, bool vertices_only) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    TriangleMesh mesh;
    std::string raw;
    std::size_t line_no = 0;
    std::vector<std::uint32_t> poly;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream line(raw);
        std::string tag;
        if (!(line >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(line >> p.x() >> p.y() >> p.z())) parse_fail(path, line_no, "bad vertex record");
            mesh.vertices.push_back(p);
        } else if (tag == "f" && !vertices_only) {
            poly.clear();
            std::string tok;
            while (line >> tok) poly.push_back(parse_obj_index(tok, mesh.vertices.size(), path, line_no));
            if (poly.size() < 3) parse_fail(path, line_no, "face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    return mesh;
}

enum class PlyFormat { Ascii, BinaryLE };

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

std::size_t ply_type_size(const std::string& type) {
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
        type == "float32")
        return 4;
    if (type == "double" || type == "float64") return 8;
    return 0;
}

double read_ply_binary_scalar(std::istream& in, const std::string& type) {
    if (type == "char" || type == "int8") return io::read_le<std::int8_t>(in, "ply");
    if (type == "uchar" || type == "uint8") return io::read_le<std::uint8_t>(in, "ply");
    if (type == "short" || type == "int16") return io::read_le<std::int16_t>(in, "ply");
    if (type == "ushort" || type == "uint16") return io::read_le<std::uint16_t>(in, "ply");
    if (type == "int" || type == "int32") return io::read_le<std::int32_t>(in, "ply");
    if (type == "uint" || type == "uint32") return io::read_le<std::uint32_t>(in, "ply");
    if (type == "float" || type == "float32") return io::read_le<float>(in, "ply");
    if (type == "double" || type == "float64") return io::read_le<double>(in, "ply");
    throw FormatError("unsupported PLY type " + type);
}

TriangleMesh read_ply(const fs::path& path, bool vertices_only) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path.string());

    std::string raw;
    std::size_t line_no = 0;
    std::getline(in, raw);
    ++line_no;
    if (raw.rfind("ply", 0) != 0) parse_fail(path, line_no, "missing 'ply' header");

    PlyFormat format = PlyFormat::Ascii;
    std::vector<PlyElement> elements;
    bool header_done = false;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::istringstream line(raw);
        std::string tag;
        line >> tag;
        if (tag == "format") {
            std::string fmt;
            line >> fmt;
            if (fmt == "ascii") format = PlyFormat::Ascii;
            else if (fmt == "binary_little_endian") format = PlyFormat::BinaryLE;
            else parse_fail(path, line_no, "unsupported PLY format " + fmt);
        } else if (tag == "element") {
            PlyElement el;
            if (!(line >> el.name >> el.count)) parse_fail(path, line_no, "bad element line");
            elements.push_back(el);
        } else if (tag == "property") {
            if (elements.empty()) parse_fail(path, line_no, "property before element");
            PlyProperty prop;
            std::string type;
            line >> type;
            if (type == "list") {
                prop.is_list = true;
                line >> prop.count_type >> prop.type >> prop.name;
            } else {
                prop.type = type;
                line >> prop.name;
            }
            if (ply_type_size(prop.type) == 0) parse_fail(path, line_no, "unsupported property type");
            elements.back().properties.push_back(prop);
        } else if (tag == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) parse_fail(path, line_no, "missing end_header");

    TriangleMesh mesh;
    std::vector<double> poly;
    for (const auto& el : elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face" && !vertices_only;
        int xyz[3] = {-1, -1, -1};
        int index_prop = -1;
        for (int p = 0; p < static_cast<int>(el.properties.size()); ++p) {
            const auto& name = el.properties[p].name;
            if (name == "x") xyz[0] = p;
            if (name == "y") xyz[1] = p;
            if (name == "z") xyz[2] = p;
            if ((name == "vertex_indices" || name == "vertex_index") && el.properties[p].is_list) index_prop = p;
        }
        if (is_vertex && (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0)) {
            throw FormatError(path.string() + ": vertex element lacks x/y/z");
        }
        for (std::size_t i = 0; i < el.count; ++i) {
            std::istringstream ascii_line;
            if (format == PlyFormat::Ascii) {
                if (!std::getline(in, raw)) parse_fail(path, line_no, "truncated PLY body");
                ++line_no;
                ascii_line.str(raw);
            }
            auto read_scalar = [&](const std::string& type) -> double {
                if (format == PlyFormat::BinaryLE) return read_ply_binary_scalar(in, type);
                double v = 0.0;
                if (!(ascii_line >> v)) parse_fail(path, line_no, "bad PLY value");
                return v;
            };
            Vec3 p = Vec3::Zero();
            for (int k = 0; k < static_cast<int>(el.properties.size()); ++k) {
                const auto& prop = el.properties[k];
                if (prop.is_list) {
                    const auto n = static_cast<std::size_t>(read_scalar(prop.count_type));
                    poly.resize(n);
                    for (std::size_t j = 0; j < n; ++j) poly[j] = read_scalar(prop.type);
                    if (is_face && k == index_prop) {
                        if (n < 3) parse_fail(path, line_no, "face with fewer than 3 vertices");
                        for (std::size_t j = 0; j < n; ++j) {
                            if (poly[j] < 0 || poly[j] >= static_cast<double>(mesh.vertices.size())) {
                                parse_fail(path, line_no, "face index out of range");
                            }
                        }
                        for (std::size_t j = 1; j + 1 < n; ++j) {
                            mesh.triangles.push_back({static_cast<std::uint32_t>(poly[0]),
                                                      static_cast<std::uint32_t>(poly[j]),
                                                      static_cast<std::uint32_t>(poly[j + 1])});
                        }
                    }
                } else {
                    const double v = read_scalar(prop.type);
                    for (int a = 0; a < 3; ++a) {
                        if (k == xyz[a]) p[a] = v;
                    }
                }
            }
            if (is_vertex) mesh.vertices.push_back(p);
        }
    }
    return mesh;
}

TriangleMesh read_any(const fs::path& path, bool vertices_only) {
    if (!fs::exists(path)) throw InvalidInputError("no such file: " + path.string());
    const std::string ext = lower_ext(path);
    if (ext == ".obj") return read_obj(path, vertices_only);
    if (ext == ".ply") return read_ply(path, vertices_only);
    throw InvalidInputError("unsupported mesh format: " + path.string());
}

}  // namespace

LoadedMesh load_mesh(const fs::path& path) {
    LoadedMesh out;
    out.mesh = read_any(path, false);
    out.report.degenerate_dropped = drop_degenerate_faces(out.mesh);
    if (out.mesh.empty()) throw InvalidInputError("mesh has no valid triangles: " + path.string());
    out.report.vertices = out.mesh.vertex_count();
    out.report.triangles = out.mesh.triangle_count();
    return out;
}

std::vector<Vec3> load_point_cloud(const fs::path& path) {
    if (lower_ext(path) == ".xyz") {
        std::ifstream in(path);
        if (!in) throw InvalidInputError("cannot open " + path.string());
        std::vector<Vec3> points;
        std::string raw;
        std::size_t line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::istringstream line(raw);
            Vec3 p;
            if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (!(line >> p.x() >> p.y() >> p.z())) parse_fail(path, line_no, "bad point record");
            points.push_back(p);
        }
        return points;
    }
    return read_any(path, true).vertices;
}

void save_obj(const TriangleMesh& mesh, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.precision(9);
    for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void save_ply(const TriangleMesh& mesh, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertices.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << mesh.triangles.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices) {
        for (int a = 0; a < 3; ++a) io::write_le(out, static_cast<float>(v[a]));
    }
    for (const auto& t : mesh.triangles) {
        io::write_le(out, std::uint8_t{3});
        for (int k = 0; k < 3; ++k) io::write_le(out, static_cast<std::int32_t>(t[k]));
    }
}

void save_mesh(const TriangleMesh& mesh, const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".obj") return save_obj(mesh, path);
    if (ext == ".ply") return save_ply(mesh, path);
    throw InvalidInputError("unsupported mesh output format: " + path.string());
}

std::pair<TriangleMesh, NormalizeTransform> normalize_mesh(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw InvalidInputError("cannot normalize an empty mesh");
    const Aabb box = mesh.bounds();
    const double longest = box.extent().maxCoeff();
    if (!(longest > 0.0)) throw InvalidInputError("cannot normalize a zero-extent mesh");
    NormalizeTransform t;
    t.scale = 1.0 / longest;
    t.translation = -box.center();
    return {apply_transform(mesh, t), t};
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const NormalizeTransform& t) {
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = t.apply(v);
    return out;
}

}  // namespace gdf::geometry
