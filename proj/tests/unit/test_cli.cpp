#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "gdf/common/binary_io.hpp"
#include "gdf/field/gdf.hpp"
#include "gdf/geometry/mesh.hpp"

namespace fs = std::filesystem;
using namespace gdf;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run gdf_cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(GDF_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "stdout.txt");
    r.err = slurp(dir / "stderr.txt");
    return r;
}

std::size_t count_lines(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Writes a small planar patch and its sample cache into dir.
void prepare(const fs::path& dir) {
    geometry::save_obj(fixtures::planar_patch(8, 0.4, 0.05), dir / "patch.obj");
    const auto r = gdf_cli("sample --mesh " + (dir / "patch.obj").string() + " --out " + (dir / "patch.gdfs").string() +
                               " --near 1000 --uniform 50 --seed 3",
                           dir);
    REQUIRE(r.code == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sample writes the requested number of records and a manifest") {
    const auto dir = fixtures::scratch_dir("cli_sample");
    prepare(dir);
    CHECK(field::read_sample_cache(dir / "patch.gdfs").size() == 1050);
    const auto manifest = slurp(dir / "patch.gdfs.manifest.json");
    CHECK(manifest.find("\"command\"") != std::string::npos);
    CHECK(manifest.find("fnv1a64:") != std::string::npos);
    CHECK(manifest.find("\"seed\": 3") != std::string::npos);

    const auto r = gdf_cli("sample --mesh " + (dir / "patch.obj").string() + " --out " + (dir / "b.gdfs").string() +
                               " --near 100 --uniform 5 --normalized-mesh " + (dir / "patch_norm.ply").string(),
                           dir);
    REQUIRE(r.code == 0);
    const auto b = geometry::load_mesh(dir / "patch_norm.ply").mesh.bounds();
    CHECK((b.hi - b.lo).maxCoeff() == doctest::Approx(1.0));
    CHECK((b.hi + b.lo).norm() < 1e-6);
}

TEST_CASE("missing inputs exit with code 2 and name the path") {
    const auto dir = fixtures::scratch_dir("cli_missing");
    const auto r = gdf_cli("sample --mesh /nonexistent/shape.obj --out " + (dir / "x.gdfs").string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("/nonexistent/shape.obj") != std::string::npos);
    CHECK(gdf_cli("frobnicate", dir).code == 2);
    CHECK(gdf_cli("fit --samples " + (dir / "x.gdfs").string(), dir).code == 2);
}

TEST_CASE("fit is reproducible and zero iterations still write a checkpoint") {
    const auto dir = fixtures::scratch_dir("cli_fit");
    prepare(dir);
    const std::string base = "fit --samples " + (dir / "patch.gdfs").string() + " --depth 3 --width 16 --batch 64";
    REQUIRE(gdf_cli(base + " --iters 0 --out " + (dir / "zero.gdfn").string(), dir).code == 0);
    CHECK(fs::file_size(dir / "zero.gdfn") > 0);
    REQUIRE(gdf_cli(base + " --iters 20 --seed 4 --out " + (dir / "a.gdfn").string(), dir).code == 0);
    REQUIRE(gdf_cli(base + " --iters 20 --seed 4 --out " + (dir / "b.gdfn").string(), dir).code == 0);
    REQUIRE(gdf_cli(base + " --iters 20 --seed 5 --out " + (dir / "c.gdfn").string(), dir).code == 0);
    CHECK(io::fnv1a_file(dir / "a.gdfn") == io::fnv1a_file(dir / "b.gdfn"));
    CHECK(io::fnv1a_file(dir / "a.gdfn") != io::fnv1a_file(dir / "c.gdfn"));
    CHECK(fs::exists(dir / "a.gdfn.manifest.json"));
}

TEST_CASE("config files fill in options the command line leaves unset") {
    const auto dir = fixtures::scratch_dir("cli_config");
    prepare(dir);
    fixtures::write_text(dir / "fit.cfg", "# training\niters = 7\nbatch=32\ndepth = 3\nwidth = 8\n");
    const std::string base = "fit --samples " + (dir / "patch.gdfs").string() + " --config " +
                             (dir / "fit.cfg").string() + " --out " + (dir / "m.gdfn").string();
    REQUIRE(gdf_cli(base + " --history " + (dir / "h1.csv").string(), dir).code == 0);
    CHECK(count_lines(dir / "h1.csv") == 1 + 7);
    REQUIRE(gdf_cli(base + " --iters 3 --history " + (dir / "h2.csv").string(), dir).code == 0);
    CHECK(count_lines(dir / "h2.csv") == 1 + 3);
    CHECK(slurp(dir / "m.gdfn.manifest.json").find("3") != std::string::npos);

    fixtures::write_text(dir / "bad.cfg", "iters = 2\nbogus = 1\n");
    const auto r = gdf_cli("fit --samples " + (dir / "patch.gdfs").string() + " --config " +
                               (dir / "bad.cfg").string() + " --out " + (dir / "n.gdfn").string(),
                           dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.cfg:2") != std::string::npos);
}

TEST_CASE("eval of a mesh against itself") {
    const auto dir = fixtures::scratch_dir("cli_eval");
    geometry::save_obj(fixtures::hemisphere_patch(), dir / "h.obj");
    const std::string args = "eval --mesh " + (dir / "h.obj").string() + " --gt " + (dir / "h.obj").string() +
                             " --samples 2000 --method self --csv " + (dir / "r.csv").string();
    REQUIRE(gdf_cli(args, dir).code == 0);
    REQUIRE(gdf_cli(args, dir).code == 0);
    std::istringstream csv(slurp(dir / "r.csv"));
    std::string header, row1, row2;
    std::getline(csv, header);
    std::getline(csv, row1);
    std::getline(csv, row2);
    CHECK(header == "method,shape,cd_x1e4,nc_pct,dist_err,grad_err,n_samples,seed");
    CHECK(row1 == "self,h,0.000000,100.0000,,,2000,0");
    CHECK(row1 == row2);
}

TEST_CASE("fit, mesh and eval chain on a planar patch") {
    const auto dir = fixtures::scratch_dir("cli_chain");
    prepare(dir);
    REQUIRE(gdf_cli("fit --samples " + (dir / "patch.gdfs").string() +
                        " --depth 3 --width 32 --iters 200 --batch 256 --lr 1e-3 --out " + (dir / "p.gdfn").string(),
                    dir)
                .code == 0);
    const auto r = gdf_cli("mesh --checkpoint " + (dir / "p.gdfn").string() + " --res 32 --out " +
                               (dir / "p.ply").string() + " --dump-grid " + (dir / "p.gdfg").string(),
                           dir);
    REQUIRE(r.code == 0);
    CHECK(fs::file_size(dir / "p.ply") > 0);
    CHECK(fs::file_size(dir / "p.gdfg") == 4 + 4 + 12 + 24 + 33 * 33 * 33 * 16);
    REQUIRE(gdf_cli("mesh --grid " + (dir / "p.gdfg").string() + " --out " + (dir / "q.ply").string(), dir).code == 0);
    // The dump stores bounds as float32, so vertices may move by rounding.
    const auto from_net = geometry::load_mesh(dir / "p.ply").mesh;
    const auto from_dump = geometry::load_mesh(dir / "q.ply").mesh;
    REQUIRE(from_net.vertex_count() == from_dump.vertex_count());
    CHECK(from_net.triangles == from_dump.triangles);
    for (std::size_t i = 0; i < from_net.vertex_count(); ++i) {
        CHECK((from_net.vertices[i] - from_dump.vertices[i]).norm() < 1e-6);
    }
    CHECK(gdf_cli("mesh --grid " + (dir / "p.gdfg").string() + " --checkpoint " + (dir / "p.gdfn").string() +
                      " --out " + (dir / "r.ply").string(),
                  dir)
              .code == 2);
    const auto e = gdf_cli("eval --checkpoint " + (dir / "p.gdfn").string() + " --gt " + (dir / "patch.obj").string() +
                               " --res 32 --csv " + (dir / "e.csv").string(),
                           dir);
    REQUIRE(e.code == 0);
    CHECK(e.out.find("grad_err") != std::string::npos);
}

}
