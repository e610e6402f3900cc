#include <atomic>
#include <fstream>

#include "gdf/common/binary_io.hpp"
#include "gdf/common/parallel.hpp"

namespace gdf {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n) { g_threads = n == 0 ? 1 : n; }
unsigned thread_count() { return g_threads; }

namespace io {

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

}  // namespace io
}  // namespace gdf
