#include "fsfbmc/types.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fsfbmc {

static_assert(std::endian::native == std::endian::little,
              "complex64 export assumes a little-endian host");

void write_complex64(const std::string& path, const cd* data, std::size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    std::vector<float> buf(2 * count);
    for (std::size_t i = 0; i < count; ++i) {
        buf[2 * i] = static_cast<float>(data[i].real());
        buf[2 * i + 1] = static_cast<float>(data[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<cd> read_complex64(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + path);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % (2 * sizeof(float)) != 0)
        throw std::runtime_error(path + " is not a complex64 file");
    in.seekg(0);
    std::vector<float> buf(bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("short read from " + path);
    std::vector<cd> out(buf.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cd(buf[2 * i], buf[2 * i + 1]);
    return out;
}

}  // namespace fsfbmc
