#include "did/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace did {

namespace {

// Next whitespace-delimited header token, skipping '#' comment lines.
std::string next_token(std::istream& is) {
    std::string tok;
    for (;;) {
        const int c = is.get();
        if (c == EOF) {
            if (tok.empty()) throw std::runtime_error("netpbm: truncated header");
            return tok;
        }
        if (c == '#') {
            if (!tok.empty()) {
                is.unget();
                return tok;
            }
            std::string line;
            std::getline(is, line);
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
}

std::size_t parse_extent(const std::string& tok, const std::string& what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("netpbm: bad " + what + " '" + tok + "'");
    }
    if (pos != tok.size() || v == 0)
        throw std::runtime_error("netpbm: bad " + what + " '" + tok + "'");
    return static_cast<std::size_t>(v);
}

unsigned char quantize(double v) {
    const double clamped = std::min(1.0, std::max(0.0, v));
    return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

} // namespace

Tensor read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_ppm: cannot open " + path);
    if (next_token(is) != "P6") throw std::runtime_error("read_ppm: bad magic in " + path);
    const std::size_t w = parse_extent(next_token(is), "width");
    const std::size_t h = parse_extent(next_token(is), "height");
    const std::size_t maxval = parse_extent(next_token(is), "maxval");
    if (maxval != 255)
        throw std::runtime_error("read_ppm: unsupported maxval " + std::to_string(maxval) +
                                 " in " + path);
    // The header terminator was the single whitespace byte consumed by
    // next_token; payload starts immediately.
    std::vector<unsigned char> bytes(h * w * 3);
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(is.gcount()) != bytes.size())
        throw std::runtime_error("read_ppm: truncated payload in " + path);
    Tensor image({h, w, 3});
    for (std::size_t i = 0; i < bytes.size(); ++i)
        image(i) = static_cast<double>(bytes[i]) / 255.0;
    return image;
}

void write_ppm(const Tensor& image, const std::string& path) {
    if (image.rank() != 3 || image.extent(2) != 3)
        throw std::invalid_argument("write_ppm: H×W×3 image required, got " +
                                    shape_string(image));
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
    os << "P6\n" << image.extent(1) << " " << image.extent(0) << "\n255\n";
    std::vector<unsigned char> bytes(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) bytes[i] = quantize(image(i));
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write_ppm: write failed for " + path);
}

void write_pgm(const Tensor& map, const std::string& path) {
    if (map.rank() != 2)
        throw std::invalid_argument("write_pgm: H×W map required, got " + shape_string(map));
    double lo = map(0), hi = map(0);
    for (std::size_t i = 0; i < map.size(); ++i) {
        lo = std::min(lo, map.data()[i]);
        hi = std::max(hi, map.data()[i]);
    }
    std::vector<unsigned char> bytes(map.size());
    if (hi > lo) {
        for (std::size_t i = 0; i < map.size(); ++i)
            bytes[i] =
                static_cast<unsigned char>(std::lround((map.data()[i] - lo) / (hi - lo) * 255.0));
    } else {
        std::fill(bytes.begin(), bytes.end(), static_cast<unsigned char>(128));
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
    os << "P5\n" << map.extent(1) << " " << map.extent(0) << "\n255\n";
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write_pgm: write failed for " + path);
}

} // namespace did
