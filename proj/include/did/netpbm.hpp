#pragma once

#include <string>

#include "did/tensor.hpp"

namespace did {

// Binary PPM (P6, maxval 255). Bytes scale to [0,1]; header comments allowed.
Tensor read_ppm(const std::string& path);

// Values clamped to [0,1] and quantized to bytes.
void write_ppm(const Tensor& image, const std::string& path);

// Min-max normalizes an H×W map to [0,255] (constant map -> mid-gray 128)
// and writes binary PGM (P5).
void write_pgm(const Tensor& map, const std::string& path);

} // namespace did
