#pragma once

#include <string>

#include "acda/tensor.hpp"

namespace acda {

/// Writes an ASCII PGM (P2) image, linearly rescaling [min, max] to [0, 255].
/// A constant image maps to 0.
void write_pgm(const std::string& path, const Tensor<double>& image);

inline void write_pgm(const std::string& path, const Tensor<float>& image) {
  write_pgm(path, image.cast<double>());
}

}  // namespace acda
