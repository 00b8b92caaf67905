#include "acda/pgm.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace acda {

void write_pgm(const std::string& path, const Tensor<double>& image) {
  Index h = 0, w = 0;
  if (image.rank() == 2) {
    h = image.extent(0);
    w = image.extent(1);
  } else if (image.rank() == 3 && image.extent(0) == 1) {
    h = image.extent(1);
    w = image.extent(2);
  } else {
    throw std::invalid_argument("write_pgm expects a [h,w] or [1,h,w] tensor");
  }
  double lo = image[0], hi = image[0];
  for (Index i = 1; i < image.size(); ++i) {
    lo = std::min(lo, image[i]);
    hi = std::max(hi, image[i]);
  }
  const double span = hi - lo;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P2\n" << w << " " << h << "\n255\n";
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      int v = 0;
      if (span > 0.0)
        v = static_cast<int>(std::lround(255.0 * (image[i * w + j] - lo) / span));
      out << std::clamp(v, 0, 255) << (j + 1 == w ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace acda
