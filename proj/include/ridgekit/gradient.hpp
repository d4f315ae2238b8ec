#pragma once

#include <cmath>
#include <vector>

#include "ridgekit/image.hpp"

namespace ridgekit {

/// Per-pixel Sobel responses, x to the right and y downward.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;

  double magnitude(int x, int y) const {
    const auto i = static_cast<std::size_t>(y) * width + x;
    return std::hypot(gx[i], gy[i]);
  }
};

inline GradientField sobel(const GrayImage& img) {
  GradientField g;
  g.width = img.width;
  g.height = img.height;
  g.gx.assign(img.pixels.size(), 0.0);
  g.gy.assign(img.pixels.size(), 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<double>(img.clamped(x + dx, y + dy)); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const auto i = static_cast<std::size_t>(y) * img.width + x;
      g.gx[i] = gx;
      g.gy[i] = gy;
    }
  }
  return g;
}

}  // namespace ridgekit
