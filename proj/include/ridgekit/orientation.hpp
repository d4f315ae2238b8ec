#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/gradient.hpp"
#include "ridgekit/image.hpp"

namespace ridgekit {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into [0, pi).
inline double wrap_axial(double a) {
  a = std::fmod(a, kPi);
  if (a < 0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

/// Wraps an orientation difference into (-pi/2, pi/2].
inline double axial_difference(double to, double from) {
  double d = std::fmod(to - from, kPi);
  if (d <= -kPi / 2) d += kPi;
  if (d > kPi / 2) d -= kPi;
  return d;
}

/// Block-wise ridge orientation. theta is the ridge tangent in [0, pi),
/// measured from +x toward +y (image rows grow downward).
struct OrientationField {
  int block = 16;
  int cols = 0;
  int rows = 0;
  int width = 0;   ///< Pixel width of the source image.
  int height = 0;  ///< Pixel height of the source image.
  std::vector<double> theta;
  std::vector<double> coherence;
  std::vector<std::uint8_t> valid;
  /// Set for blocks that stayed below the smoothing threshold.
  std::vector<std::uint8_t> low_coherence;
  /// Inter-ridge distance in pixels; 0 when it could not be measured.
  std::vector<double> period;

  OrientationField() = default;
  OrientationField(int cols_, int rows_, int block_ = 16)
      : block(block_), cols(cols_), rows(rows_), width(cols_ * block_), height(rows_ * block_) {
    const auto n = static_cast<std::size_t>(cols) * rows;
    theta.assign(n, 0.0);
    coherence.assign(n, 0.0);
    valid.assign(n, 0);
    low_coherence.assign(n, 0);
    period.assign(n, 0.0);
  }

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  bool in_grid(int r, int c) const { return r >= 0 && c >= 0 && r < rows && c < cols; }
  bool is_valid(int r, int c) const { return in_grid(r, c) && valid[index(r, c)]; }
  double theta_at(int r, int c) const { return theta[index(r, c)]; }

  /// Block under a pixel position, clamped to the grid.
  std::pair<int, int> block_of(double x, double y) const {
    int c = static_cast<int>(std::floor(x / block));
    int r = static_cast<int>(std::floor(y / block));
    return {std::clamp(r, 0, rows - 1), std::clamp(c, 0, cols - 1)};
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v;
    return n;
  }
};

struct OrientationParams {
  int block = 16;
  double min_coherence = 0.1;     ///< Validity threshold.
  double smooth_coherence = 0.25; ///< Blocks below this are repaired by smoothing.
  /// Fraction of a block's pixels that must lie inside the roi.
  double min_roi_fraction = 0.5;
};

namespace detail {

inline double bilinear(const GrayImage& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double a = img.clamped(x0, y0);
  const double b = img.clamped(x0 + 1, y0);
  const double c = img.clamped(x0, y0 + 1);
  const double d = img.clamped(x0 + 1, y0 + 1);
  return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
}

}  // namespace detail

/// Dominant spacing of the intensity profile across the ridges, from the
/// first autocorrelation peak of a 32-sample signature taken along the
/// normal of theta. Returns 0 when no peak exists in [3, 20] px.
inline double ridge_period(const GrayImage& img, double cx, double cy, double theta) {
  constexpr int kLength = 32;
  constexpr int kWidth = 16;
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  const double tx = std::cos(theta);
  const double ty = std::sin(theta);
  std::array<double, kLength> sig{};
  double mean = 0.0;
  for (int k = 0; k < kLength; ++k) {
    const double s = k - kLength / 2.0 + 0.5;
    double acc = 0.0;
    for (int j = 0; j < kWidth; ++j) {
      const double t = j - kWidth / 2.0 + 0.5;
      acc += detail::bilinear(img, cx + s * nx + t * tx, cy + s * ny + t * ty);
    }
    sig[k] = acc / kWidth;
    mean += sig[k];
  }
  mean /= kLength;
  for (auto& v : sig) v -= mean;
  double energy = 0.0;
  for (auto v : sig) energy += v * v;
  if (energy <= 1e-9) return 0.0;

  constexpr int kMinLag = 3;
  constexpr int kMaxLag = 20;
  std::array<double, kMaxLag + 2> ac{};
  for (int lag = 0; lag <= kMaxLag + 1; ++lag) {
    double s = 0.0;
    for (int k = 0; k + lag < kLength; ++k) s += sig[k] * sig[k + lag];
    ac[lag] = s / (kLength - lag);
  }
  for (int lag = kMinLag; lag <= kMaxLag; ++lag) {
    if (ac[lag] > 0.0 && ac[lag] >= ac[lag - 1] && ac[lag] >= ac[lag + 1]) {
      const double denom = ac[lag - 1] - 2 * ac[lag] + ac[lag + 1];
      const double shift = denom != 0.0 ? 0.5 * (ac[lag - 1] - ac[lag + 1]) / denom : 0.0;
      return lag + std::clamp(shift, -0.5, 0.5);
    }
  }
  return 0.0;
}

/// Squared-gradient block orientation with coherence. Blocks outside the roi
/// (when one is given) are invalid. Also fills the per-block ridge period.
inline OrientationField estimate_orientation(const GrayImage& img, const OrientationParams& params = {},
                                             const Mask* roi = nullptr) {
  const int block = params.block;
  if (block <= 0) throw InvalidArgument("estimate_orientation: block must be positive");
  OrientationField field((img.width + block - 1) / block, (img.height + block - 1) / block, block);
  field.width = img.width;
  field.height = img.height;
  if (img.empty()) return field;
  const auto grad = sobel(img);
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      double gxx = 0.0;
      double gxy = 0.0;
      double den = 0.0;
      int inside = 0;
      int total = 0;
      for (int y = r * block; y < std::min((r + 1) * block, img.height); ++y) {
        for (int x = c * block; x < std::min((c + 1) * block, img.width); ++x) {
          ++total;
          if (roi && !roi->empty() && !roi->inside(x, y)) continue;
          ++inside;
          const auto i = static_cast<std::size_t>(y) * img.width + x;
          const double gx = grad.gx[i];
          const double gy = grad.gy[i];
          gxx += gx * gx - gy * gy;
          gxy += 2 * gx * gy;
          den += gx * gx + gy * gy;
        }
      }
      const auto idx = field.index(r, c);
      if (inside < params.min_roi_fraction * total || den <= 0.0) continue;
      const double coh = std::hypot(gxx, gxy) / den;
      field.theta[idx] = wrap_axial(0.5 * std::atan2(gxy, gxx) + kPi / 2);
      field.coherence[idx] = coh;
      field.valid[idx] = coh >= params.min_coherence ? 1 : 0;
      if (field.valid[idx]) {
        field.period[idx] = ridge_period(img, (c + 0.5) * block, (r + 0.5) * block, field.theta[idx]);
      }
    }
  }
  return field;
}

/// Repairs low-coherence valid blocks with the coherence-weighted
/// doubled-angle mean of their valid 3x3 neighbors. Neighbor values are read
/// from the input field, so the result does not depend on scan order.
inline OrientationField smooth_orientation(const OrientationField& field, double threshold = 0.25) {
  OrientationField out = field;
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      const auto idx = field.index(r, c);
      if (!field.valid[idx] || field.coherence[idx] >= threshold) continue;
      double sx = 0.0;
      double sy = 0.0;
      double wsum = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || !field.is_valid(r + dr, c + dc)) continue;
          const auto j = field.index(r + dr, c + dc);
          const double w = field.coherence[j];
          sx += w * std::cos(2 * field.theta[j]);
          sy += w * std::sin(2 * field.theta[j]);
          wsum += w;
        }
      }
      if (wsum <= 0.0 || std::hypot(sx, sy) <= 1e-12) {
        out.low_coherence[idx] = 1;
        continue;
      }
      out.theta[idx] = wrap_axial(0.5 * std::atan2(sy, sx));
      out.coherence[idx] = std::max(field.coherence[idx], std::hypot(sx, sy) / wsum);
      out.low_coherence[idx] = 0;
    }
  }
  return out;
}

/// Poincare index (in turns) of the 2x2 cell whose top-left block is (r, c);
/// nullopt unless all four blocks are valid. Traversal runs in the direction
/// of increasing image-frame angle, so a field theta = arg(z - z0) / 2 has
/// index +1/2 at z0.
inline std::optional<double> poincare_index(const OrientationField& f, int r, int c) {
  const std::array<std::pair<int, int>, 4> loop{{{r, c}, {r, c + 1}, {r + 1, c + 1}, {r + 1, c}}};
  for (auto [rr, cc] : loop)
    if (!f.is_valid(rr, cc)) return std::nullopt;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    auto [r0, c0] = loop[i];
    auto [r1, c1] = loop[(i + 1) % 4];
    sum += axial_difference(f.theta_at(r1, c1), f.theta_at(r0, c0));
  }
  return sum / (2 * kPi);
}

/// Sum over valid 8-neighbors of the absolute doubled-angle difference.
inline double block_curvature(const OrientationField& f, int r, int c) {
  double s = 0.0;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if ((dr == 0 && dc == 0) || !f.is_valid(r + dr, c + dc)) continue;
      s += 2 * std::abs(axial_difference(f.theta_at(r + dr, c + dc), f.theta_at(r, c)));
    }
  return s;
}

/// Morton-interleaved 10-bit core location, bit 9 first: x4 y4 x3 y3 ... x0 y0.
class CoreCode {
 public:
  static constexpr int kBits = 10;

  constexpr CoreCode() = default;
  constexpr explicit CoreCode(std::uint16_t bits) : bits_(bits & 0x3FF) {}

  static constexpr CoreCode from_cells(unsigned qx, unsigned qy) {
    std::uint16_t b = 0;
    for (int i = 4; i >= 0; --i) {
      b = static_cast<std::uint16_t>((b << 1) | ((qx >> i) & 1u));
      b = static_cast<std::uint16_t>((b << 1) | ((qy >> i) & 1u));
    }
    return CoreCode(b);
  }

  /// Parses exactly ten '0'/'1' characters.
  static std::optional<CoreCode> parse(std::string_view s) {
    if (s.size() != kBits) return std::nullopt;
    std::uint16_t b = 0;
    for (char ch : s) {
      if (ch != '0' && ch != '1') return std::nullopt;
      b = static_cast<std::uint16_t>((b << 1) | (ch == '1'));
    }
    return CoreCode(b);
  }

  constexpr std::uint16_t value() const { return bits_; }
  constexpr bool bit(int i) const { return (bits_ >> i) & 1u; }

  std::string to_string() const {
    std::string s(kBits, '0');
    for (int i = 0; i < kBits; ++i)
      if (bit(kBits - 1 - i)) s[i] = '1';
    return s;
  }

  friend constexpr int hamming(CoreCode a, CoreCode b) { return std::popcount(static_cast<unsigned>(a.bits_ ^ b.bits_)); }
  friend constexpr bool operator==(CoreCode, CoreCode) = default;
  friend constexpr auto operator<=>(CoreCode, CoreCode) = default;

 private:
  std::uint16_t bits_ = 0;
};

inline CoreCode core_bit_code(double x, double y, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("core_bit_code: empty frame");
  if (x < 0 || y < 0 || x >= width || y >= height) throw InvalidArgument("core_bit_code: point outside frame");
  const auto qx = static_cast<unsigned>(std::floor(32.0 * x / width));
  const auto qy = static_cast<unsigned>(std::floor(32.0 * y / height));
  return CoreCode::from_cells(std::min(qx, 31u), std::min(qy, 31u));
}

enum class CoreKind { singular, arch_fallback };

struct CorePoint {
  double x = 0.0;
  double y = 0.0;
  double curvature = 0.0;
  CoreKind kind = CoreKind::singular;
  CoreCode bits;
};

inline CoreCode core_bit_code(const CorePoint& core, int width, int height) {
  return core_bit_code(core.x, core.y, width, height);
}

/// Cells with Poincare index near +1/2 (or +1 for a whorl) are candidates;
/// the one with the highest curvature wins, ties to the smallest (row, col).
/// Without candidates the field is treated as a plain arch and the block
/// with the shortest measured ridge period is used instead.
inline CorePoint find_core(const OrientationField& f) {
  if (f.valid_count() == 0) throw CoreDetectionError("core detection failed: no valid orientation blocks");
  const int w = f.width > 0 ? f.width : f.cols * f.block;
  const int h = f.height > 0 ? f.height : f.rows * f.block;

  std::optional<std::pair<int, int>> best;
  double best_curv = -1.0;
  for (int r = 0; r + 1 < f.rows; ++r) {
    for (int c = 0; c + 1 < f.cols; ++c) {
      const auto pi = poincare_index(f, r, c);
      if (!pi || *pi < 0.25) continue;
      const double curv = (block_curvature(f, r, c) + block_curvature(f, r, c + 1) +
                           block_curvature(f, r + 1, c) + block_curvature(f, r + 1, c + 1)) / 4.0;
      if (curv > best_curv) {
        best_curv = curv;
        best = {r, c};
      }
    }
  }

  CorePoint core;
  if (best) {
    core.x = std::min<double>((best->second + 1) * f.block, w - 1);
    core.y = std::min<double>((best->first + 1) * f.block, h - 1);
    core.curvature = best_curv;
    core.kind = CoreKind::singular;
  } else {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < f.valid.size(); ++i) {
      if (!f.valid[i] || f.period[i] <= 0.0) continue;
      if (!pick || f.period[i] < f.period[*pick]) pick = i;
    }
    if (!pick) {
      for (std::size_t i = 0; i < f.valid.size() && !pick; ++i)
        if (f.valid[i]) pick = i;
    }
    const int r = static_cast<int>(*pick) / f.cols;
    const int c = static_cast<int>(*pick) % f.cols;
    core.x = std::min((c + 0.5) * f.block, w - 1.0);
    core.y = std::min((r + 0.5) * f.block, h - 1.0);
    core.curvature = block_curvature(f, r, c);
    core.kind = CoreKind::arch_fallback;
  }
  core.bits = core_bit_code(core, w, h);
  return core;
}

/// One line per block: `row col theta coherence valid`.
inline void dump_orientation(const OrientationField& f, std::ostream& os) {
  const auto flags = os.flags();
  os.setf(std::ios::fixed);
  os.precision(6);
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      const auto i = f.index(r, c);
      os << r << ' ' << c << ' ' << f.theta[i] << ' ' << f.coherence[i] << ' ' << int(f.valid[i]) << '\n';
    }
  os.flags(flags);
}

}  // namespace ridgekit
