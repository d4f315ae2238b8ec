#pragma once

// Single-pass 5x5-window minutiae detection over a thinned ridge map, plus
// the post-processing that drops border, broken-ridge and spur minutiae.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/orientation.hpp"

namespace ridgekit {

enum class MinutiaKind { termination, bifurcation };
enum class WindowClass { termination, bifurcation, none };

inline std::string_view to_string(MinutiaKind k) { return k == MinutiaKind::termination ? "termination" : "bifurcation"; }

struct Minutia {
  MinutiaKind kind = MinutiaKind::termination;
  int x = 0;
  int y = 0;
  double angle = 0.0;  ///< radians in [0, 2pi)
  friend bool operator==(const Minutia&, const Minutia&) = default;
};

struct RejectedMinutia {
  int x = 0;
  int y = 0;
  std::string reason;
  friend bool operator==(const RejectedMinutia&, const RejectedMinutia&) = default;
};

struct MinutiaeSet {
  std::vector<Minutia> accepted;
  std::vector<RejectedMinutia> rejected;

  std::size_t count(MinutiaKind k) const {
    return static_cast<std::size_t>(std::count_if(accepted.begin(), accepted.end(), [k](const Minutia& m) { return m.kind == k; }));
  }
};

/// 5x5 patch, row-major, index (dy + 2) * 5 + (dx + 2).
using Window5 = std::array<std::uint8_t, 25>;

inline constexpr std::uint8_t& cell(Window5& w, int dx, int dy) { return w[(dy + 2) * 5 + (dx + 2)]; }
inline constexpr std::uint8_t cell(const Window5& w, int dx, int dy) { return w[(dy + 2) * 5 + (dx + 2)]; }

/// Outer ring of the window in cyclic order, starting top-left, clockwise on screen.
inline constexpr std::array<std::pair<int, int>, 16> kPerimeter{{{-2, -2}, {-1, -2}, {0, -2}, {1, -2}, {2, -2},
                                                                 {2, -1},  {2, 0},   {2, 1},  {2, 2},  {1, 2},
                                                                 {0, 2},   {-1, 2},  {-2, 2}, {-2, 1}, {-2, 0},
                                                                 {-2, -1}}};

/// Maximal cyclic runs of unit pixels on the outer ring.
inline int perimeter_runs(const Window5& w) {
  int runs = 0;
  int ones = 0;
  for (std::size_t i = 0; i < kPerimeter.size(); ++i) {
    const auto [x0, y0] = kPerimeter[i];
    const auto [x1, y1] = kPerimeter[(i + 1) % kPerimeter.size()];
    ones += cell(w, x0, y0);
    if (!cell(w, x0, y0) && cell(w, x1, y1)) ++runs;
  }
  if (runs == 0 && ones > 0) runs = 1;
  return runs;
}

/// Unit pixels in the window, center excluded.
inline int window_count(const Window5& w) {
  int p = 0;
  for (auto v : w) p += v;
  return p - cell(w, 0, 0);
}

/// termination iff the count is 2; bifurcation iff the count is 6 and the
/// ring holds exactly three separate branches.
inline WindowClass classify_window(const Window5& w) {
  if (!cell(w, 0, 0)) throw InvalidArgument("classify_window: center pixel is not a ridge pixel");
  const int p = window_count(w);
  if (p == 2) return WindowClass::termination;
  if (p == 6 && perimeter_runs(w) == 3) return WindowClass::bifurcation;
  return WindowClass::none;
}

inline Window5 window_at(const BinaryImage& img, int x, int y) {
  Window5 w{};
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) cell(w, dx, dy) = img.get(x + dx, y + dy);
  return w;
}

namespace detail {

inline double wrap_two_pi(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  return a;
}

inline double termination_angle(const Window5& w) {
  double sx = 0.0;
  double sy = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      if ((dx || dy) && cell(w, dx, dy)) {
        sx += dx;
        sy += dy;
      }
  return wrap_two_pi(std::atan2(sy, sx));
}

// Bisector of the two branches that are angularly closest.
inline double bifurcation_angle(const Window5& w) {
  std::vector<double> branch;
  const auto n = kPerimeter.size();
  std::size_t start = 0;
  while (start < n && cell(w, kPerimeter[start].first, kPerimeter[start].second)) ++start;
  if (start == n) return 0.0;
  double sx = 0.0;
  double sy = 0.0;
  int len = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto [x, y] = kPerimeter[(start + k) % n];
    if (cell(w, x, y)) {
      sx += x;
      sy += y;
      ++len;
    } else if (len) {
      branch.push_back(std::atan2(sy, sx));
      sx = sy = 0.0;
      len = 0;
    }
  }
  if (branch.size() < 2) return branch.empty() ? 0.0 : wrap_two_pi(branch[0]);
  double best_sep = 10.0;
  double best = 0.0;
  for (std::size_t i = 0; i < branch.size(); ++i)
    for (std::size_t j = i + 1; j < branch.size(); ++j) {
      double d = wrap_two_pi(branch[j] - branch[i]);
      if (d > kPi) d = 2 * kPi - d;
      if (d < best_sep) {
        best_sep = d;
        best = std::atan2(std::sin(branch[i]) + std::sin(branch[j]), std::cos(branch[i]) + std::cos(branch[j]));
      }
    }
  return wrap_two_pi(best);
}

}  // namespace detail

/// Classifies every ridge pixel at least 2 px from the frame. Detections of the
/// same kind within Chebyshev distance 2 of an earlier one are folded into it.
inline MinutiaeSet extract_minutiae(const BinaryImage& skeleton) {
  MinutiaeSet out;
  for (int y = 2; y + 2 < skeleton.height; ++y) {
    for (int x = 2; x + 2 < skeleton.width; ++x) {
      if (!skeleton.at(x, y)) continue;
      const auto w = window_at(skeleton, x, y);
      const auto cls = classify_window(w);
      if (cls == WindowClass::none) {
        const int p = window_count(w);
        if (p == 6) out.rejected.push_back({x, y, "position"});
        else if (p >= 7) out.rejected.push_back({x, y, "dense"});
        continue;
      }
      const auto kind = cls == WindowClass::termination ? MinutiaKind::termination : MinutiaKind::bifurcation;
      const bool merged = std::any_of(out.accepted.begin(), out.accepted.end(), [&](const Minutia& m) {
        return m.kind == kind && std::abs(m.x - x) <= 2 && std::abs(m.y - y) <= 2;
      });
      if (merged) continue;
      const double angle = kind == MinutiaKind::termination ? detail::termination_angle(w) : detail::bifurcation_angle(w);
      out.accepted.push_back({kind, x, y, angle});
    }
  }
  return out;
}

struct FalseMinutiaeParams {
  double d_min = 6.0;
  double margin = 8.0;
  double opposed_tolerance = kPi / 6;
};

/// Mask covering the whole frame.
inline Mask full_mask(int width, int height) { return Mask(width, height, 1); }

/// Moves to `rejected`: minutiae within `margin` of the roi boundary,
/// both ends of a broken ridge (facing terminations closer than d_min) and
/// the termination of a termination-bifurcation spur closer than d_min.
inline MinutiaeSet remove_false(const MinutiaeSet& set, const Mask& roi, const FalseMinutiaeParams& params = {}) {
  MinutiaeSet out;
  out.rejected = set.rejected;
  const auto n = set.accepted.size();
  std::vector<const char*> reason(n, nullptr);

  const int reach = static_cast<int>(std::ceil(params.margin));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = set.accepted[i];
    for (int dy = -reach; dy <= reach && !reason[i]; ++dy)
      for (int dx = -reach; dx <= reach; ++dx) {
        if (dx * dx + dy * dy > params.margin * params.margin) continue;
        if (!roi.inside(m.x + dx, m.y + dy)) {
          reason[i] = "border";
          break;
        }
      }
  }

  auto dist = [&](std::size_t i, std::size_t j) {
    return std::hypot(set.accepted[i].x - set.accepted[j].x, set.accepted[i].y - set.accepted[j].y);
  };
  std::vector<const char*> pair_reason(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    if (reason[i] || set.accepted[i].kind != MinutiaKind::termination) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (reason[j] || set.accepted[j].kind != MinutiaKind::termination) continue;
      if (dist(i, j) >= params.d_min) continue;
      double d = detail::wrap_two_pi(set.accepted[i].angle - set.accepted[j].angle);
      if (std::abs(d - kPi) <= params.opposed_tolerance) {
        pair_reason[i] = "broken-ridge";
        pair_reason[j] = "broken-ridge";
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (reason[i] || pair_reason[i] || set.accepted[i].kind != MinutiaKind::termination) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (reason[j] || set.accepted[j].kind != MinutiaKind::bifurcation) continue;
      if (dist(i, j) < params.d_min) {
        pair_reason[i] = "spur";
        break;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const char* why = reason[i] ? reason[i] : pair_reason[i];
    if (why) out.rejected.push_back({set.accepted[i].x, set.accepted[i].y, why});
    else out.accepted.push_back(set.accepted[i]);
  }
  return out;
}

inline std::size_t true_minutiae_count(const MinutiaeSet& set) { return set.accepted.size(); }

/// `kind x y angle_deg` per accepted minutia, then `# x y reason` per rejection.
inline void dump_minutiae(const MinutiaeSet& set, std::ostream& os) {
  const auto flags = os.flags();
  os.setf(std::ios::fixed);
  os.precision(2);
  for (const auto& m : set.accepted) os << to_string(m.kind) << ' ' << m.x << ' ' << m.y << ' ' << m.angle * 180.0 / kPi << '\n';
  for (const auto& r : set.rejected) os << "# " << r.x << ' ' << r.y << ' ' << r.reason << '\n';
  os.flags(flags);
}

}  // namespace ridgekit
