#pragma once

// Ridge flow pattern coding: the 8-direction step code table, the walk that
// turns a skeleton plus core into a fixed-length code sequence, and the
// meta-base rows built from those sequences.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/orientation.hpp"

namespace ridgekit {

inline constexpr std::size_t kRfpLength = 32;

enum class FingerClass { arch, tented_arch, left_loop, right_loop, whorl, twin_loop, unknown };

inline constexpr std::array<FingerClass, 6> kSixClasses{FingerClass::arch,       FingerClass::tented_arch,
                                                        FingerClass::left_loop,  FingerClass::right_loop,
                                                        FingerClass::whorl,      FingerClass::twin_loop};

inline std::string_view to_string(FingerClass c) {
  switch (c) {
    case FingerClass::arch: return "arch";
    case FingerClass::tented_arch: return "tented-arch";
    case FingerClass::left_loop: return "left-loop";
    case FingerClass::right_loop: return "right-loop";
    case FingerClass::whorl: return "whorl";
    case FingerClass::twin_loop: return "twin-loop";
    case FingerClass::unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<FingerClass> parse_class(std::string_view s) {
  for (auto c : {FingerClass::arch, FingerClass::tented_arch, FingerClass::left_loop, FingerClass::right_loop,
                 FingerClass::whorl, FingerClass::twin_loop, FingerClass::unknown})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// Step sign pair with x to the right and y downward.
struct Step {
  int dx = 0;
  int dy = 0;
  friend constexpr bool operator==(Step, Step) = default;
};

/// Directionality Z = 4(dx+2) + (dy+2) for each code 0..7.
inline constexpr std::array<int, 8> kDirectionality{11, 7, 6, 5, 9, 13, 14, 15};
inline constexpr std::array<Step, 8> kCodeSteps{{{0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}}};

inline constexpr int directionality(int dx, int dy) { return 4 * (dx + 2) + (dy + 2); }

/// Code 0..7 of a unit step; throws on (0, 0) or non-unit components.
inline int direction_code(int dx, int dy) {
  if (dx < -1 || dx > 1 || dy < -1 || dy > 1) throw InvalidArgument("direction_code: step components must be -1, 0 or 1");
  if (dx == 0 && dy == 0) throw InvalidArgument("direction_code: no movement");
  const int z = directionality(dx, dy);
  for (int code = 0; code < 8; ++code)
    if (kDirectionality[code] == z) return code;
  throw InvalidArgument("direction_code: directionality not in table");
}

struct RidgeFlowPattern {
  std::string image_id;
  std::vector<std::uint8_t> codes;
  std::optional<FingerClass> label;
  /// Trailing codes that repeat the last real one because the ridge ran out.
  int padded = 0;

  friend bool operator==(const RidgeFlowPattern& a, const RidgeFlowPattern& b) {
    return a.image_id == b.image_id && a.codes == b.codes && a.label == b.label;
  }
};

/// One meta-base row: the flow code plus the search features.
struct MetaRecord {
  RidgeFlowPattern rfp;
  int alpha = 0;  ///< true minutiae count
  int beta = 0;   ///< ridge crossings on the core scanline
  CoreCode delta;

  const std::string& id() const { return rfp.image_id; }
  friend bool operator==(const MetaRecord&, const MetaRecord&) = default;
};

struct MetaBase {
  std::vector<MetaRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  /// Throws unless every row has kRfpLength codes in 0..7 and ids are unique.
  void validate() const {
    std::set<std::string_view> seen;
    for (const auto& r : records) {
      if (r.rfp.codes.size() != kRfpLength) throw InvalidArgument("meta-base: record " + r.id() + " has wrong length");
      for (auto c : r.rfp.codes)
        if (c > 7) throw InvalidArgument("meta-base: record " + r.id() + " has code out of range");
      if (!seen.insert(r.id()).second) throw InvalidArgument("meta-base: duplicate id " + r.id());
    }
  }

  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].id() == id) return i;
    return std::nullopt;
  }

  friend bool operator==(const MetaBase&, const MetaBase&) = default;
};

struct RfpParams {
  std::size_t n = kRfpLength;
  int stride = 4;           ///< Skeleton pixels per control point.
  int search_blocks = 2;    ///< Radius, in orientation blocks, for start and resume.
};

namespace detail {

struct Walker {
  const BinaryImage& sk;
  const OrientationField& field;
  std::vector<std::uint8_t> visited;

  Walker(const BinaryImage& s, const OrientationField& f)
      : sk(s), field(f), visited(static_cast<std::size_t>(s.width) * s.height, 0) {}

  bool free_ridge(int x, int y) const {
    return sk.contains(x, y) && sk.at(x, y) && !visited[static_cast<std::size_t>(y) * sk.width + x];
  }
  void mark(int x, int y) { visited[static_cast<std::size_t>(y) * sk.width + x] = 1; }

  // Field direction at a pixel, falling back to the nearest valid neighbor block.
  double theta_near(int x, int y) const {
    auto [r, c] = field.block_of(x, y);
    if (field.is_valid(r, c)) return field.theta_at(r, c);
    for (int rad = 1; rad <= 2; ++rad)
      for (int dr = -rad; dr <= rad; ++dr)
        for (int dc = -rad; dc <= rad; ++dc)
          if (field.is_valid(r + dr, c + dc)) return field.theta_at(r + dr, c + dc);
    return field.in_grid(r, c) ? field.theta_at(r, c) : 0.0;
  }

  // Oriented unit tangent at (x, y) pointing the same way as (hx, hy).
  std::pair<double, double> heading_at(int x, int y, double hx, double hy) const {
    const double t = theta_near(x, y);
    double tx = std::cos(t);
    double ty = std::sin(t);
    if (tx * hx + ty * hy < 0) {
      tx = -tx;
      ty = -ty;
    }
    return {tx, ty};
  }

  std::optional<std::pair<int, int>> nearest_free(double cx, double cy, double radius) const {
    std::optional<std::pair<int, int>> best;
    double best_d2 = radius * radius;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(sk.width - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(sk.height - 1, static_cast<int>(std::ceil(cy + radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (!free_ridge(x, y)) continue;
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d2 < best_d2 || (!best && d2 <= best_d2)) {
          best_d2 = d2;
          best = {x, y};
        }
      }
    return best;
  }
};

}  // namespace detail

/// Walks the skeleton from the ridge pixel nearest the core. Each control
/// point advances `stride` pixels along the ridge, choosing at every pixel the
/// unvisited ridge neighbor closest to the local field direction, and emits
/// the code of the sign of the displacement. A finished ridge resumes at the
/// nearest unvisited ridge pixel within `search_blocks` blocks; if there is
/// none, the tail is padded with the last code.
inline RidgeFlowPattern extract_rfp(const BinaryImage& skeleton, const OrientationField& field, const CorePoint& core,
                                    const RfpParams& params = {}) {
  if (params.n == 0 || params.stride <= 0) throw InvalidArgument("extract_rfp: n and stride must be positive");
  detail::Walker walk(skeleton, field);
  const double radius = static_cast<double>(params.search_blocks) * field.block;
  auto start = walk.nearest_free(core.x, core.y, radius);
  if (!start) throw ExtractionError("no ridge pixel near the core");

  RidgeFlowPattern rfp;
  rfp.codes.reserve(params.n);
  auto [x, y] = *start;
  walk.mark(x, y);
  const double t0 = walk.theta_near(x, y);
  // Initial heading has dy >= 0 because theta is in [0, pi).
  auto [hx, hy] = std::pair{std::cos(t0), std::sin(t0)};
  int last_step_code = -1;

  while (rfp.codes.size() < params.n) {
    const int sx = x;
    const int sy = y;
    int moved = 0;
    for (; moved < params.stride; ++moved) {
      std::tie(hx, hy) = walk.heading_at(x, y, hx, hy);
      int best_code = -1;
      double best_dev = 0.0;
      for (int code = 0; code < 8; ++code) {
        const auto [dx, dy] = kCodeSteps[code];
        if (!walk.free_ridge(x + dx, y + dy)) continue;
        const double len = std::hypot(dx, dy);
        const double cosang = std::clamp((dx * hx + dy * hy) / len, -1.0, 1.0);
        if (cosang < 0.0) continue;
        const double dev = std::acos(cosang);
        const bool better = best_code < 0 || dev < best_dev - 1e-12 ||
                            (std::abs(dev - best_dev) <= 1e-12 && code == last_step_code && best_code != last_step_code);
        if (better) {
          best_code = code;
          best_dev = dev;
        }
      }
      if (best_code < 0) break;
      const auto [dx, dy] = kCodeSteps[best_code];
      // A diagonal move retires the corner pixels it cuts past.
      if (dx != 0 && dy != 0) {
        if (walk.free_ridge(x + dx, y)) walk.mark(x + dx, y);
        if (walk.free_ridge(x, y + dy)) walk.mark(x, y + dy);
      }
      x += dx;
      y += dy;
      walk.mark(x, y);
      hx = dx;
      hy = dy;
      last_step_code = best_code;
    }
    const int ddx = (x > sx) - (x < sx);
    const int ddy = (y > sy) - (y < sy);
    if (moved > 0 && (ddx != 0 || ddy != 0)) rfp.codes.push_back(static_cast<std::uint8_t>(direction_code(ddx, ddy)));
    if (moved == params.stride) continue;

    auto next = walk.nearest_free(x, y, radius);
    if (!next) break;
    std::tie(x, y) = *next;
    walk.mark(x, y);
  }
  if (rfp.codes.empty()) throw ExtractionError("ridge walk produced no codes");
  while (rfp.codes.size() < params.n) {
    rfp.codes.push_back(rfp.codes.back());
    ++rfp.padded;
  }
  return rfp;
}

/// One-hot item set {(position, code)} packed as n*8 bits.
struct EncodedRecord {
  std::size_t n = 0;
  std::vector<std::uint64_t> words;

  explicit EncodedRecord(std::span<const std::uint8_t> codes) : n(codes.size()), words((codes.size() * 8 + 63) / 64, 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t bit = i * 8 + codes[i];
      words[bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
  }

  /// Items as (1-based position, code).
  std::vector<std::pair<int, int>> items() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t bit = 0; bit < n * 8; ++bit)
      if ((words[bit / 64] >> (bit % 64)) & 1u) out.emplace_back(static_cast<int>(bit / 8) + 1, static_cast<int>(bit % 8));
    return out;
  }

  /// Size of the item intersection, i.e. positions with equal codes.
  std::size_t common(const EncodedRecord& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words.size() && i < o.words.size(); ++i) c += std::popcount(words[i] & o.words[i]);
    return c;
  }

  friend bool operator==(const EncodedRecord&, const EncodedRecord&) = default;
};

inline std::vector<EncodedRecord> encode_binary(const MetaBase& meta) {
  std::vector<EncodedRecord> out;
  out.reserve(meta.size());
  for (const auto& r : meta.records) out.emplace_back(r.rfp.codes);
  return out;
}

}  // namespace ridgekit
