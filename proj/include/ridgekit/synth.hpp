#pragma once

// Labeled synthetic data: noisy class-template code records for clustering
// and search, zero-pole orientation fields with known singular points, and a
// phase-integration ridge renderer for those fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/orientation.hpp"
#include "ridgekit/rfpcode.hpp"

namespace ridgekit {

/// 64-bit Mersenne Twister with distribution helpers that give the same
/// numbers on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = 0;
    do v = eng_();
    while (v >= limit);
    return v % n;
  }

  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

 private:
  std::mt19937_64 eng_;
};

namespace detail {

template <std::size_t N>
constexpr std::array<std::uint8_t, kRfpLength> runs(const std::array<std::pair<int, int>, N>& spec) {
  std::array<std::uint8_t, kRfpLength> out{};
  std::size_t i = 0;
  for (const auto& [code, count] : spec)
    for (int k = 0; k < count; ++k) out[i++] = static_cast<std::uint8_t>(code);
  return out;
}

inline constexpr std::array<std::array<std::uint8_t, kRfpLength>, 6> kTemplates{
    runs(std::array<std::pair<int, int>, 5>{{{6, 4}, {5, 10}, {6, 4}, {7, 10}, {6, 4}}}),
    runs(std::array<std::pair<int, int>, 4>{{{4, 6}, {5, 10}, {0, 10}, {7, 6}}}),
    runs(std::array<std::pair<int, int>, 7>{{{0, 2}, {1, 4}, {2, 6}, {3, 4}, {4, 6}, {5, 6}, {6, 4}}}),
    runs(std::array<std::pair<int, int>, 7>{{{0, 2}, {7, 4}, {6, 6}, {5, 4}, {4, 6}, {3, 6}, {2, 4}}}),
    runs(std::array<std::pair<int, int>, 8>{{{2, 4}, {3, 4}, {4, 4}, {5, 4}, {6, 4}, {7, 4}, {0, 4}, {1, 4}}}),
    runs(std::array<std::pair<int, int>, 16>{{{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 2}, {6, 2}, {7, 2},
                                               {4, 2}, {5, 2}, {6, 2}, {7, 2}, {0, 2}, {1, 2}, {2, 2}, {3, 2}}}),
};

constexpr int min_template_distance() {
  int best = static_cast<int>(kRfpLength);
  for (std::size_t a = 0; a < kTemplates.size(); ++a)
    for (std::size_t b = a + 1; b < kTemplates.size(); ++b) {
      int d = 0;
      for (std::size_t i = 0; i < kRfpLength; ++i) d += kTemplates[a][i] != kTemplates[b][i];
      best = std::min(best, d);
    }
  return best;
}

static_assert(min_template_distance() >= 20, "class templates are too close together");

struct ClassTraits {
  int alpha_lo, alpha_hi;
  int beta_lo, beta_hi;
  unsigned core_qx, core_qy;
};

inline constexpr std::array<ClassTraits, 6> kTraits{{
    {15, 55, 4, 16, 16, 20},
    {20, 60, 6, 18, 16, 18},
    {25, 65, 8, 20, 14, 16},
    {25, 65, 8, 20, 18, 16},
    {30, 70, 10, 22, 16, 15},
    {35, 75, 12, 24, 15, 14},
}};

inline std::size_t class_slot(FingerClass c) {
  if (c == FingerClass::unknown) throw InvalidArgument("no template for class 'unknown'");
  return static_cast<std::size_t>(c);
}

}  // namespace detail

inline int min_template_distance() { return detail::min_template_distance(); }

inline const std::array<std::uint8_t, kRfpLength>& class_template(FingerClass c) {
  return detail::kTemplates[detail::class_slot(c)];
}

struct SynthSpec {
  std::vector<FingerClass> classes{kSixClasses.begin(), kSixClasses.end()};
  std::size_t per_class = 100;
  double noise = 0.1;         ///< Per-position replacement probability.
  std::uint64_t seed = 42;
  double query_noise = 0.05;  ///< Replacement probability for the derived queries.

  void validate() const {
    if (!(noise >= 0.0 && noise < 1.0)) throw InvalidArgument("noise must lie in [0, 1)");
    if (!(query_noise >= 0.0 && query_noise < 1.0)) throw InvalidArgument("query noise must lie in [0, 1)");
    for (auto c : classes) (void)detail::class_slot(c);
  }
};

struct SynthData {
  MetaBase meta;
  /// One query per record, id equal to the record it was derived from.
  MetaBase queries;
};

/// Replaces each code with a different, uniformly drawn one with probability p.
inline std::size_t perturb_codes(std::vector<std::uint8_t>& codes, double p, Rng& rng) {
  std::size_t changed = 0;
  for (auto& c : codes) {
    if (rng.uniform() >= p) continue;
    c = static_cast<std::uint8_t>((c + 1 + rng.below(7)) % 8);
    ++changed;
  }
  return changed;
}

inline std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn%05zu", i);
  return buf;
}

inline SynthData generate_codes(const SynthSpec& spec) {
  spec.validate();
  SynthData out;
  Rng rng(spec.seed);
  std::size_t next = 0;
  for (auto cls : spec.classes) {
    const auto& traits = detail::kTraits[detail::class_slot(cls)];
    const auto& tmpl = class_template(cls);
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      MetaRecord r;
      r.rfp.image_id = synth_id(next++);
      r.rfp.label = cls;
      r.rfp.codes.assign(tmpl.begin(), tmpl.end());
      perturb_codes(r.rfp.codes, spec.noise, rng);
      r.alpha = rng.between(traits.alpha_lo, traits.alpha_hi);
      r.beta = rng.between(traits.beta_lo, traits.beta_hi);
      auto bits = CoreCode::from_cells(traits.core_qx, traits.core_qy).value();
      const int flips = rng.between(0, 2);
      int first = -1;
      for (int f = 0; f < flips; ++f) {
        int b = 0;
        do b = rng.between(0, CoreCode::kBits - 1);
        while (b == first);
        first = b;
        bits ^= static_cast<std::uint16_t>(1u << b);
      }
      r.delta = CoreCode(bits);
      out.meta.records.push_back(std::move(r));
    }
  }
  Rng qrng(spec.seed ^ 0x9E3779B97F4A7C15ull);
  for (const auto& r : out.meta.records) {
    MetaRecord q = r;
    q.rfp.label.reset();
    perturb_codes(q.rfp.codes, spec.query_noise, qrng);
    out.queries.records.push_back(std::move(q));
  }
  return out;
}

enum class SingularKind { core, delta };

struct Singularity {
  SingularKind kind = SingularKind::core;
  double x = 0.0;
  double y = 0.0;
};

/// Orientation model: zero-pole sum over singular points, or a smooth arch.
struct FieldModel {
  FingerClass cls = FingerClass::arch;
  int width = 0;
  int height = 0;
  std::vector<Singularity> singular;
  double phi0 = 0.0;
  double arch_slope = 0.0;  ///< Peak ridge slope of the arch profile.

  /// Ridge tangent in [0, pi) at a continuous pixel position.
  double theta(double x, double y) const {
    if (singular.empty()) {
      const double slope = -arch_slope * std::cos(kPi * x / width);
      return wrap_axial(std::atan(slope));
    }
    double t = phi0;
    for (const auto& s : singular) {
      const double a = std::atan2(y - s.y, x - s.x);
      t += s.kind == SingularKind::core ? 0.5 * a : -0.5 * a;
    }
    return wrap_axial(t);
  }

  std::vector<Singularity> cores() const {
    std::vector<Singularity> out;
    for (const auto& s : singular)
      if (s.kind == SingularKind::core) out.push_back(s);
    return out;
  }
};

struct SynthField {
  FieldModel model;
  OrientationField field;
};

/// Samples the model at block centers. Every block is valid with coherence 1.
inline OrientationField sample_field(const FieldModel& m, int block = 16) {
  if (block <= 0 || m.width < block || m.height < block) throw InvalidArgument("sample_field: frame smaller than one block");
  OrientationField f(m.width / block, m.height / block, block);
  f.width = m.width;
  f.height = m.height;
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      const auto i = f.index(r, c);
      f.theta[i] = m.theta((c + 0.5) * block, (r + 0.5) * block);
      f.coherence[i] = 1.0;
      f.valid[i] = 1;
    }
  return f;
}

/// Mirror image of a model under x -> width - x.
inline FieldModel mirror_x(FieldModel m) {
  for (auto& s : m.singular) s.x = m.width - s.x;
  m.phi0 = wrap_axial(-m.phi0);
  return m;
}

/// Zero-pole field for a class with singular points placed from the seed:
/// whorl has a double core at the center region, loops one core with a delta
/// below and to one side (right loop mirrors left loop for the same seed),
/// tented arch a delta straight below the core, twin loop two cores and two
/// deltas. Arches have no singular points.
inline SynthField generate_field(FingerClass cls, int width, int height, std::uint64_t seed, int block = 16) {
  if (width < 4 * block || height < 4 * block) throw InvalidArgument("generate_field: frame must span at least 4 blocks");
  Rng rng(seed);
  const double w = width;
  const double h = height;
  FieldModel m;
  m.cls = cls;
  m.width = width;
  m.height = height;
  const double cx = rng.uniform(0.4, 0.6) * w;
  const double cy = rng.uniform(0.3, 0.45) * h;
  switch (cls) {
    case FingerClass::arch:
      m.arch_slope = rng.uniform(0.25, 0.45);
      break;
    case FingerClass::whorl:
      m.singular = {{SingularKind::core, cx, cy + 0.1 * h}, {SingularKind::core, cx, cy + 0.1 * h}};
      m.phi0 = kPi / 2;
      break;
    case FingerClass::left_loop:
    case FingerClass::right_loop: {
      const double dx = rng.uniform(0.15, 0.25) * w;
      const double dy = rng.uniform(0.25, 0.35) * h;
      m.singular = {{SingularKind::core, cx, cy}, {SingularKind::delta, cx + dx, cy + dy}};
      if (cls == FingerClass::right_loop) {
        m = mirror_x(m);
        m.cls = cls;
      }
      break;
    }
    case FingerClass::tented_arch: {
      const double dy = rng.uniform(0.25, 0.35) * h;
      m.singular = {{SingularKind::core, cx, cy}, {SingularKind::delta, cx, cy + dy}};
      break;
    }
    case FingerClass::twin_loop: {
      const double ox = rng.uniform(0.12, 0.18) * w;
      const double oy = rng.uniform(0.05, 0.1) * h;
      const double mid_y = cy + 0.1 * h;
      m.singular = {{SingularKind::core, cx - ox, mid_y - oy},
                    {SingularKind::core, cx + ox, mid_y + oy},
                    {SingularKind::delta, cx - 2.4 * ox, std::min(mid_y + 0.3 * h, h - block)},
                    {SingularKind::delta, cx + 2.4 * ox, std::min(mid_y + 0.35 * h, h - block)}};
      break;
    }
    case FingerClass::unknown:
      throw InvalidArgument("generate_field: no model for class 'unknown'");
  }
  return {m, sample_field(m, block)};
}

namespace detail {

// Block-center interpolation of theta in doubled-angle space.
inline double interpolate_theta(const OrientationField& f, double x, double y) {
  const double gx = std::clamp(x / f.block - 0.5, 0.0, f.cols - 1.0);
  const double gy = std::clamp(y / f.block - 0.5, 0.0, f.rows - 1.0);
  const int c0 = std::min(static_cast<int>(gx), f.cols - 1);
  const int r0 = std::min(static_cast<int>(gy), f.rows - 1);
  const int c1 = std::min(c0 + 1, f.cols - 1);
  const int r1 = std::min(r0 + 1, f.rows - 1);
  const double fx = gx - c0;
  const double fy = gy - r0;
  double sx = 0.0;
  double sy = 0.0;
  auto add = [&](int r, int c, double wgt) {
    const double t = f.theta_at(r, c);
    sx += wgt * std::cos(2 * t);
    sy += wgt * std::sin(2 * t);
  };
  add(r0, c0, (1 - fx) * (1 - fy));
  add(r0, c1, fx * (1 - fy));
  add(r1, c0, (1 - fx) * fy);
  add(r1, c1, fx * fy);
  return wrap_axial(0.5 * std::atan2(sy, sx));
}

}  // namespace detail

/// Streamline-phase rendering. The phase runs down the center column and is
/// carried sideways along each row so that it stays constant along the ridge
/// direction; mostly vertical fields are integrated along columns instead.
/// Intensity is 127 + 127 cos(2 pi phase / period).
inline GrayImage render_ridges(const OrientationField& field, double period = 9.0) {
  if (period <= 0) throw InvalidArgument("render_ridges: period must be positive");
  const int w = field.width > 0 ? field.width : field.cols * field.block;
  const int h = field.height > 0 ? field.height : field.rows * field.block;
  GrayImage img(w, h);
  std::vector<double> theta(static_cast<std::size_t>(w) * h);
  double horizontal = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = detail::interpolate_theta(field, x + 0.5, y + 0.5);
      theta[static_cast<std::size_t>(y) * w + x] = t;
      horizontal += std::abs(std::cos(t)) - std::abs(std::sin(t));
    }
  constexpr double kMaxSlope = 3.0;
  std::vector<double> phase(theta.size());
  if (horizontal >= 0) {
    // phi_x = -tan(theta) * phi_y with phi_y = 1 on the center column.
    const int xc = w / 2;
    for (int y = 0; y < h; ++y) {
      auto at = [&](int x) -> double& { return phase[static_cast<std::size_t>(y) * w + x]; };
      auto slope = [&](int x) { return std::clamp(-std::tan(theta[static_cast<std::size_t>(y) * w + x]), -kMaxSlope, kMaxSlope); };
      at(xc) = y;
      for (int x = xc + 1; x < w; ++x) at(x) = at(x - 1) + 0.5 * (slope(x - 1) + slope(x));
      for (int x = xc - 1; x >= 0; --x) at(x) = at(x + 1) - 0.5 * (slope(x + 1) + slope(x));
    }
  } else {
    // phi_y = -cot(theta) * phi_x with phi_x = 1 on the center row.
    const int yc = h / 2;
    for (int x = 0; x < w; ++x) {
      auto at = [&](int y) -> double& { return phase[static_cast<std::size_t>(y) * w + x]; };
      auto slope = [&](int y) {
        const double t = theta[static_cast<std::size_t>(y) * w + x];
        return std::clamp(-std::cos(t) / std::sin(t), -kMaxSlope, kMaxSlope);
      };
      at(yc) = x;
      for (int y = yc + 1; y < h; ++y) at(y) = at(y - 1) + 0.5 * (slope(y - 1) + slope(y));
      for (int y = yc - 1; y >= 0; --y) at(y) = at(y + 1) - 0.5 * (slope(y + 1) + slope(y));
    }
  }
  for (std::size_t i = 0; i < phase.size(); ++i) {
    const double v = 127.0 + 127.0 * std::cos(2 * kPi * phase[i] / period);
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return img;
}

}  // namespace ridgekit
