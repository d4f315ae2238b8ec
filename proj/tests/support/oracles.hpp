#pragma once

// Independent reference implementations and fixture builders used by the
// unit tests and the acceptance runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "ridgekit/ridgekit.hpp"

namespace oracle {

using ridgekit::BinaryImage;
using ridgekit::GrayImage;
using ridgekit::kPi;

// ---- spectra -----------------------------------------------------------------

using Grid = std::vector<std::complex<double>>;

inline Grid dft2(const Grid& in, int n, bool inverse) {
  Grid out(in.size());
  const double sign = inverse ? 1.0 : -1.0;
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) {
      std::complex<double> acc{};
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double a = sign * 2.0 * kPi * (static_cast<double>(u) * x + static_cast<double>(v) * y) / n;
          acc += in[static_cast<std::size_t>(y) * n + x] * std::complex<double>(std::cos(a), std::sin(a));
        }
      out[static_cast<std::size_t>(v) * n + u] = inverse ? acc / static_cast<double>(n * n) : acc;
    }
  return out;
}

/// Block enhancement by direct transform: F|F|^k on AC terms, AC energy kept.
inline GrayImage enhance_reference(const GrayImage& img, int block, double k) {
  const int pw = (img.width + block - 1) / block * block;
  const int ph = (img.height + block - 1) / block * block;
  GrayImage out(img.width, img.height);
  for (int by = 0; by < ph; by += block)
    for (int bx = 0; bx < pw; bx += block) {
      Grid g(static_cast<std::size_t>(block) * block);
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x) {
          const int ix = bx + x;
          const int iy = by + y;
          g[static_cast<std::size_t>(y) * block + x] = (ix < img.width && iy < img.height) ? img.at(ix, iy) : 0.0;
        }
      auto f = dft2(g, block, false);
      double e0 = 0.0;
      double e1 = 0.0;
      for (std::size_t i = 1; i < f.size(); ++i) {
        const double m = std::abs(f[i]);
        e0 += m * m;
        e1 += std::pow(m, 2 + 2 * k);
      }
      if (k != 0.0 && e1 > 0.0)
        for (std::size_t i = 1; i < f.size(); ++i) f[i] *= std::pow(std::abs(f[i]), k) * std::sqrt(e0 / e1);
      const auto back = dft2(f, block, true);
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x) {
          const int ix = bx + x;
          const int iy = by + y;
          if (ix >= img.width || iy >= img.height) continue;
          out.at(ix, iy) = static_cast<std::uint8_t>(std::clamp(std::round(back[static_cast<std::size_t>(y) * block + x].real()), 0.0, 255.0));
        }
    }
  return out;
}

/// |F(u, v)| of a real square image by direct transform.
inline std::vector<double> magnitude_spectrum(const GrayImage& img) {
  Grid g(img.pixels.size());
  double mean = 0.0;
  for (auto p : img.pixels) mean += p;
  mean /= static_cast<double>(img.pixels.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = img.pixels[i] - mean;
  const auto f = dft2(g, img.width, false);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

// ---- images ------------------------------------------------------------------

/// Sinusoidal stripes whose ridges run along theta.
inline GrayImage stripes(int w, int h, double theta, double period, double contrast = 100.0) {
  GrayImage img(w, h);
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = 127.5 + contrast * std::cos(2 * kPi * (nx * x + ny * y) / period);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return img;
}

inline BinaryImage from_rows(const std::vector<std::string>& rows) {
  BinaryImage b(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x) b.at(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '#';
  return b;
}

/// Union of random filled discs and rectangles.
inline BinaryImage random_blob(std::mt19937_64& rng, int w = 48, int h = 48) {
  BinaryImage b(w, h);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_int_distribution<int> px(4, w - 5);
  std::uniform_int_distribution<int> py(4, h - 5);
  std::uniform_int_distribution<int> size(2, 9);
  std::bernoulli_distribution disc(0.5);
  const int n = count(rng);
  for (int s = 0; s < n; ++s) {
    const int cx = px(rng);
    const int cy = py(rng);
    const int a = size(rng);
    const int c = size(rng);
    const bool round = disc(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool in = round ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= a * a
                              : std::abs(x - cx) <= a && std::abs(y - cy) <= c;
        if (in) b.at(x, y) = 1;
      }
  }
  return b;
}

inline int components8(const BinaryImage& b) {
  std::vector<int> label(b.bits.size(), 0);
  int n = 0;
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x) {
      if (!b.at(x, y) || label[static_cast<std::size_t>(y) * b.width + x]) continue;
      ++n;
      std::vector<std::pair<int, int>> stack{{x, y}};
      label[static_cast<std::size_t>(y) * b.width + x] = n;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (!b.contains(nx, ny) || !b.at(nx, ny)) continue;
            auto& l = label[static_cast<std::size_t>(ny) * b.width + nx];
            if (!l) {
              l = n;
              stack.emplace_back(nx, ny);
            }
          }
      }
    }
  return n;
}

inline bool has_square(const BinaryImage& b) {
  for (int y = 0; y + 1 < b.height; ++y)
    for (int x = 0; x + 1 < b.width; ++x)
      if (b.at(x, y) && b.at(x + 1, y) && b.at(x, y + 1) && b.at(x + 1, y + 1)) return true;
  return false;
}

// ---- clustering --------------------------------------------------------------

struct BruteResult {
  std::vector<int> assignment;  ///< per sorted-id leaf
  std::vector<ridgekit::Merge> merges;
};

/// Rescans every cluster pair each round; links are recomputed from the
/// point-level neighbor sets every time.
inline BruteResult brute_fprock(std::vector<ridgekit::RidgeFlowPattern> recs, double theta, std::size_t k) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  const std::size_t n = recs.size();
  std::vector<std::set<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::size_t m = 0;
      for (std::size_t p = 0; p < recs[i].codes.size(); ++p) m += recs[i].codes[p] == recs[j].codes[p];
      const double s = static_cast<double>(m) / static_cast<double>(2 * recs[i].codes.size() - m);
      if (s >= theta) nb[i].insert(j);
    }
  auto link = [&](std::size_t i, std::size_t j) {
    std::size_t c = 0;
    for (auto x : nb[i]) c += nb[j].count(x);
    return static_cast<std::int64_t>(c);
  };
  const double e = 1.0 + 2.0 * (1.0 - theta) / (1.0 + theta);
  auto g = [&](std::int64_t l, std::size_t a, std::size_t b) {
    const double lo = static_cast<double>(std::min(a, b));
    const double hi = static_cast<double>(std::max(a, b));
    return static_cast<double>(l) / (std::pow(lo + hi, e) - std::pow(lo, e) - std::pow(hi, e));
  };

  struct Cl {
    std::vector<std::size_t> members;
    int node;
  };
  std::vector<Cl> cl;
  std::vector<std::uint8_t> isolated(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (nb[i].empty()) isolated[i] = 1;
    else cl.push_back({{i}, static_cast<int>(i)});
  }
  BruteResult out;
  int next = static_cast<int>(n);
  while (cl.size() > k) {
    double best = 0.0;
    std::size_t ba = 0;
    std::size_t bb = 0;
    std::pair<std::size_t, std::size_t> bkey{};
    bool found = false;
    for (std::size_t a = 0; a < cl.size(); ++a)
      for (std::size_t b = a + 1; b < cl.size(); ++b) {
        std::int64_t l = 0;
        for (auto p : cl[a].members)
          for (auto q : cl[b].members) l += link(p, q);
        if (l == 0) continue;
        const double gv = g(l, cl[a].members.size(), cl[b].members.size());
        const auto ma = *std::min_element(cl[a].members.begin(), cl[a].members.end());
        const auto mb = *std::min_element(cl[b].members.begin(), cl[b].members.end());
        const std::pair key{std::min(ma, mb), std::max(ma, mb)};
        if (!found || gv > best || (gv == best && key < bkey)) {
          found = true;
          best = gv;
          ba = a;
          bb = b;
          bkey = key;
        }
      }
    if (!found) break;
    const auto ma = *std::min_element(cl[ba].members.begin(), cl[ba].members.end());
    const auto mb = *std::min_element(cl[bb].members.begin(), cl[bb].members.end());
    if (mb < ma) std::swap(ba, bb);
    out.merges.push_back({cl[ba].node, cl[bb].node, next, best});
    cl[ba].node = next++;
    cl[ba].members.insert(cl[ba].members.end(), cl[bb].members.begin(), cl[bb].members.end());
    cl.erase(cl.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  // Largest k groups win, ties to the smaller first member; numbered by first member.
  std::vector<std::vector<std::size_t>> groups;
  for (auto& c : cl) {
    std::sort(c.members.begin(), c.members.end());
    groups.push_back(c.members);
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  if (groups.size() > k) groups.resize(k);
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.assignment.assign(n, 0);
  for (std::size_t c = 0; c < groups.size(); ++c)
    for (auto m : groups[c]) out.assignment[m] = static_cast<int>(c + 1);
  return out;
}

inline std::vector<ridgekit::RidgeFlowPattern> random_records(std::mt19937_64& rng, std::size_t n, int alphabet = 8) {
  std::uniform_int_distribution<int> code(0, alphabet - 1);
  std::vector<ridgekit::RidgeFlowPattern> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].image_id = "r" + std::to_string(100 + i);
    out[i].codes.resize(ridgekit::kRfpLength);
    for (auto& c : out[i].codes) c = static_cast<std::uint8_t>(code(rng));
  }
  return out;
}

/// Records clustered around a few random prototypes so that links exist.
inline std::vector<ridgekit::RidgeFlowPattern> clumpy_records(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> protos(1, 4);
  std::uniform_int_distribution<int> code(0, 7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int np = protos(rng);
  std::vector<std::vector<std::uint8_t>> p(static_cast<std::size_t>(np), std::vector<std::uint8_t>(ridgekit::kRfpLength));
  for (auto& v : p)
    for (auto& c : v) c = static_cast<std::uint8_t>(code(rng));
  const double noise = 0.05 + 0.3 * u(rng);
  std::vector<ridgekit::RidgeFlowPattern> out(n);
  std::uniform_int_distribution<int> pick(0, np - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].image_id = "c" + std::to_string(100 + i);
    out[i].codes = p[static_cast<std::size_t>(pick(rng))];
    for (auto& c : out[i].codes)
      if (u(rng) < noise) c = static_cast<std::uint8_t>(code(rng));
  }
  return out;
}

inline std::size_t brute_medoid(const std::vector<std::vector<std::uint8_t>>& members) {
  std::size_t best = 0;
  long best_cost = -1;
  for (std::size_t i = 0; i < members.size(); ++i) {
    long cost = 0;
    for (const auto& o : members)
      for (std::size_t p = 0; p < o.size(); ++p) cost += members[i][p] != o[p];
    if (best_cost < 0 || cost < best_cost) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

// ---- files -------------------------------------------------------------------

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ridgekit_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
