#pragma once

// Preprocessing chain: histogram equalization, block-spectral enhancement,
// adaptive binarization, gradient segmentation and parallel thinning.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/gradient.hpp"
#include "ridgekit/image.hpp"

namespace ridgekit {

inline GrayImage equalize_histogram(const GrayImage& img) {
  if (img.empty()) return img;
  std::array<std::size_t, 256> hist{};
  for (auto v : img.pixels) ++hist[v];
  std::array<std::uint8_t, 256> lut{};
  std::size_t cum = 0;
  const double total = static_cast<double>(img.pixels.size());
  for (int v = 0; v < 256; ++v) {
    cum += hist[v];
    lut[v] = static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(cum) / total));
  }
  GrayImage out = img;
  for (auto& v : out.pixels) v = lut[v];
  return out;
}

namespace detail {

// FFTW's planner is not reentrant; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class BlockFft {
 public:
  explicit BlockFft(int n) : n_(n) {
    const auto sz = static_cast<std::size_t>(n) * n;
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * sz));
    std::lock_guard lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~BlockFft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(inv_);
    }
    fftw_free(buf_);
  }
  BlockFft(const BlockFft&) = delete;
  BlockFft& operator=(const BlockFft&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  void forward() { fftw_execute(fwd_); }
  /// Unnormalized; callers divide by size().
  void inverse() { fftw_execute(inv_); }

 private:
  int n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace detail

/// Replaces each block's spectrum F by F * |F|^k. The DC term is left alone
/// and the AC part is rescaled to its original energy, so the block keeps its
/// mean and contrast while dominant ridge frequencies gain over the rest.
inline GrayImage enhance_fft_blocks(const GrayImage& img, int block = 32, double k = 0.45) {
  if (block <= 0) throw InvalidArgument("enhance_fft_blocks: block must be positive");
  if (img.empty()) return img;
  const int pw = (img.width + block - 1) / block * block;
  const int ph = (img.height + block - 1) / block * block;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph, 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) padded[static_cast<std::size_t>(y) * pw + x] = img.at(x, y);

  detail::BlockFft fft(block);
  auto* f = fft.data();
  const double n = static_cast<double>(fft.size());
  GrayImage out(img.width, img.height);
  for (int by = 0; by < ph; by += block) {
    for (int bx = 0; bx < pw; bx += block) {
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x)
          f[y * block + x] = {padded[static_cast<std::size_t>(by + y) * pw + bx + x], 0.0};
      fft.forward();
      if (k != 0.0) {
        double before = 0.0;
        double after = 0.0;
        for (std::size_t i = 1; i < fft.size(); ++i) {
          const double mag = std::abs(f[i]);
          before += mag * mag;
          const double gained = mag * std::pow(mag, k);
          after += gained * gained;
        }
        if (after > 0.0) {
          const double scale = std::sqrt(before / after);
          for (std::size_t i = 1; i < fft.size(); ++i) f[i] *= std::pow(std::abs(f[i]), k) * scale;
        }
      }
      fft.inverse();
      for (int y = 0; y < block; ++y) {
        for (int x = 0; x < block; ++x) {
          const int ix = bx + x;
          const int iy = by + y;
          if (ix >= img.width || iy >= img.height) continue;
          const double v = std::round(f[y * block + x].real() / n);
          out.at(ix, iy) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
      }
    }
  }
  return out;
}

/// Dark ridges become 1: a pixel is set iff its inverted value strictly
/// exceeds the mean inverted value of its block. Edge blocks average only the
/// pixels that exist.
inline BinaryImage binarize_adaptive(const GrayImage& img, int block = 16) {
  if (block <= 0) throw InvalidArgument("binarize_adaptive: block must be positive");
  BinaryImage out(img.width, img.height);
  for (int by = 0; by < img.height; by += block) {
    for (int bx = 0; bx < img.width; bx += block) {
      const int ex = std::min(bx + block, img.width);
      const int ey = std::min(by + block, img.height);
      long sum = 0;
      long count = 0;
      for (int y = by; y < ey; ++y)
        for (int x = bx; x < ex; ++x) {
          sum += 255 - img.at(x, y);
          ++count;
        }
      for (int y = by; y < ey; ++y)
        for (int x = bx; x < ex; ++x) out.at(x, y) = (static_cast<long>(255 - img.at(x, y)) * count > sum) ? 1 : 0;
    }
  }
  return out;
}

/// Block grid of mean Sobel magnitudes, row-major, edge blocks partial.
inline std::vector<double> block_gradient_means(const GrayImage& img, int block, int& cols, int& rows) {
  cols = (img.width + block - 1) / block;
  rows = (img.height + block - 1) / block;
  const auto grad = sobel(img);
  std::vector<double> means(static_cast<std::size_t>(cols) * rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      int count = 0;
      for (int y = r * block; y < std::min((r + 1) * block, img.height); ++y)
        for (int x = c * block; x < std::min((c + 1) * block, img.width); ++x) {
          s += grad.magnitude(x, y);
          ++count;
        }
      means[static_cast<std::size_t>(r) * cols + c] = count ? s / count : 0.0;
    }
  }
  return means;
}

inline constexpr double kDefaultSegmentationRatio = 0.35;

/// Foreground blocks have mean gradient magnitude >= tau (and > 0). Only the
/// largest 4-connected block region is kept. tau defaults to 0.35 times the
/// mean over all blocks.
inline Mask segment_gradient(const GrayImage& img, int block = 16, std::optional<double> tau = std::nullopt) {
  if (block <= 0) throw InvalidArgument("segment_gradient: block must be positive");
  if (img.empty()) throw SegmentationError("segmentation failed: empty image");
  int cols = 0;
  int rows = 0;
  const auto means = block_gradient_means(img, block, cols, rows);
  double threshold = 0.0;
  if (tau) {
    threshold = *tau;
  } else {
    double total = 0.0;
    for (double m : means) total += m;
    threshold = kDefaultSegmentationRatio * total / static_cast<double>(means.size());
  }
  std::vector<std::uint8_t> fg(means.size(), 0);
  for (std::size_t i = 0; i < means.size(); ++i) fg[i] = (means[i] > 0.0 && means[i] >= threshold) ? 1 : 0;

  std::vector<int> label(means.size(), 0);
  int best_label = 0;
  std::size_t best_size = 0;
  int next = 0;
  for (std::size_t seed = 0; seed < fg.size(); ++seed) {
    if (!fg[seed] || label[seed]) continue;
    ++next;
    std::size_t size = 0;
    std::queue<std::size_t> q;
    q.push(seed);
    label[seed] = next;
    while (!q.empty()) {
      const auto i = q.front();
      q.pop();
      ++size;
      const int r = static_cast<int>(i) / cols;
      const int c = static_cast<int>(i) % cols;
      constexpr std::array<std::pair<int, int>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
      for (auto [dr, dc] : steps) {
        const int nr = r + dr;
        const int nc = c + dc;
        if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
        const auto j = static_cast<std::size_t>(nr) * cols + nc;
        if (fg[j] && !label[j]) {
          label[j] = next;
          q.push(j);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
  }
  if (best_size == 0) throw SegmentationError("segmentation failed: no foreground blocks");

  Mask mask(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      mask.at(x, y) = label[static_cast<std::size_t>(y / block) * cols + x / block] == best_label ? 1 : 0;
  return mask;
}

namespace detail {

// Neighbors in Zhang-Suen order P2..P9: N, NE, E, SE, S, SW, W, NW.
inline std::array<std::uint8_t, 8> ring8(const BinaryImage& img, int x, int y) {
  return {img.get(x, y - 1), img.get(x + 1, y - 1), img.get(x + 1, y), img.get(x + 1, y + 1),
          img.get(x, y + 1), img.get(x - 1, y + 1), img.get(x - 1, y), img.get(x - 1, y - 1)};
}

inline int zero_one_transitions(const std::array<std::uint8_t, 8>& p) {
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1);
  return a;
}

// Yokoi 8-connectivity number; 1 means deleting the pixel keeps local topology.
inline int connectivity8(const std::array<std::uint8_t, 8>& p) {
  // Yokoi indexing starts at E and runs counterclockwise: E, NE, N, NW, W, SW, S, SE.
  const std::array<int, 8> x{!p[2], !p[1], !p[0], !p[7], !p[6], !p[5], !p[4], !p[3]};
  int n = 0;
  for (int k = 0; k < 8; k += 2) n += x[k] - x[k] * x[(k + 1) % 8] * x[(k + 2) % 8];
  return n;
}

inline bool zhang_suen_pass(BinaryImage& img, int sub) {
  std::vector<std::size_t> marked;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.at(x, y)) continue;
      const auto p = ring8(img, x, y);
      int b = 0;
      for (auto v : p) b += v;
      if (b < 2 || b > 6) continue;
      if (zero_one_transitions(p) != 1) continue;
      const auto [n, e, s, w] = std::array<int, 4>{p[0], p[2], p[4], p[6]};
      if (sub == 0 ? (n * e * s != 0 || e * s * w != 0) : (n * e * w != 0 || n * s * w != 0)) continue;
      marked.push_back(static_cast<std::size_t>(y) * img.width + x);
    }
  }
  for (auto i : marked) img.bits[i] = 0;
  return !marked.empty();
}

// Number of 8-connected foreground groups among the ring pixels.
inline int ring_components(const std::array<std::uint8_t, 8>& p) {
  int groups = 0;
  for (int i = 0; i < 8; ++i) {
    if (!p[i] || p[(i + 7) % 8]) continue;
    // Edge neighbors also touch the edge neighbor two steps back across an empty corner.
    if (i % 2 == 0 && p[(i + 6) % 8]) continue;
    ++groups;
  }
  if (groups == 0) {
    for (auto v : p)
      if (v) return 1;
  }
  return groups;
}

// Clears (x, y) if its foreground neighbors stay 8-connected through the
// rest of the image; restores it otherwise.
inline bool remove_if_connected(BinaryImage& img, int x, int y) {
  img.at(x, y) = 0;
  std::vector<std::pair<int, int>> nbrs;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if ((dx || dy) && img.get(x + dx, y + dy)) nbrs.emplace_back(x + dx, y + dy);
  std::vector<std::uint8_t> seen(img.bits.size(), 0);
  auto idx = [&](int px, int py) { return static_cast<std::size_t>(py) * img.width + px; };
  std::vector<std::pair<int, int>> stack{nbrs.front()};
  seen[idx(nbrs.front().first, nbrs.front().second)] = 1;
  std::size_t found = 1;
  while (!stack.empty() && found < nbrs.size()) {
    const auto [cx, cy] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (!img.get(nx, ny) || seen[idx(nx, ny)]) continue;
        seen[idx(nx, ny)] = 1;
        if (std::abs(nx - x) <= 1 && std::abs(ny - y) <= 1) ++found;
        stack.emplace_back(nx, ny);
      }
  }
  if (found == nbrs.size()) return true;
  img.at(x, y) = 1;
  return false;
}

// Sequentially removes pixels that sit in a 2x2 all-ones square, preferring
// simple pixels, then pixels whose neighbors stay locally connected, then
// pixels whose neighbors stay connected anywhere in the image.
inline bool break_squares(BinaryImage& img) {
  bool changed = false;
  for (int y = 0; y + 1 < img.height; ++y) {
    for (int x = 0; x + 1 < img.width; ++x) {
      if (!(img.at(x, y) && img.at(x + 1, y) && img.at(x, y + 1) && img.at(x + 1, y + 1))) continue;
      const std::array<std::pair<int, int>, 4> corners{{{x, y}, {x + 1, y}, {x, y + 1}, {x + 1, y + 1}}};
      bool removed = false;
      for (auto [cx, cy] : corners) {
        if (connectivity8(ring8(img, cx, cy)) == 1) {
          img.at(cx, cy) = 0;
          removed = true;
          break;
        }
      }
      for (auto [cx, cy] : corners) {
        if (removed) break;
        if (ring_components(ring8(img, cx, cy)) == 1) {
          img.at(cx, cy) = 0;
          removed = true;
        }
      }
      for (auto [cx, cy] : corners) {
        if (removed) break;
        removed = remove_if_connected(img, cx, cy);
      }
      changed = changed || removed;
    }
  }
  return changed;
}

}  // namespace detail

/// Two-subiteration parallel thinning to a fixpoint, followed by removal of
/// any 2x2 squares the parallel rule leaves behind. The roi is carried over.
inline BinaryImage thin(const BinaryImage& img) {
  BinaryImage out = img;
  for (;;) {
    bool changed = false;
    for (;;) {
      const bool a = detail::zhang_suen_pass(out, 0);
      const bool b = detail::zhang_suen_pass(out, 1);
      if (!a && !b) break;
      changed = true;
    }
    if (detail::break_squares(out)) changed = true;
    if (!changed) break;
  }
  return out;
}

/// Clears every bit outside the mask.
inline BinaryImage apply_mask(BinaryImage img, const Mask& mask) {
  if (mask.width != img.width || mask.height != img.height) throw InvalidArgument("apply_mask: size mismatch");
  for (std::size_t i = 0; i < img.bits.size(); ++i)
    if (!mask.bits[i]) img.bits[i] = 0;
  img.roi = mask;
  return img;
}

}  // namespace ridgekit
