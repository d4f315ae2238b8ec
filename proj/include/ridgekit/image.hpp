#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/io.hpp"

namespace ridgekit {

/// 8-bit grayscale raster, row-major, 0 = black.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}
  GrayImage(int w, int h, std::vector<std::uint8_t> px) : width(w), height(h), pixels(std::move(px)) {
    if (pixels.size() != static_cast<std::size_t>(w) * h) {
      throw InvalidArgument("GrayImage: pixel count does not match dimensions");
    }
  }

  bool empty() const noexcept { return pixels.empty(); }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Replicated-border read.
  std::uint8_t clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(x, y);
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Pixel mask of the fingerprint area; 1 = inside.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const noexcept { return bits.empty(); }
  bool inside(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height && bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// 1 = ridge, 0 = valley. An empty roi means the whole frame.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  Mask roi;

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  /// Zero outside the frame.
  std::uint8_t get(int x, int y) const noexcept { return contains(x, y) ? at(x, y) : 0; }

  bool in_roi(int x, int y) const noexcept { return roi.empty() ? contains(x, y) : roi.inside(x, y); }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
    return a.width == b.width && a.height == b.height && a.bits == b.bits;
  }
};

/// 0/255 rendering of a binary image, ridges black.
inline GrayImage to_gray(const BinaryImage& b) {
  GrayImage g(b.width, b.height);
  for (std::size_t i = 0; i < b.bits.size(); ++i) g.pixels[i] = b.bits[i] ? 0 : 255;
  return g;
}

namespace detail {

inline bool pgm_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Skips whitespace and '#' comments, then reads one decimal field.
inline long pgm_field(std::span<const unsigned char> data, std::size_t& pos, const char* name) {
  for (;;) {
    while (pos < data.size() && pgm_space(data[pos])) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= data.size()) throw InputFormatError(std::string("PGM: missing ") + name, pos);
  if (data[pos] < '0' || data[pos] > '9') throw InputFormatError(std::string("PGM: expected digit in ") + name, pos);
  long v = 0;
  while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
    v = v * 10 + (data[pos] - '0');
    if (v > 1'000'000) throw InputFormatError(std::string("PGM: ") + name + " out of range", pos);
    ++pos;
  }
  return v;
}

}  // namespace detail

/// Decodes a binary P5 PGM with maxval 255.
inline GrayImage decode_pgm(std::span<const unsigned char> data) {
  if (data.size() < 2 || data[0] != 'P') throw InputFormatError("PGM: missing magic number", 0);
  if (data[1] != '5') throw InputFormatError("PGM: only binary P5 is supported", 1);
  std::size_t pos = 2;
  if (pos < data.size() && !detail::pgm_space(data[pos]) && data[pos] != '#') {
    throw InputFormatError("PGM: expected whitespace after magic", pos);
  }
  const long w = detail::pgm_field(data, pos, "width");
  const long h = detail::pgm_field(data, pos, "height");
  const std::size_t maxval_at = pos;
  const long maxval = detail::pgm_field(data, pos, "maxval");
  if (maxval != 255) throw InputFormatError("PGM: maxval must be 255", maxval_at);
  if (w <= 0 || h <= 0) throw InputFormatError("PGM: empty raster", maxval_at);
  if (pos >= data.size() || !detail::pgm_space(data[pos])) throw InputFormatError("PGM: expected single whitespace before raster", pos);
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < need) throw InputFormatError("PGM: truncated raster", data.size());
  std::vector<std::uint8_t> px(data.begin() + static_cast<std::ptrdiff_t>(pos),
                               data.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

inline GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(data);
  } catch (const InputFormatError& e) {
    throw InputFormatError(path.string() + ": " + e.reason(), e.offset());
  }
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_pgm(img)); }

}  // namespace ridgekit
