#pragma once

// Image -> meta-base record: preprocessing, orientation and core, flow code,
// minutiae count, ridge count and core code.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/imaging.hpp"
#include "ridgekit/minutiae.hpp"
#include "ridgekit/orientation.hpp"
#include "ridgekit/parallel.hpp"
#include "ridgekit/rfpcode.hpp"
#include "ridgekit/search.hpp"

namespace ridgekit {

struct PipelineParams {
  int fft_block = 32;
  double fft_k = 0.45;
  int binarize_block = 16;
  int segment_block = 16;
  OrientationParams orientation;
  RfpParams rfp;
  FalseMinutiaeParams minutiae;
};

struct Preprocessed {
  GrayImage enhanced;
  Mask roi;
  BinaryImage binary;
  BinaryImage skeleton;
};

struct PipelineResult {
  Preprocessed pre;
  OrientationField field;
  CorePoint core;
  MinutiaeSet minutiae;
  MetaRecord record;
};

/// Equalize, FFT-enhance, segment, binarize inside the roi, thin.
inline Preprocessed preprocess(const GrayImage& img, const PipelineParams& p = {}) {
  if (img.empty()) throw PipelineError("empty image");
  Preprocessed out;
  out.enhanced = enhance_fft_blocks(equalize_histogram(img), p.fft_block, p.fft_k);
  out.roi = segment_gradient(out.enhanced, p.segment_block);
  out.binary = apply_mask(binarize_adaptive(out.enhanced, p.binarize_block), out.roi);
  out.skeleton = thin(out.binary);
  return out;
}

inline PipelineResult process_image(const GrayImage& img, std::string id, const PipelineParams& p = {}) {
  PipelineResult res;
  res.pre = preprocess(img, p);
  res.field = smooth_orientation(estimate_orientation(res.pre.enhanced, p.orientation, &res.pre.roi),
                                 p.orientation.smooth_coherence);
  res.core = find_core(res.field);
  res.record.rfp = extract_rfp(res.pre.skeleton, res.field, res.core, p.rfp);
  res.record.rfp.image_id = std::move(id);
  res.minutiae = remove_false(extract_minutiae(res.pre.skeleton), res.pre.roi, p.minutiae);
  res.record.alpha = static_cast<int>(true_minutiae_count(res.minutiae));
  res.record.beta = compute_beta(res.pre.skeleton, res.core);
  res.record.delta = res.core.bits;
  return res;
}

struct EnrollFailure {
  std::filesystem::path path;
  std::string reason;
};

struct EnrollResult {
  MetaBase meta;
  std::vector<EnrollFailure> failures;
};

/// Runs every image through the pipeline; the record id is the file stem.
/// Records keep input order whatever the completion order; failures are
/// collected per image.
inline EnrollResult build_metabase(const std::vector<std::filesystem::path>& paths, const PipelineParams& p = {}) {
  std::vector<std::optional<MetaRecord>> records(paths.size());
  std::vector<std::string> errors(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    try {
      records[i] = process_image(load_pgm(paths[i]), paths[i].stem().string(), p).record;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  EnrollResult out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (records[i]) out.meta.records.push_back(std::move(*records[i]));
    else out.failures.push_back({paths[i], errors[i]});
  }
  std::set<std::string_view> ids;
  for (const auto& r : out.meta.records)
    if (!ids.insert(r.id()).second) throw InvalidArgument("two images share the id " + r.id());
  return out;
}

/// Sorted *.pgm files directly inside a directory.
inline std::vector<std::filesystem::path> list_pgm(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ridgekit
