#pragma once

// Text formats for the meta-base (`RFPMETA 1`), cluster models
// (`RFPCLUSTERS 1`) and class label lists.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ridgekit/cluster.hpp"
#include "ridgekit/error.hpp"
#include "ridgekit/io.hpp"
#include "ridgekit/rfpcode.hpp"

namespace ridgekit {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

/// Splits on LF. A final line without a terminator is still returned; a
/// trailing LF does not create an empty last line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc{} && r.ptr == end;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

inline void check_header(const std::vector<std::string_view>& lines, std::string_view header) {
  if (lines.empty()) throw ParseError("missing header '" + std::string(header) + "'", 1);
  if (lines[0] != header) throw ParseError("bad header, expected '" + std::string(header) + "'", 1);
}

}  // namespace detail

// ---- meta-base -------------------------------------------------------------

inline std::string format_metabase(const MetaBase& meta) {
  std::string out = "RFPMETA 1\n";
  for (const auto& r : meta.records) {
    out += r.id();
    out += ' ';
    out += r.rfp.label ? std::string(to_string(*r.rfp.label)) : std::string("?");
    out += ' ' + std::to_string(r.alpha) + ' ' + std::to_string(r.beta) + ' ' + r.delta.to_string();
    for (auto c : r.rfp.codes) {
      out += ' ';
      out += static_cast<char>('0' + c);
    }
    out += '\n';
  }
  return out;
}

inline MetaBase parse_metabase(std::string_view text) {
  const auto lines = detail::split_lines(text);
  detail::check_header(lines, "RFPMETA 1");
  MetaBase meta;
  std::set<std::string, std::less<>> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln + 1);
    const auto f = detail::split_fields(lines[ln]);
    if (f.size() != 5 + kRfpLength)
      throw ParseError("expected " + std::to_string(5 + kRfpLength) + " fields, found " + std::to_string(f.size()), line_no);
    MetaRecord r;
    r.rfp.image_id = std::string(f[0]);
    if (!seen.insert(r.rfp.image_id).second) throw ParseError("duplicate record id '" + r.rfp.image_id + "'", line_no);
    if (f[1] != "?") {
      const auto c = parse_class(f[1]);
      if (!c) throw ParseError("unknown class '" + std::string(f[1]) + "'", line_no);
      r.rfp.label = *c;
    }
    if (!detail::parse_int(f[2], r.alpha) || r.alpha < 0) throw ParseError("alpha must be a non-negative integer", line_no);
    if (!detail::parse_int(f[3], r.beta) || r.beta < 0) throw ParseError("beta must be a non-negative integer", line_no);
    const auto delta = CoreCode::parse(f[4]);
    if (!delta) throw ParseError("delta must be 10 binary digits", line_no);
    r.delta = *delta;
    r.rfp.codes.reserve(kRfpLength);
    for (std::size_t i = 0; i < kRfpLength; ++i) {
      const auto s = f[5 + i];
      if (s.size() != 1 || s[0] < '0' || s[0] > '7') throw ParseError("code " + std::to_string(i + 1) + " out of range 0..7", line_no);
      r.rfp.codes.push_back(static_cast<std::uint8_t>(s[0] - '0'));
    }
    meta.records.push_back(std::move(r));
  }
  return meta;
}

inline void save_metabase(const MetaBase& meta, const std::filesystem::path& path) {
  write_file_atomic(path, format_metabase(meta));
}

inline MetaBase load_metabase(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return parse_metabase(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.reason(), e.line());
  }
}

// ---- cluster model -----------------------------------------------------------

inline std::string format_clusters(const ClusterModel& model) {
  std::string out = "RFPCLUSTERS 1\n";
  for (std::size_t c = 1; c <= model.k; ++c) {
    const auto members = model.members(static_cast<int>(c));
    if (members.empty()) continue;
    out += "C " + std::to_string(c);
    for (int m : members) out += ' ' + model.ids[static_cast<std::size_t>(m)];
    out += '\n';
  }
  for (int o : model.outliers()) out += "O " + model.ids[static_cast<std::size_t>(o)] + '\n';
  char buf[64];
  for (const auto& m : model.dendrogram) {
    std::snprintf(buf, sizeof buf, " %.9f\n", m.score);
    out += "M " + std::to_string(m.left) + ' ' + std::to_string(m.right) + ' ' + std::to_string(m.node) + buf;
  }
  return out;
}

/// Parses a clusters file. Leaves are numbered by sorted record id, as the
/// clusterers number them. Scores are rounded to the stored 9 decimals.
inline ClusterModel parse_clusters(std::string_view text) {
  const auto lines = detail::split_lines(text);
  detail::check_header(lines, "RFPCLUSTERS 1");
  std::map<std::string, int, std::less<>> cluster_of;
  std::map<int, int> cluster_lines;
  std::vector<Merge> merges;
  std::vector<int> merge_lines;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln + 1);
    const auto f = detail::split_fields(lines[ln]);
    if (f.empty()) throw ParseError("empty line", line_no);
    if (f[0] == "C") {
      int c = 0;
      if (f.size() < 3) throw ParseError("cluster line needs an id and at least one member", line_no);
      if (!detail::parse_int(f[1], c) || c < 1) throw ParseError("cluster id must be a positive integer", line_no);
      if (!cluster_lines.emplace(c, line_no).second) throw ParseError("cluster " + std::to_string(c) + " listed twice", line_no);
      for (std::size_t i = 2; i < f.size(); ++i)
        if (!cluster_of.emplace(std::string(f[i]), c).second) throw ParseError("record '" + std::string(f[i]) + "' listed twice", line_no);
    } else if (f[0] == "O") {
      if (f.size() != 2) throw ParseError("outlier line needs exactly one record id", line_no);
      if (!cluster_of.emplace(std::string(f[1]), 0).second) throw ParseError("record '" + std::string(f[1]) + "' listed twice", line_no);
    } else if (f[0] == "M") {
      if (f.size() != 5) throw ParseError("merge line needs left, right, new and score", line_no);
      Merge m;
      if (!detail::parse_int(f[1], m.left) || !detail::parse_int(f[2], m.right) || !detail::parse_int(f[3], m.node) ||
          m.left < 0 || m.right < 0 || m.node < 0)
        throw ParseError("merge node ids must be non-negative integers", line_no);
      if (!detail::parse_double(f[4], m.score)) throw ParseError("merge score is not a number", line_no);
      merges.push_back(m);
      merge_lines.push_back(line_no);
    } else {
      throw ParseError("unknown record type '" + std::string(f[0]) + "'", line_no);
    }
  }
  ClusterModel model;
  for (const auto& [id, c] : cluster_of) model.ids.push_back(id);
  for (const auto& [id, c] : cluster_of) model.assignment.push_back(c);
  int k = 0;
  for (const auto& [c, line] : cluster_lines) {
    ++k;
    if (c != k) throw ParseError("cluster ids must run 1..k without gaps", line);
  }
  model.k = static_cast<std::size_t>(k);

  const int n = static_cast<int>(model.ids.size());
  std::vector<std::uint8_t> used(static_cast<std::size_t>(n) + merges.size(), 0);
  std::vector<std::uint8_t> merged_leaf(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < merges.size(); ++i) {
    const auto& m = merges[i];
    if (m.node != n + static_cast<int>(i)) throw ParseError("merge must create node " + std::to_string(n + static_cast<int>(i)), merge_lines[i]);
    if (m.left >= m.node || m.right >= m.node || m.left == m.right || used[static_cast<std::size_t>(m.left)] ||
        used[static_cast<std::size_t>(m.right)])
      throw ParseError("merge references an unknown or already merged node", merge_lines[i]);
    used[static_cast<std::size_t>(m.left)] = used[static_cast<std::size_t>(m.right)] = 1;
    for (int side : {m.left, m.right})
      if (side < n) merged_leaf[static_cast<std::size_t>(side)] = 1;
  }
  // A leaf that never merged and is an outlier had no neighbors at all.
  for (int i = 0; i < n; ++i)
    if (model.assignment[static_cast<std::size_t>(i)] == 0 && !merged_leaf[static_cast<std::size_t>(i)]) model.isolated.push_back(i);
  model.dendrogram = std::move(merges);
  return model;
}

inline void save_clusters(const ClusterModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, format_clusters(model));
}

inline ClusterModel load_clusters(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return parse_clusters(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.reason(), e.line());
  }
}

/// Throws ReferenceError unless the model covers exactly the meta-base ids.
inline void cross_validate(const ClusterModel& model, const MetaBase& meta) {
  std::set<std::string_view> ids;
  for (const auto& r : meta.records) ids.insert(r.id());
  for (const auto& id : model.ids)
    if (!ids.count(id)) throw ReferenceError("clusters reference unknown record '" + id + "'");
  if (ids.size() != model.ids.size()) {
    for (auto id : ids)
      if (!model.leaf_of(id)) throw ReferenceError("record '" + std::string(id) + "' missing from clusters");
  }
}

// ---- labels ----------------------------------------------------------------

inline std::string format_labels(const MetaBase& meta) {
  std::string out;
  for (const auto& r : meta.records)
    if (r.rfp.label) out += r.id() + ' ' + std::string(to_string(*r.rfp.label)) + '\n';
  return out;
}

/// `<image_id> <class>` per line.
inline std::map<std::string, FingerClass> parse_labels(std::string_view text) {
  std::map<std::string, FingerClass> out;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln + 1);
    const auto f = detail::split_fields(lines[ln]);
    if (f.size() != 2) throw ParseError("expected '<image_id> <class>'", line_no);
    const auto c = parse_class(f[1]);
    if (!c) throw ParseError("unknown class '" + std::string(f[1]) + "'", line_no);
    if (!out.emplace(std::string(f[0]), *c).second) throw ParseError("duplicate id '" + std::string(f[0]) + "'", line_no);
  }
  return out;
}

inline std::map<std::string, FingerClass> load_labels(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return parse_labels(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.reason(), e.line());
  }
}

}  // namespace ridgekit
