#pragma once

// Two-phase identification over a clustered meta-base: cluster selection by
// agreement with profile medoids, walking a profile hierarchy with subtree
// pruning, then tuple-distance ranking inside the selected clusters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridgekit/cluster.hpp"
#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/orientation.hpp"
#include "ridgekit/rfpcode.hpp"

namespace ridgekit {

/// Ridges crossed by the horizontal scanline through the core: the number of
/// 0->1 transitions along that row, counting only ROI pixels.
inline int compute_beta(const BinaryImage& skeleton, const CorePoint& core) {
  if (skeleton.width <= 0 || skeleton.height <= 0) return 0;
  const int y = std::clamp(static_cast<int>(std::lround(core.y)), 0, skeleton.height - 1);
  int count = 0;
  std::uint8_t prev = 0;
  for (int x = 0; x < skeleton.width; ++x) {
    const std::uint8_t v = skeleton.get(x, y) && skeleton.in_roi(x, y);
    if (v && !prev) ++count;
    prev = v;
  }
  return count;
}

/// Positions with equal codes.
inline int agreements(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("agreements: length mismatch");
  int c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += a[i] == b[i];
  return c;
}

inline int agreements(const RidgeFlowPattern& a, const RidgeFlowPattern& b) { return agreements(a.codes, b.codes); }

inline int code_hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return static_cast<int>(a.size()) - agreements(a, b);
}

struct RfpProfile {
  int cluster_id = 0;  ///< 1..k for leaf clusters, 0 for internal nodes
  std::string medoid_id;
  RidgeFlowPattern medoid;
  double alpha_mean = 0.0;
  double beta_mean = 0.0;
  std::map<std::uint16_t, std::size_t> delta_hist;
  std::size_t size = 0;
};

struct ProfileNode {
  RfpProfile profile;
  std::vector<int> children;            ///< node indices; empty for leaf clusters
  std::vector<std::size_t> members;     ///< meta-base indices, ascending id
};

/// Leaf profiles for the k clusters plus internal nodes joining them up to a root.
struct ProfileHierarchy {
  std::vector<ProfileNode> nodes;
  int root = -1;
  std::vector<int> leaf_node;                 ///< cluster id - 1 -> node index
  std::vector<std::size_t> outliers;          ///< meta-base indices in no cluster

  std::size_t cluster_count() const { return leaf_node.size(); }
  const ProfileNode& leaf(int cluster_id) const { return nodes[static_cast<std::size_t>(leaf_node[static_cast<std::size_t>(cluster_id - 1)])]; }
};

namespace detail {

/// Member with the least summed code mismatch to the others; ties to the smaller id.
inline std::size_t medoid_of(const MetaBase& meta, std::span<const std::size_t> members) {
  std::size_t best = members.front();
  long best_cost = -1;
  for (auto i : members) {
    long cost = 0;
    for (auto j : members) cost += code_hamming(meta.records[i].rfp.codes, meta.records[j].rfp.codes);
    if (best_cost < 0 || cost < best_cost || (cost == best_cost && meta.records[i].id() < meta.records[best].id())) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

inline RfpProfile make_profile(const MetaBase& meta, std::span<const std::size_t> members, int cluster_id) {
  RfpProfile p;
  p.cluster_id = cluster_id;
  p.size = members.size();
  const auto m = medoid_of(meta, members);
  p.medoid_id = meta.records[m].id();
  p.medoid = meta.records[m].rfp;
  double a = 0.0;
  double b = 0.0;
  for (auto i : members) {
    a += meta.records[i].alpha;
    b += meta.records[i].beta;
    ++p.delta_hist[meta.records[i].delta.value()];
  }
  p.alpha_mean = a / static_cast<double>(members.size());
  p.beta_mean = b / static_cast<double>(members.size());
  return p;
}

}  // namespace detail

/// One profile per final cluster. Above the clusters, the two nodes with the
/// closest medoids are joined repeatedly (ties to the smaller node indices)
/// and each joined node gets a profile over all of its records.
inline ProfileHierarchy build_profiles(const ClusterModel& model, const MetaBase& meta) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < meta.size(); ++i) index.emplace(meta.records[i].id(), i);
  if (index.size() != model.size()) throw ReferenceError("cluster model and meta-base hold different record sets");
  std::vector<std::vector<std::size_t>> clusters(model.k);
  ProfileHierarchy h;
  for (std::size_t leaf = 0; leaf < model.size(); ++leaf) {
    auto it = index.find(model.ids[leaf]);
    if (it == index.end()) throw ReferenceError("record " + model.ids[leaf] + " missing from meta-base");
    const int c = model.assignment[leaf];
    if (c == 0) h.outliers.push_back(it->second);
    else clusters[static_cast<std::size_t>(c - 1)].push_back(it->second);
  }
  std::vector<int> open;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) continue;
    h.leaf_node.resize(c + 1, -1);
    h.leaf_node[c] = static_cast<int>(h.nodes.size());
    open.push_back(static_cast<int>(h.nodes.size()));
    h.nodes.push_back({detail::make_profile(meta, clusters[c], static_cast<int>(c + 1)), {}, clusters[c]});
  }
  if (open.empty()) return h;
  while (open.size() > 1) {
    std::size_t bi = 0;
    std::size_t bj = 1;
    int best = -1;
    for (std::size_t i = 0; i < open.size(); ++i)
      for (std::size_t j = i + 1; j < open.size(); ++j) {
        const int d = code_hamming(h.nodes[static_cast<std::size_t>(open[i])].profile.medoid.codes,
                                   h.nodes[static_cast<std::size_t>(open[j])].profile.medoid.codes);
        if (best < 0 || d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    const int a = open[bi];
    const int b = open[bj];
    ProfileNode joined;
    joined.children = {a, b};
    joined.members = h.nodes[static_cast<std::size_t>(a)].members;
    const auto& mb = h.nodes[static_cast<std::size_t>(b)].members;
    joined.members.insert(joined.members.end(), mb.begin(), mb.end());
    std::sort(joined.members.begin(), joined.members.end(),
              [&](std::size_t x, std::size_t y) { return meta.records[x].id() < meta.records[y].id(); });
    joined.profile = detail::make_profile(meta, joined.members, 0);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(bj));
    open[bi] = static_cast<int>(h.nodes.size());
    h.nodes.push_back(std::move(joined));
  }
  h.root = open.front();
  return h;
}

struct PhaseOne {
  std::vector<int> clusters;   ///< ascending cluster ids
  int agreements = 0;          ///< best leaf agreement
  std::size_t profile_comparisons = 0;
  bool fell_back = false;
};

/// Descends from the root, skipping any subtree whose node medoid agrees with
/// the candidate in fewer than tau_prune positions, and returns every reached
/// cluster with the highest agreement. If nothing is reached, all clusters are
/// compared.
inline PhaseOne global_search(const RidgeFlowPattern& candidate, const ProfileHierarchy& h, int tau_prune = 12) {
  PhaseOne out;
  if (h.root < 0) return out;
  std::vector<std::pair<int, int>> reached;
  std::vector<int> stack{h.root};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    const auto& node = h.nodes[static_cast<std::size_t>(n)];
    const int a = agreements(candidate, node.profile.medoid);
    ++out.profile_comparisons;
    if (a < tau_prune) continue;
    if (node.children.empty()) reached.emplace_back(node.profile.cluster_id, a);
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
  }
  if (reached.empty()) {
    out.fell_back = true;
    for (std::size_t c = 0; c < h.leaf_node.size(); ++c) {
      if (h.leaf_node[c] < 0) continue;
      reached.emplace_back(static_cast<int>(c + 1), agreements(candidate, h.leaf(static_cast<int>(c + 1)).profile.medoid));
      ++out.profile_comparisons;
    }
  }
  for (const auto& [c, a] : reached) out.agreements = std::max(out.agreements, a);
  for (const auto& [c, a] : reached)
    if (a == out.agreements) out.clusters.push_back(c);
  std::sort(out.clusters.begin(), out.clusters.end());
  return out;
}

struct QueryTuple {
  int alpha = 0;
  int beta = 0;
  RidgeFlowPattern gamma;
  CoreCode delta;

  static QueryTuple from(const MetaRecord& r) { return {r.alpha, r.beta, r.rfp, r.delta}; }
};

struct DistanceWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double delta = 1.0;
};

struct Ranked {
  std::string record_id;
  double distance = 0.0;
};

struct SearchResult {
  std::vector<Ranked> ranked;
  std::vector<int> class_chosen;
  std::size_t comparisons = 0;           ///< records scored in phase II
  std::size_t profile_comparisons = 0;   ///< medoid agreements computed in phase I
  double penetration = 0.0;              ///< (comparisons + profile comparisons) / database size, at most 1

  std::size_t total_comparisons() const { return comparisons + profile_comparisons; }
};

struct SearchOptions {
  int tau_prune = 12;
  std::size_t top_r = 5;   ///< 0 keeps every scored record
  DistanceWeights weights;
};

/// Read-only search structure over one meta-base and its clustering.
class SearchIndex {
 public:
  SearchIndex(MetaBase meta, const ClusterModel& model) : meta_(std::move(meta)), hierarchy_(build_profiles(model, meta_)) {
    for (const auto& r : meta_.records) {
      alpha_max_ = std::max(alpha_max_, static_cast<double>(r.alpha));
      beta_max_ = std::max(beta_max_, static_cast<double>(r.beta));
      embedding_.push_back(angular_embedding(r.rfp.codes));
    }
    cluster_of_.assign(meta_.size(), 0);
    for (std::size_t c = 0; c < hierarchy_.leaf_node.size(); ++c)
      if (hierarchy_.leaf_node[c] >= 0)
        for (auto i : hierarchy_.leaf(static_cast<int>(c + 1)).members) cluster_of_[i] = static_cast<int>(c + 1);
  }

  const MetaBase& meta() const { return meta_; }
  const ProfileHierarchy& hierarchy() const { return hierarchy_; }
  double alpha_max() const { return alpha_max_; }
  double beta_max() const { return beta_max_; }
  /// Cluster id of a meta-base row, 0 for outliers.
  int cluster_of(std::size_t row) const { return cluster_of_[row]; }

  double distance(const QueryTuple& q, const std::vector<double>& q_emb, std::size_t row, const DistanceWeights& w) const {
    const auto& r = meta_.records[row];
    const double da = (q.alpha - r.alpha) / alpha_max_;
    const double db = (q.beta - r.beta) / beta_max_;
    const double dg = squared_distance(q_emb, embedding_[row]);
    const double dd = hamming(q.delta, r.delta) / 10.0;
    return std::sqrt(w.alpha * da * da + w.beta * db * db + w.gamma * dg + w.delta * dd * dd);
  }

  /// Scores the given rows and ranks them by distance, then id.
  SearchResult local_search(const QueryTuple& q, std::span<const std::size_t> rows, const SearchOptions& opt) const {
    if (!meta_.empty() && q.gamma.codes.size() != meta_.records.front().rfp.codes.size())
      throw InvalidArgument("query code length does not match the meta-base");
    SearchResult res;
    const auto q_emb = angular_embedding(q.gamma.codes);
    res.ranked.reserve(rows.size());
    for (auto row : rows) res.ranked.push_back({meta_.records[row].id(), distance(q, q_emb, row, opt.weights)});
    res.comparisons = rows.size();
    std::sort(res.ranked.begin(), res.ranked.end(), [](const Ranked& a, const Ranked& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.record_id < b.record_id;
    });
    if (opt.top_r > 0 && res.ranked.size() > opt.top_r) res.ranked.resize(opt.top_r);
    return res;
  }

  /// Phase I over the profile hierarchy, then phase II over the chosen
  /// clusters' members plus every outlier record.
  SearchResult search(const QueryTuple& q, const SearchOptions& opt = {}) const {
    const auto p1 = global_search(q.gamma, hierarchy_, opt.tau_prune);
    std::vector<std::size_t> rows = hierarchy_.outliers;
    for (int c : p1.clusters) {
      const auto& m = hierarchy_.leaf(c).members;
      rows.insert(rows.end(), m.begin(), m.end());
    }
    auto res = local_search(q, rows, opt);
    res.class_chosen = p1.clusters;
    res.profile_comparisons = p1.profile_comparisons;
    res.penetration = penetration(res.total_comparisons());
    return res;
  }

  /// Full scan with the same distance.
  SearchResult linear_search(const QueryTuple& q, const SearchOptions& opt = {}) const {
    std::vector<std::size_t> rows(meta_.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    auto res = local_search(q, rows, opt);
    res.penetration = penetration(res.total_comparisons());
    return res;
  }

 private:
  double penetration(std::size_t comparisons) const {
    if (meta_.empty()) return 0.0;
    return std::min(1.0, static_cast<double>(comparisons) / static_cast<double>(meta_.size()));
  }

  MetaBase meta_;
  ProfileHierarchy hierarchy_;
  std::vector<std::vector<double>> embedding_;
  std::vector<int> cluster_of_;
  double alpha_max_ = 1.0;
  double beta_max_ = 1.0;
};

struct LabeledQuery {
  QueryTuple tuple;
  std::string true_id;
};

struct ModeStats {
  double rank1_acc = 0.0;
  double rankr_acc = 0.0;
  double mean_penetration = 0.0;
  double mean_comparisons = 0.0;
};

struct EvalReport {
  std::size_t db_size = 0;
  std::size_t queries = 0;
  std::size_t top_r = 0;
  ModeStats clustered;
  ModeStats linear;
  double phase1_hit_rate = 0.0;        ///< true record inside a chosen cluster or an outlier
  double conditional_agreement = 0.0;  ///< clustered rank-1 == linear rank-1, among phase-I hits
};

inline EvalReport evaluate_search(std::span<const LabeledQuery> queries, const SearchIndex& index, const SearchOptions& opt = {}) {
  EvalReport rep;
  rep.db_size = index.meta().size();
  rep.queries = queries.size();
  rep.top_r = opt.top_r;
  if (queries.empty()) return rep;
  std::size_t hits = 0;
  std::size_t agree = 0;
  auto tally = [](ModeStats& s, const SearchResult& r, const std::string& truth) {
    if (!r.ranked.empty() && r.ranked.front().record_id == truth) s.rank1_acc += 1.0;
    if (std::any_of(r.ranked.begin(), r.ranked.end(), [&](const Ranked& x) { return x.record_id == truth; })) s.rankr_acc += 1.0;
    s.mean_penetration += r.penetration;
    s.mean_comparisons += static_cast<double>(r.total_comparisons());
  };
  for (const auto& q : queries) {
    const auto row = index.meta().find(q.true_id);
    if (!row) throw ReferenceError("query identity " + q.true_id + " not in meta-base");
    const auto c = index.search(q.tuple, opt);
    const auto l = index.linear_search(q.tuple, opt);
    tally(rep.clustered, c, q.true_id);
    tally(rep.linear, l, q.true_id);
    const int cl = index.cluster_of(*row);
    if (cl == 0 || std::binary_search(c.class_chosen.begin(), c.class_chosen.end(), cl)) {
      ++hits;
      if (!c.ranked.empty() && !l.ranked.empty() && c.ranked.front().record_id == l.ranked.front().record_id) ++agree;
    }
  }
  const double n = static_cast<double>(queries.size());
  for (auto* s : {&rep.clustered, &rep.linear}) {
    s->rank1_acc /= n;
    s->rankr_acc /= n;
    s->mean_penetration /= n;
    s->mean_comparisons /= n;
  }
  rep.phase1_hit_rate = static_cast<double>(hits) / n;
  rep.conditional_agreement = hits ? static_cast<double>(agree) / static_cast<double>(hits) : 0.0;
  return rep;
}

inline void write_eval_csv(const EvalReport& rep, std::ostream& os) {
  char buf[256];
  os << "db_size,mode,rank1_acc,rankr_acc,mean_penetration,mean_comparisons\n";
  for (const auto& [mode, s] : {std::pair<const char*, const ModeStats&>{"clustered", rep.clustered}, {"linear", rep.linear}}) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f,%.6f,%.3f\n", rep.db_size, mode, s.rank1_acc, s.rankr_acc,
                  s.mean_penetration, s.mean_comparisons);
    os << buf;
  }
}

inline void write_query_report(const SearchResult& res, std::ostream& os) {
  char buf[256];
  os << "rank record_id distance\n";
  for (std::size_t i = 0; i < res.ranked.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %s %.6f\n", i + 1, res.ranked[i].record_id.c_str(), res.ranked[i].distance);
    os << buf;
  }
  std::string classes;
  for (std::size_t i = 0; i < res.class_chosen.size(); ++i) {
    if (i) classes += ',';
    classes += std::to_string(res.class_chosen[i]);
  }
  if (classes.empty()) classes = "-";
  std::snprintf(buf, sizeof buf, "class=%s comparisons=%zu penetration=%.4f\n", classes.c_str(), res.comparisons, res.penetration);
  os << buf;
}

}  // namespace ridgekit
