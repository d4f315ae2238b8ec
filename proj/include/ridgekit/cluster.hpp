#pragma once

// Link-based agglomerative clustering of ridge flow patterns (neighbor
// thresholding, common-neighbor links, goodness-ordered heap merging), the
// classical Lance-Williams linkages over an angular embedding of the codes,
// and the misclassification error used to score a partition.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ridgekit/error.hpp"
#include "ridgekit/parallel.hpp"
#include "ridgekit/rfpcode.hpp"

namespace ridgekit {

struct SimilarityParams {
  double theta = 0.5;  ///< Neighbor threshold on sim.
  std::size_t k = 6;   ///< Number of clusters to stop at.

  /// Goodness exponent f(theta) = (1 - theta) / (1 + theta).
  double f() const { return (1.0 - theta) / (1.0 + theta); }

  void validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");
    if (k < 1) throw InvalidArgument("k must be at least 1");
  }
};

/// Jaccard similarity of the (position, code) item sets.
inline double sim(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("sim: length mismatch");
  if (a.empty()) return 1.0;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) matches += a[i] == b[i];
  return static_cast<double>(matches) / static_cast<double>(2 * a.size() - matches);
}

inline double sim(const EncodedRecord& a, const EncodedRecord& b) {
  if (a.n != b.n) throw InvalidArgument("sim: length mismatch");
  if (a.n == 0) return 1.0;
  const auto m = a.common(b);
  return static_cast<double>(m) / static_cast<double>(2 * a.n - m);
}

inline double sim(const RidgeFlowPattern& a, const RidgeFlowPattern& b) { return sim(a.codes, b.codes); }

/// Neighbor sets and pairwise common-neighbor counts.
class LinkTable {
 public:
  LinkTable() = default;
  explicit LinkTable(std::size_t n) : n_(n), neighbors_(n), links_(n * n, 0) {}

  std::size_t size() const { return n_; }
  const std::vector<std::uint32_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  std::int64_t link(std::size_t i, std::size_t j) const { return links_[i * n_ + j]; }
  std::vector<std::uint32_t> take_links() && { return std::move(links_); }
  bool isolated(std::size_t i) const { return neighbors_[i].empty(); }

 private:
  template <class Records>
  friend LinkTable compute_nhbr(const Records&, const SimilarityParams&);

  std::size_t n_ = 0;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::vector<std::uint32_t> links_;
};

/// N(p) = {q != p : sim(p, q) >= theta}; link(p, q) = |N(p) & N(q)|.
template <class Records>
LinkTable compute_nhbr(const Records& records, const SimilarityParams& params) {
  params.validate();
  const std::size_t n = std::size(records);
  LinkTable t(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && sim(records[i], records[j]) >= params.theta) t.neighbors_[i].push_back(static_cast<std::uint32_t>(j));
  });
  for (std::size_t p = 0; p < n; ++p) {
    const auto& nb = t.neighbors_[p];
    for (std::size_t a = 0; a < nb.size(); ++a) {
      auto* row = t.links_.data() + static_cast<std::size_t>(nb[a]) * n;
      for (std::size_t b = a + 1; b < nb.size(); ++b) ++row[nb[b]];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) t.links_[j * n + i] = t.links_[i * n + j];
  return t;
}

/// link / ((nu + nv)^(1+2f) - nu^(1+2f) - nv^(1+2f)). Symmetric in its sizes
/// down to the last bit, so heap and rescan orders agree exactly.
inline double goodness(std::int64_t link, std::size_t nu, std::size_t nv, double theta) {
  if (link == 0) return 0.0;
  const double e = 1.0 + 2.0 * (1.0 - theta) / (1.0 + theta);
  const double a = static_cast<double>(std::min(nu, nv));
  const double b = static_cast<double>(std::max(nu, nv));
  return static_cast<double>(link) / (std::pow(a + b, e) - std::pow(a, e) - std::pow(b, e));
}

/// One dendrogram step. Leaves are 0..m-1 in model order; merged nodes are
/// numbered m, m+1, ... in merge order. `left` holds the smaller member.
struct Merge {
  int left = 0;
  int right = 0;
  int node = 0;
  double score = 0.0;  ///< goodness (link clustering) or distance (linkages)
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct ClusterModel {
  /// Leaf index -> record id, sorted ascending.
  std::vector<std::string> ids;
  /// Leaf index -> cluster 1..k, or 0 for outliers.
  std::vector<int> assignment;
  std::vector<Merge> dendrogram;
  std::size_t k = 0;
  /// Leaves that had no neighbor at all; never eligible as clusters.
  std::vector<int> isolated;

  std::size_t size() const { return ids.size(); }

  std::vector<int> members(int cluster) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == cluster) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> outliers() const { return members(0); }

  std::optional<int> leaf_of(std::string_view id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<int>(it - ids.begin());
  }

  friend bool operator==(const ClusterModel& a, const ClusterModel& b) {
    return a.ids == b.ids && a.assignment == b.assignment && a.dendrogram == b.dendrogram && a.k == b.k;
  }
};

namespace detail {

/// Leaf order: indices of `records` sorted by id. Ids must be unique.
template <class Records, class IdOf>
std::vector<std::size_t> canonical_order(const Records& records, IdOf id_of) {
  std::vector<std::size_t> order(std::size(records));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return id_of(records[a]) < id_of(records[b]); });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (id_of(records[order[i]]) == id_of(records[order[i - 1]]))
      throw InvalidArgument("duplicate record id " + std::string(id_of(records[order[i]])));
  return order;
}

/// Given final groups (each a sorted leaf list), keeps the k largest eligible
/// ones (ties to the smaller first leaf) and numbers them 1..k by first leaf.
inline std::vector<int> select_clusters(std::size_t n, std::vector<std::vector<int>> groups, std::size_t k,
                                        const std::vector<std::uint8_t>& ineligible) {
  std::vector<std::vector<int>> eligible;
  for (auto& g : groups)
    if (!(g.size() == 1 && ineligible[static_cast<std::size_t>(g[0])])) eligible.push_back(std::move(g));
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a.front() < b.front();
  });
  if (eligible.size() > k) eligible.resize(k);
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<int> assignment(n, 0);
  for (std::size_t c = 0; c < eligible.size(); ++c)
    for (int leaf : eligible[c]) assignment[static_cast<std::size_t>(leaf)] = static_cast<int>(c + 1);
  return assignment;
}

}  // namespace detail

/// Rebuilds the assignment from the dendrogram alone.
inline std::vector<int> replay(const ClusterModel& model) {
  const std::size_t n = model.size();
  std::vector<std::vector<int>> nodes(n + model.dendrogram.size());
  std::vector<std::uint8_t> alive(nodes.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {static_cast<int>(i)};
    alive[i] = 1;
  }
  for (const auto& m : model.dendrogram) {
    const auto l = static_cast<std::size_t>(m.left);
    const auto r = static_cast<std::size_t>(m.right);
    const auto w = static_cast<std::size_t>(m.node);
    if (l >= w || r >= w || w >= nodes.size() || !alive[l] || !alive[r]) throw InvalidArgument("replay: malformed dendrogram");
    nodes[w] = nodes[l];
    nodes[w].insert(nodes[w].end(), nodes[r].begin(), nodes[r].end());
    std::sort(nodes[w].begin(), nodes[w].end());
    alive[l] = alive[r] = 0;
    alive[w] = 1;
  }
  std::vector<std::vector<int>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (alive[i]) groups.push_back(nodes[i]);
  std::vector<std::uint8_t> ineligible(n, 0);
  for (int i : model.isolated) ineligible[static_cast<std::size_t>(i)] = 1;
  return detail::select_clusters(n, std::move(groups), model.k, ineligible);
}

/// Per-merge bookkeeping for callers that want to audit the merge loop.
struct MergeAudit {
  std::int64_t link_mass_before = 0;  ///< sum_x link(x,u) + link(x,v), x outside {u,v}
  std::int64_t link_mass_after = 0;   ///< sum_x link(x,w)
};

/// Goodness-driven agglomeration with a local heap per cluster and a global
/// heap of each cluster's best pair. Records are ordered by id internally,
/// so the result does not depend on input order. Ties go to the higher
/// goodness, then to the smaller (first leaf of u, first leaf of v).
inline ClusterModel fprock_cluster(std::span<const RidgeFlowPattern> records, const SimilarityParams& params,
                                   std::vector<MergeAudit>* audit = nullptr) {
  params.validate();
  const std::size_t n = records.size();
  if (n < params.k) throw InvalidArgument("fewer records than clusters requested");
  const auto order = detail::canonical_order(records, [](const RidgeFlowPattern& r) -> std::string_view { return r.image_id; });

  ClusterModel model;
  model.k = params.k;
  std::vector<EncodedRecord> enc;
  enc.reserve(n);
  for (auto i : order) {
    model.ids.push_back(records[i].image_id);
    enc.emplace_back(records[i].codes);
  }
  for (std::size_t i = 1; i < n; ++i)
    if (enc[i].n != enc[0].n) throw InvalidArgument("records differ in length");

  auto table = compute_nhbr(enc, params);
  std::vector<std::uint8_t> isolated(n, 0);
  std::size_t active = 0;
  for (std::size_t i = 0; i < n; ++i) {
    isolated[i] = table.isolated(i) ? 1 : 0;
    if (isolated[i]) model.isolated.push_back(static_cast<int>(i));
    else ++active;
  }
  if (active < params.k) throw InvalidArgument("fewer non-outlier records than clusters requested");

  // Slot s holds the cluster whose first leaf is s; merging keeps the smaller slot.
  auto link = std::move(table).take_links();
  std::vector<std::size_t> size(n, 1);
  std::vector<int> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};
  std::vector<std::uint8_t> alive(n, 0);
  for (std::size_t i = 0; i < n; ++i) alive[i] = !isolated[i];

  // Entry: (-goodness, first slot, second slot). Slot numbers double as first leaves.
  using Key = std::tuple<double, std::size_t, std::size_t>;
  auto key = [](double g, std::size_t a, std::size_t b) { return Key{-g, std::min(a, b), std::max(a, b)}; };
  auto other_of = [](const Key& k, std::size_t self) { return std::get<1>(k) == self ? std::get<2>(k) : std::get<1>(k); };
  std::vector<std::set<Key>> local(n);
  std::set<std::pair<Key, std::size_t>> global;
  const double e = 1.0 + 2.0 * (1.0 - params.theta) / (1.0 + params.theta);
  std::vector<double> powers(n + 1);
  for (std::size_t i = 0; i <= n; ++i) powers[i] = std::pow(static_cast<double>(i), e);
  auto pair_goodness = [&](std::size_t a, std::size_t b) {
    const auto l = link[a * n + b];
    if (l == 0) return 0.0;
    const auto lo = std::min(size[a], size[b]);
    const auto hi = std::max(size[a], size[b]);
    return static_cast<double>(l) / (powers[lo + hi] - powers[lo] - powers[hi]);
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && alive[j] && link[i * n + j] > 0) local[i].insert(key(pair_goodness(i, j), i, j));
    if (!local[i].empty()) global.emplace(*local[i].begin(), i);
  }

  std::vector<std::size_t> touched;
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t clusters = active;
  int next_node = static_cast<int>(n);
  while (clusters > params.k && !global.empty()) {
    const auto [top, u0] = *global.begin();
    const double g = -std::get<0>(top);
    if (g <= 0.0) break;
    const std::size_t v0 = other_of(top, u0);
    const std::size_t w = std::min(u0, v0);
    const std::size_t gone = std::max(u0, v0);

    global.erase({*local[u0].begin(), u0});
    global.erase({*local[v0].begin(), v0});

    touched.clear();
    for (const auto& [self, entries] : {std::pair{u0, &local[u0]}, std::pair{v0, &local[v0]}})
      for (const auto& en : *entries) {
        const auto x = other_of(en, self);
        if (x != u0 && x != v0 && !seen[x]) {
          seen[x] = 1;
          touched.push_back(x);
        }
      }
    for (auto x : touched) seen[x] = 0;

    MergeAudit au;
    if (audit)
      for (std::size_t x = 0; x < n; ++x)
        if (alive[x] && x != u0 && x != v0) au.link_mass_before += link[u0 * n + x] + link[v0 * n + x];

    for (auto x : touched) {
      if (!local[x].empty()) global.erase({*local[x].begin(), x});
      local[x].erase(key(pair_goodness(x, u0), x, u0));
      local[x].erase(key(pair_goodness(x, v0), x, v0));
    }

    model.dendrogram.push_back({node[w], node[gone], next_node, g});
    node[w] = next_node++;
    for (std::size_t x = 0; x < n; ++x) link[w * n + x] = link[u0 * n + x] + link[v0 * n + x];
    std::fill_n(link.begin() + static_cast<std::ptrdiff_t>(gone * n), n, 0u);
    for (std::size_t x = 0; x < n; ++x) {
      if (!alive[x] && x != gone) continue;
      link[x * n + w] = link[w * n + x];
      link[x * n + gone] = 0;
    }
    link[w * n + w] = 0;
    size[w] += size[gone];
    members[w].insert(members[w].end(), members[gone].begin(), members[gone].end());
    members[gone].clear();
    alive[gone] = 0;
    local[u0].clear();
    local[v0].clear();
    --clusters;

    if (audit) {
      for (std::size_t x = 0; x < n; ++x)
        if (alive[x] && x != w) au.link_mass_after += link[w * n + x];
      audit->push_back(au);
    }

    for (auto x : touched) {
      if (link[x * n + w] > 0) {
        const auto kx = key(pair_goodness(x, w), x, w);
        local[x].insert(kx);
        local[w].insert(kx);
      }
      if (!local[x].empty()) global.emplace(*local[x].begin(), x);
    }
    if (!local[w].empty()) global.emplace(*local[w].begin(), w);
  }

  std::vector<std::vector<int>> groups;
  for (std::size_t s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    auto g = members[s];
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  model.assignment = detail::select_clusters(n, std::move(groups), params.k, isolated);
  return model;
}

enum class Linkage { single, complete, average, weighted, centroid, median, ward };

inline std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::weighted: return "weighted";
    case Linkage::centroid: return "centroid";
    case Linkage::median: return "median";
    case Linkage::ward: return "ward";
  }
  return "complete";
}

inline std::optional<Linkage> parse_linkage(std::string_view s) {
  for (auto l : {Linkage::single, Linkage::complete, Linkage::average, Linkage::weighted, Linkage::centroid,
                 Linkage::median, Linkage::ward})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

/// Each code c becomes the unit vector at angle 2*pi*c/8, scaled by
/// 1/sqrt(n), so codes 7 and 0 are neighbors.
inline std::vector<double> angular_embedding(std::span<const std::uint8_t> codes) {
  std::vector<double> v(codes.size() * 2);
  const double scale = codes.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(codes.size()));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const double a = 2.0 * kPi * codes[i] / 8.0;
    v[2 * i] = std::cos(a) * scale;
    v[2 * i + 1] = std::sin(a) * scale;
  }
  return v;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Classical agglomerative clustering with Lance-Williams updates, stopped at
/// k clusters. Centroid, median and ward work on squared distances; the
/// recorded merge score is always a plain distance. Ties go to the smallest
/// pair of first leaves.
inline ClusterModel linkage_cluster(std::span<const RidgeFlowPattern> records, Linkage linkage, std::size_t k) {
  const std::size_t n = records.size();
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (n < k) throw InvalidArgument("fewer records than clusters requested");
  const auto order = detail::canonical_order(records, [](const RidgeFlowPattern& r) -> std::string_view { return r.image_id; });
  ClusterModel model;
  model.k = k;
  std::vector<std::vector<double>> emb;
  for (auto i : order) {
    model.ids.push_back(records[i].image_id);
    emb.push_back(angular_embedding(records[i].codes));
    if (emb.back().size() != emb.front().size()) throw InvalidArgument("records differ in length");
  }
  const bool squared = linkage == Linkage::centroid || linkage == Linkage::median || linkage == Linkage::ward;
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = squared_distance(emb[i], emb[j]);
      d[i * n + j] = d[j * n + i] = squared ? s : std::sqrt(s);
    }

  std::vector<std::uint8_t> alive(n, 1);
  std::vector<std::size_t> size(n, 1);
  std::vector<int> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nn(n, none);
  auto refresh = [&](std::size_t i) {
    nn[i] = none;
    for (std::size_t j = i + 1; j < n; ++j)
      if (alive[j] && (nn[i] == none || d[i * n + j] < d[i * n + nn[i]])) nn[i] = j;
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  int next_node = static_cast<int>(n);
  for (std::size_t clusters = n; clusters > k; --clusters) {
    std::size_t a = none;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || nn[i] == none) continue;
      if (a == none || d[i * n + nn[i]] < d[a * n + nn[a]]) a = i;
    }
    const std::size_t b = nn[a];
    const double dab = d[a * n + b];
    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    for (std::size_t x = 0; x < n; ++x) {
      if (!alive[x] || x == a || x == b) continue;
      const double dax = d[a * n + x];
      const double dbx = d[b * n + x];
      const double nx = static_cast<double>(size[x]);
      double v = 0.0;
      switch (linkage) {
        case Linkage::single: v = std::min(dax, dbx); break;
        case Linkage::complete: v = std::max(dax, dbx); break;
        case Linkage::average: v = (na * dax + nb * dbx) / (na + nb); break;
        case Linkage::weighted: v = 0.5 * (dax + dbx); break;
        case Linkage::centroid: v = (na * dax + nb * dbx) / (na + nb) - na * nb * dab / ((na + nb) * (na + nb)); break;
        case Linkage::median: v = 0.5 * dax + 0.5 * dbx - 0.25 * dab; break;
        case Linkage::ward: v = ((na + nx) * dax + (nb + nx) * dbx - nx * dab) / (na + nb + nx); break;
      }
      d[a * n + x] = d[x * n + a] = v;
    }
    model.dendrogram.push_back({node[a], node[b], next_node, squared ? std::sqrt(std::max(0.0, dab)) : dab});
    node[a] = next_node++;
    size[a] += size[b];
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    members[b].clear();
    alive[b] = 0;

    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      if (i == a || nn[i] == a || nn[i] == b) {
        refresh(i);
      } else if (i < a && (nn[i] == none || d[i * n + a] < d[i * n + nn[i]] ||
                           (d[i * n + a] == d[i * n + nn[i]] && a < nn[i]))) {
        nn[i] = a;
      }
    }
  }

  std::vector<std::vector<int>> groups;
  for (std::size_t s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    auto g = members[s];
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  model.assignment = detail::select_clusters(n, std::move(groups), k, std::vector<std::uint8_t>(n, 0));
  return model;
}

/// (1/N) * sum_i | |D_i| - |D'_i| | with classes matched to clusters greedily
/// by largest overlap (ties to the smaller class, then the smaller cluster).
/// `truth` holds class indices 0..k-1; `predicted` holds cluster ids 1..k or
/// 0 for unclustered records.
inline double misclassification_error(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InvalidArgument("misclassification_error: size mismatch");
  const std::size_t n = truth.size();
  if (n == 0) return 0.0;
  std::map<int, std::size_t> class_index;
  std::map<int, std::size_t> cluster_index;
  for (std::size_t i = 0; i < n; ++i) {
    class_index.emplace(truth[i], 0);
    if (predicted[i] != 0) cluster_index.emplace(predicted[i], 0);
  }
  if (class_index.size() != cluster_index.size())
    throw InvalidArgument("misclassification_error: " + std::to_string(class_index.size()) + " classes vs " +
                          std::to_string(cluster_index.size()) + " clusters");
  std::size_t idx = 0;
  for (auto& [label, i] : class_index) i = idx++;
  idx = 0;
  for (auto& [label, i] : cluster_index) i = idx++;
  const std::size_t k = class_index.size();
  std::vector<std::size_t> overlap(k * k, 0);
  std::vector<std::size_t> class_size(k, 0);
  std::vector<std::size_t> cluster_size(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = class_index[truth[i]];
    ++class_size[ci];
    if (predicted[i] == 0) continue;
    const auto ki = cluster_index[predicted[i]];
    ++cluster_size[ki];
    ++overlap[ci * k + ki];
  }
  std::vector<std::uint8_t> class_used(k, 0);
  std::vector<std::uint8_t> cluster_used(k, 0);
  std::size_t total = 0;
  for (std::size_t round = 0; round < k; ++round) {
    std::size_t bc = 0;
    std::size_t bk = 0;
    bool found = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (class_used[c]) continue;
      for (std::size_t q = 0; q < k; ++q) {
        if (cluster_used[q]) continue;
        if (!found || overlap[c * k + q] > overlap[bc * k + bk]) {
          bc = c;
          bk = q;
          found = true;
        }
      }
    }
    class_used[bc] = cluster_used[bk] = 1;
    total += class_size[bc] > cluster_size[bk] ? class_size[bc] - cluster_size[bk] : cluster_size[bk] - class_size[bc];
  }
  return static_cast<double>(total) / static_cast<double>(n);
}

/// Same metric with class labels looked up by record id.
inline double misclassification_error(const std::map<std::string, FingerClass>& labels, const ClusterModel& model) {
  std::vector<int> truth;
  truth.reserve(model.size());
  for (const auto& id : model.ids) {
    auto it = labels.find(id);
    if (it == labels.end()) throw ReferenceError("no class label for record " + id);
    truth.push_back(static_cast<int>(it->second));
  }
  return misclassification_error(truth, model.assignment);
}

}  // namespace ridgekit
