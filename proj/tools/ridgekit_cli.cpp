#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridgekit/ridgekit.hpp"

namespace fs = std::filesystem;
using namespace ridgekit;

namespace {

struct PreprocessArgs {
  std::string input;
  std::string out_dir;
  std::string dump_orientation;
  std::string dump_minutiae;
};

struct EnrollArgs {
  std::string dir;
  std::string meta;
};

struct ClusterArgs {
  std::string meta;
  std::string method = "fprock";
  std::string linkage = "complete";
  double theta = 0.5;
  std::size_t k = 6;
  std::string out;
};

struct SearchArgs {
  std::string meta;
  std::string clusters;
  std::string query;
  std::size_t top = 5;
  int tau_prune = 12;
};

struct EvalArgs {
  std::string meta;
  std::string clusters;
  std::string labels;
  std::string queries;
  std::size_t top = 5;
  int tau_prune = 12;
};

struct SynthArgs {
  std::string classes = "arch,tented-arch,left-loop,right-loop,whorl,twin-loop";
  std::size_t per_class = 100;
  double noise = 0.1;
  double query_noise = 0.05;
  std::uint64_t seed = 42;
  std::string out_prefix;
  bool render = false;
  int size = 256;
};

void write_text(const std::string& path, const std::string& text) { write_file_atomic(path, text); }

int cmd_preprocess(const PreprocessArgs& a) {
  const auto img = load_pgm(a.input);
  fs::create_directories(a.out_dir);
  const auto stem = fs::path(a.input).stem().string();
  const fs::path dir(a.out_dir);
  PipelineParams p;
  const auto pre = preprocess(img, p);
  save_pgm(pre.enhanced, dir / (stem + "_enhanced.pgm"));
  save_pgm(to_gray(pre.binary), dir / (stem + "_binary.pgm"));
  save_pgm(to_gray(pre.skeleton), dir / (stem + "_skeleton.pgm"));
  if (!a.dump_orientation.empty()) {
    const auto field = smooth_orientation(estimate_orientation(pre.enhanced, p.orientation, &pre.roi), p.orientation.smooth_coherence);
    std::ostringstream os;
    dump_orientation(field, os);
    write_text(a.dump_orientation, os.str());
  }
  if (!a.dump_minutiae.empty()) {
    std::ostringstream os;
    dump_minutiae(remove_false(extract_minutiae(pre.skeleton), pre.roi, p.minutiae), os);
    write_text(a.dump_minutiae, os.str());
  }
  return 0;
}

int cmd_enroll(const EnrollArgs& a) {
  if (!fs::is_directory(a.dir)) throw Error("not a directory: " + a.dir);
  const auto paths = list_pgm(a.dir);
  if (paths.empty()) std::cerr << "warning: no .pgm files in " << a.dir << "\n";
  const auto res = build_metabase(paths);
  for (const auto& f : res.failures) std::cerr << "failed: " << f.path.string() << ": " << f.reason << "\n";
  save_metabase(res.meta, a.meta);
  std::cerr << "enrolled " << res.meta.size() << " of " << paths.size() << " images\n";
  return 0;
}

int cmd_cluster(const ClusterArgs& a) {
  const auto meta = load_metabase(a.meta);
  std::vector<RidgeFlowPattern> rfps;
  rfps.reserve(meta.size());
  for (const auto& r : meta.records) rfps.push_back(r.rfp);
  ClusterModel model;
  if (a.method == "fprock") {
    SimilarityParams sp;
    sp.theta = a.theta;
    sp.k = a.k;
    model = fprock_cluster(rfps, sp);
  } else {
    const auto l = parse_linkage(a.linkage);
    if (!l) throw InvalidArgument("unknown linkage " + a.linkage);
    model = linkage_cluster(rfps, *l, a.k);
  }
  save_clusters(model, a.out);
  return 0;
}

QueryTuple query_from(const std::string& q, const MetaBase& meta) {
  if (fs::is_regular_file(q)) {
    auto res = process_image(load_pgm(q), fs::path(q).stem().string());
    return QueryTuple::from(res.record);
  }
  const auto row = meta.find(q);
  if (!row) throw ReferenceError("query '" + q + "' is neither an image file nor a record id");
  return QueryTuple::from(meta.records[*row]);
}

int cmd_search(const SearchArgs& a) {
  auto meta = load_metabase(a.meta);
  const auto model = load_clusters(a.clusters);
  cross_validate(model, meta);
  const auto q = query_from(a.query, meta);
  const SearchIndex index(std::move(meta), model);
  SearchOptions opt;
  opt.top_r = a.top;
  opt.tau_prune = a.tau_prune;
  write_query_report(index.search(q, opt), std::cout);
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  auto meta = load_metabase(a.meta);
  const auto model = load_clusters(a.clusters);
  cross_validate(model, meta);
  const auto labels = load_labels(a.labels);
  for (const auto& [id, c] : labels)
    if (!meta.find(id)) throw ReferenceError("label for unknown record '" + id + "'");
  char buf[64];
  std::snprintf(buf, sizeof buf, "M_E %.6f\n", misclassification_error(labels, model));
  std::cout << buf;
  if (!a.queries.empty()) {
    const auto qmeta = load_metabase(a.queries);
    std::vector<LabeledQuery> queries;
    for (const auto& r : qmeta.records) queries.push_back({QueryTuple::from(r), r.id()});
    const SearchIndex index(std::move(meta), model);
    SearchOptions opt;
    opt.top_r = a.top;
    opt.tau_prune = a.tau_prune;
    write_eval_csv(evaluate_search(queries, index, opt), std::cout);
  }
  return 0;
}

std::vector<FingerClass> parse_class_list(const std::string& s) {
  std::vector<FingerClass> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto c = parse_class(item);
    if (!c || *c == FingerClass::unknown) throw CLI::ValidationError("--classes", "unknown class '" + item + "'");
    out.push_back(*c);
  }
  if (out.empty()) throw CLI::ValidationError("--classes", "no classes given");
  return out;
}

int cmd_synth(const SynthArgs& a, const std::vector<FingerClass>& classes) {
  SynthSpec spec;
  spec.classes = classes;
  spec.per_class = a.per_class;
  spec.noise = a.noise;
  spec.query_noise = a.query_noise;
  spec.seed = a.seed;
  const auto data = generate_codes(spec);
  save_metabase(data.meta, a.out_prefix + ".meta");
  write_text(a.out_prefix + ".labels", format_labels(data.meta));
  save_metabase(data.queries, a.out_prefix + ".queries");
  if (a.render) {
    const fs::path dir(a.out_prefix + "_images");
    fs::create_directories(dir);
    const auto& recs = data.meta.records;
    parallel_for(recs.size(), [&](std::size_t i) {
      const auto field = generate_field(*recs[i].rfp.label, a.size, a.size, a.seed + i);
      save_pgm(render_ridges(field.field), dir / (recs[i].id() + ".pgm"));
    });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ridgekit: fingerprint flow coding, clustering and search"};
  app.require_subcommand(1);

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "write enhanced, binary and skeleton stages of one image");
  pre->add_option("input", pa.input, "input PGM")->required();
  pre->add_option("--out-dir", pa.out_dir, "output directory")->required();
  pre->add_option("--dump-orientation", pa.dump_orientation, "write the block orientation field");
  pre->add_option("--dump-minutiae", pa.dump_minutiae, "write the minutiae list");

  EnrollArgs ea;
  auto* enr = app.add_subcommand("enroll", "build a meta-base from a directory of PGM images");
  enr->add_option("image-dir", ea.dir, "directory of .pgm files")->required();
  enr->add_option("--meta", ea.meta, "output meta-base")->required();

  ClusterArgs ca;
  auto* clu = app.add_subcommand("cluster", "partition a meta-base");
  clu->add_option("--meta", ca.meta, "input meta-base")->required();
  clu->add_option("--method", ca.method, "fprock or linkage")->check(CLI::IsMember({"fprock", "linkage"}))->capture_default_str();
  clu->add_option("--linkage", ca.linkage, "linkage for --method linkage")
      ->check(CLI::IsMember({"single", "complete", "average", "weighted", "centroid", "median", "ward"}))
      ->capture_default_str();
  clu->add_option("--theta", ca.theta, "neighbor threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  clu->add_option("--k", ca.k, "number of clusters")->check(CLI::PositiveNumber)->capture_default_str();
  clu->add_option("--out", ca.out, "output clusters file")->required();

  SearchArgs sa;
  auto* sea = app.add_subcommand("search", "identify one query");
  sea->add_option("--meta", sa.meta, "meta-base")->required();
  sea->add_option("--clusters", sa.clusters, "clusters file")->required();
  sea->add_option("--query", sa.query, "record id or PGM image")->required();
  sea->add_option("--top", sa.top, "ranks to report")->check(CLI::PositiveNumber)->capture_default_str();
  sea->add_option("--tau-prune", sa.tau_prune, "agreement threshold for subtree pruning")->check(CLI::Range(0, 32))->capture_default_str();

  EvalArgs va;
  auto* eva = app.add_subcommand("eval", "misclassification error and optional search report");
  eva->add_option("--meta", va.meta, "meta-base")->required();
  eva->add_option("--clusters", va.clusters, "clusters file")->required();
  eva->add_option("--labels", va.labels, "true class labels")->required();
  eva->add_option("--queries", va.queries, "queries in meta-base format, id = true identity");
  eva->add_option("--top", va.top, "rank r for rank-r accuracy")->check(CLI::PositiveNumber)->capture_default_str();
  eva->add_option("--tau-prune", va.tau_prune, "agreement threshold for subtree pruning")->check(CLI::Range(0, 32))->capture_default_str();

  SynthArgs ya;
  auto* syn = app.add_subcommand("synth", "generate a labeled synthetic meta-base");
  syn->add_option("--classes", ya.classes, "comma-separated class list")->capture_default_str();
  syn->add_option("--per-class", ya.per_class, "records per class")->capture_default_str();
  syn->add_option("--noise", ya.noise, "per-code replacement probability")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  syn->add_option("--query-noise", ya.query_noise, "replacement probability for queries")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  syn->add_option("--seed", ya.seed, "random seed")->capture_default_str();
  syn->add_option("--out-prefix", ya.out_prefix, "prefix for .meta, .labels and .queries")->required();
  syn->add_flag("--render", ya.render, "also render one ridge image per record");
  syn->add_option("--size", ya.size, "rendered image side in pixels")->check(CLI::Range(64, 4096))->capture_default_str();

  std::vector<FingerClass> classes;
  try {
    app.parse(argc, argv);
    if (syn->parsed()) classes = parse_class_list(ya.classes);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(pa);
    if (enr->parsed()) return cmd_enroll(ea);
    if (clu->parsed()) return cmd_cluster(ca);
    if (sea->parsed()) return cmd_search(sa);
    if (eva->parsed()) return cmd_eval(va);
    if (syn->parsed()) return cmd_synth(ya, classes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
