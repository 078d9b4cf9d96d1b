#include "fgd/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "fgd/rng.hpp"

namespace fgd {

using nlohmann::json;

namespace {

const char* to_string(DedupPolicy p) { return p == DedupPolicy::KeepLatest ? "keep_latest" : "keep_first"; }
const char* to_string(EdgeWeighting w) { return w == EdgeWeighting::Binary ? "binary" : "co_review_count"; }
const char* to_string(NeighborNormalization m) {
  return m == NeighborNormalization::PairMean ? "pair_mean" : "literal";
}

DedupPolicy parse_dedup(const std::string& s) {
  if (s == "keep_latest") return DedupPolicy::KeepLatest;
  if (s == "keep_first") return DedupPolicy::KeepFirst;
  throw std::invalid_argument("unknown dedup policy '" + s + "'");
}
EdgeWeighting parse_weighting(const std::string& s) {
  if (s == "binary") return EdgeWeighting::Binary;
  if (s == "co_review_count") return EdgeWeighting::CoReviewCount;
  throw std::invalid_argument("unknown edge weighting '" + s + "'");
}
NeighborNormalization parse_nt(const std::string& s) {
  if (s == "pair_mean") return NeighborNormalization::PairMean;
  if (s == "literal") return NeighborNormalization::Literal;
  throw std::invalid_argument("unknown neighbor normalization '" + s + "'");
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("unknown config key '" + where + key + "'");
  }
}

}  // namespace

ParseOptions PipelineConfig::parse_options() const {
  ParseOptions p;
  p.delimiter = delimiter();
  p.header = header;
  p.fake_labels = fake_labels;
  p.genuine_labels = genuine_labels;
  return p;
}

TrainConfig PipelineConfig::effective_train() const {
  TrainConfig t = train;
  t.seed = derive_seed(seed, "train");
  return t;
}

SynthConfig PipelineConfig::effective_synth() const {
  SynthConfig s = synth;
  s.seed = derive_seed(seed, "synth");
  return s;
}

void PipelineConfig::validate() const {
  if (format != "csv" && format != "tsv") throw std::invalid_argument("format must be csv or tsv");
  if (min_co_review < 1) throw std::invalid_argument("min_co_review must be >= 1");
  if (group.min_support < 1) throw std::invalid_argument("min_support must be >= 1");
  if (indicators.burst_window_days < 1) throw std::invalid_argument("burst_window_days must be >= 1");
  if (!(compactness_weight >= 0.0)) throw std::invalid_argument("compactness_weight must be >= 0");
  train.validate();
}

json to_json(const PipelineConfig& c) {
  json planted = json::array();
  for (const auto& g : c.synth.planted) {
    planted.push_back({{"size", g.size},
                       {"target_products", g.target_products},
                       {"rating", g.rating},
                       {"burst_window_days", g.burst_window_days}});
  }
  return {
      {"input", c.input.string()},
      {"format", c.format},
      {"header", c.header},
      {"fake_labels", c.fake_labels},
      {"genuine_labels", c.genuine_labels},
      {"dedup", to_string(c.dedup)},
      {"graph", {{"min_co_review", c.min_co_review}, {"weighting", to_string(c.weighting)}}},
      {"train",
       {{"k", c.train.k},
        {"hidden_widths", c.train.hidden_widths},
        {"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"dropout_rate", c.train.dropout_rate},
        {"collapse_weight", c.train.collapse_weight},
        {"assign_threshold", c.train.assign_threshold},
        {"add_self_loops", c.train.add_self_loops},
        {"positional_dims", c.train.positional_dims},
        {"positional_smoothing", c.train.positional_smoothing}}},
      {"group",
       {{"min_support", c.group.min_support},
        {"intersect_all", c.group.intersect_all},
        {"neighbor_mode", to_string(c.indicators.neighbor_mode)},
        {"burst_window_days", c.indicators.burst_window_days}}},
      {"ranking", {{"size_floor", c.size_floor}, {"compactness_weight", c.compactness_weight}}},
      {"out_dir", c.out_dir.string()},
      {"seed", c.seed},
      {"dump_graph", c.dump_graph},
      {"save_checkpoint", c.save_checkpoint},
      {"synth",
       {{"n_reviewers", c.synth.n_reviewers},
        {"n_products", c.synth.n_products},
        {"reviews_per_reviewer", c.synth.reviews_per_reviewer},
        {"horizon_days", c.synth.horizon_days},
        {"rating_noise", c.synth.rating_noise},
        {"planted", planted}}},
  };
}

void merge_json(PipelineConfig& c, const json& j) {
  reject_unknown(j,
                 {"input", "format", "header", "fake_labels", "genuine_labels", "dedup", "graph", "train", "group",
                  "ranking", "out_dir", "seed", "dump_graph", "save_checkpoint", "synth"},
                 "");
  if (j.contains("input")) c.input = j.at("input").get<std::string>();
  take(j, "format", c.format);
  take(j, "header", c.header);
  take(j, "fake_labels", c.fake_labels);
  take(j, "genuine_labels", c.genuine_labels);
  if (j.contains("dedup")) c.dedup = parse_dedup(j.at("dedup").get<std::string>());
  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    reject_unknown(g, {"min_co_review", "weighting"}, "graph.");
    take(g, "min_co_review", c.min_co_review);
    if (g.contains("weighting")) c.weighting = parse_weighting(g.at("weighting").get<std::string>());
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"k", "hidden_widths", "learning_rate", "epochs", "dropout_rate", "collapse_weight",
                    "assign_threshold", "add_self_loops", "positional_dims", "positional_smoothing"},
                   "train.");
    take(t, "k", c.train.k);
    take(t, "hidden_widths", c.train.hidden_widths);
    take(t, "learning_rate", c.train.learning_rate);
    take(t, "epochs", c.train.epochs);
    take(t, "dropout_rate", c.train.dropout_rate);
    take(t, "collapse_weight", c.train.collapse_weight);
    take(t, "assign_threshold", c.train.assign_threshold);
    take(t, "add_self_loops", c.train.add_self_loops);
    take(t, "positional_dims", c.train.positional_dims);
    take(t, "positional_smoothing", c.train.positional_smoothing);
  }
  if (j.contains("group")) {
    const auto& g = j.at("group");
    reject_unknown(g, {"min_support", "intersect_all", "neighbor_mode", "burst_window_days"}, "group.");
    take(g, "min_support", c.group.min_support);
    take(g, "intersect_all", c.group.intersect_all);
    if (g.contains("neighbor_mode")) c.indicators.neighbor_mode = parse_nt(g.at("neighbor_mode").get<std::string>());
    take(g, "burst_window_days", c.indicators.burst_window_days);
  }
  if (j.contains("ranking")) {
    const auto& r = j.at("ranking");
    reject_unknown(r, {"size_floor", "compactness_weight"}, "ranking.");
    take(r, "size_floor", c.size_floor);
    take(r, "compactness_weight", c.compactness_weight);
  }
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  take(j, "seed", c.seed);
  take(j, "dump_graph", c.dump_graph);
  take(j, "save_checkpoint", c.save_checkpoint);
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    reject_unknown(s, {"n_reviewers", "n_products", "reviews_per_reviewer", "horizon_days", "rating_noise", "planted"},
                   "synth.");
    take(s, "n_reviewers", c.synth.n_reviewers);
    take(s, "n_products", c.synth.n_products);
    take(s, "reviews_per_reviewer", c.synth.reviews_per_reviewer);
    take(s, "horizon_days", c.synth.horizon_days);
    take(s, "rating_noise", c.synth.rating_noise);
    if (s.contains("planted")) {
      c.synth.planted.clear();
      for (const auto& g : s.at("planted")) {
        PlantedGroupSpec spec;
        take(g, "size", spec.size);
        take(g, "target_products", spec.target_products);
        take(g, "rating", spec.rating);
        take(g, "burst_window_days", spec.burst_window_days);
        c.synth.planted.push_back(spec);
      }
    }
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  PipelineConfig cfg;
  merge_json(cfg, json::parse(in));
  return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
  return buf;
}

// ---------------------------------------------------------------------------

IngestResult ingest(const PipelineConfig& cfg) {
  IngestResult r;
  try {
    r.parsed = parse_reviews(cfg.input, cfg.parse_options());
  } catch (const IoError& e) {
    throw StageError("ingest", e.what());
  }
  if (r.parsed.table.empty()) throw StageError("ingest", "no valid reviews in " + cfg.input.string());
  r.table = dedupe(r.parsed.table, cfg.dedup);
  r.duplicates_removed = r.parsed.table.size() - r.table.size();
  return r;
}

IngestSummary summarize(const IngestResult& in) {
  IngestSummary s;
  s.rows = in.parsed.rows_read;
  s.parse_errors = in.parsed.errors.size();
  s.duplicates_removed = in.duplicates_removed;
  s.reviews = in.table.size();
  s.reviewers = in.table.reviewer_count();
  s.products = in.table.product_count();
  for (const auto& r : in.table.reviews()) {
    if (r.label == Label::Fake) ++s.fake;
    else if (r.label == Label::Genuine) ++s.genuine;
    else ++s.unknown;
  }
  s.labels = s.fake + s.genuine > 0;
  return s;
}

void write_ingest_summary(std::ostream& out, const IngestSummary& s, const std::vector<RowError>& errors) {
  out << "rows: " << s.rows << '\n'
      << "parse_errors: " << s.parse_errors << '\n'
      << "duplicates_removed: " << s.duplicates_removed << '\n'
      << "reviews: " << s.reviews << '\n'
      << "reviewers: " << s.reviewers << '\n'
      << "products: " << s.products << '\n';
  if (s.labels) {
    out << "labels: fake=" << s.fake << " genuine=" << s.genuine << " unknown=" << s.unknown << '\n';
  } else {
    out << "labels: none; evaluation disabled\n";
  }
  for (const auto& e : errors) out << "error line " << e.line << ": " << e.message << '\n';
}

// ---------------------------------------------------------------------------

std::vector<CandidateGroup> extract_groups(const std::vector<Cluster>& clusters, const PRGraph& graph,
                                           const ReviewTable& table, const GroupOptions& opts) {
  std::vector<CandidateGroup> out;
  for (const auto& c : clusters) {
    if (auto g = extract_group(c.nodes, c.id, graph, table, opts)) out.push_back(std::move(*g));
  }
  return out;
}

namespace {

struct Clustering {
  PRGraph graph;
  TrainResult training;
  std::vector<Cluster> clusters;
};

Clustering cluster(const ReviewTable& table, const PipelineConfig& cfg, const TrainConfig& train_cfg) {
  Clustering out;
  out.graph = build_graph(table, cfg.min_co_review);
  if (out.graph.edges.empty()) {
    throw StageError("graph", "no edges at min_co_review=" + std::to_string(cfg.min_co_review));
  }
  try {
    out.training = train(out.graph, train_cfg, cfg.weighting);
  } catch (const std::exception& e) {
    throw StageError("train", e.what());
  }
  out.clusters = assign_clusters(out.training.assignment, train_cfg.assign_threshold);
  return out;
}

}  // namespace

DetectResult detect(const ReviewTable& table, const PipelineConfig& cfg) {
  cfg.validate();
  auto [graph, training, clusters] = cluster(table, cfg, cfg.effective_train());

  auto groups = extract_groups(clusters, graph, table, cfg.group);
  if (groups.empty()) throw StageError("extract", "no candidate groups formed");

  const auto stats = product_stats(table);
  std::vector<std::pair<CandidateGroup, IndicatorVector>> measured;
  measured.reserve(groups.size());
  for (auto& g : groups) {
    IndicatorVector v = compute_indicators(g, table, stats, cfg.indicators);
    measured.emplace_back(std::move(g), v);
  }

  DetectResult result;
  result.ranking = rank_groups(normalize_scores(std::move(measured), cfg.compactness_weight), cfg.size_floor);
  if (table.has_labels()) result.eval = evaluate(result.ranking, table);
  result.graph = std::move(graph);
  result.training = std::move(training);
  result.clusters = std::move(clusters);
  return result;
}

std::vector<SweepRow> cluster_sweep(const ReviewTable& table, const std::vector<int>& k_list,
                                    const PipelineConfig& cfg) {
  if (!table.has_labels()) throw StageError("sweep", "cluster sweep needs labelled reviews");
  std::vector<SweepRow> rows;
  for (int k : k_list) {
    TrainConfig t = cfg.effective_train();
    t.k = k;
    const auto c = cluster(table, cfg, t);
    std::vector<double> precisions;
    for (const auto& g : extract_groups(c.clusters, c.graph, table, cfg.group)) {
      if (auto p = group_precision(g, table)) precisions.push_back(*p);
    }
    std::sort(precisions.begin(), precisions.end(), std::greater<>());
    SweepRow row;
    row.k = k;
    row.groups = precisions.size();
    row.partial = precisions.size() < kSweepTopGroups;
    const std::size_t top = std::min(precisions.size(), kSweepTopGroups);
    double sum = 0.0;
    for (std::size_t i = 0; i < top; ++i) sum += precisions[i];
    row.mean_precision = top ? sum / static_cast<double>(top) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

void write_ranked_jsonl(std::ostream& out, const Ranking& ranking, const ReviewTable& table) {
  std::size_t headline_rank = 0;
  for (std::size_t i = 0; i < ranking.all.size(); ++i) {
    const auto& s = ranking.all[i];
    const bool headline = s.group.size() >= ranking.size_floor;
    json members = json::array();
    for (ReviewerId m : s.group.members) members.push_back(table.name(m));
    json rec = {
        {"rank", i + 1},
        {"headline_rank", headline ? json(++headline_rank) : json(nullptr)},
        {"group_id", s.group.id},
        {"size", s.group.size()},
        {"products", s.group.products.size()},
        {"omega", s.omega},
        {"pi_hat", s.normalized.pi},
        {"avd_hat", s.normalized.avd},
        {"bst_hat", s.normalized.bst},
        {"members", std::move(members)},
    };
    if (s.precision) rec["precision"] = *s.precision;
    out << rec.dump() << '\n';
  }
}

void write_indicator_dump(std::ostream& out, const Ranking& ranking, char d) {
  out << "group_id" << d << "size" << d << "products" << d << "rt" << d << "pt" << d << "nt" << d << "pi" << d
      << "avg_avd" << d << "avg_bst" << d << "avg_avd_raw\n";
  for (const auto& s : ranking.all) {
    const auto& v = s.raw;
    out << s.group.id << d << s.group.size() << d << s.group.products.size() << d << fixed(v.rt, 9) << d
        << fixed(v.pt, 9) << d << fixed(v.nt, 9) << d << fixed(v.pi, 9) << d << fixed(v.avg_avd, 9) << d
        << fixed(v.avg_bst, 9) << d << fixed(v.avg_avd_raw, 9) << '\n';
  }
}

void write_summary(std::ostream& out, const Ranking& ranking, const std::optional<EvalReport>& eval) {
  out << "candidate groups: " << ranking.all.size() << '\n'
      << "groups with size >= " << ranking.size_floor << ": " << ranking.headline.size() << "\n\n";
  out << "Method\tGroup Size\tPrecision\n";
  if (ranking.headline.empty()) {
    out << "REAL\t-\t-\n";
  } else {
    const auto& top = ranking.all[ranking.headline.front()];
    out << "REAL\t" << top.group.size() << '\t' << (top.precision ? fixed(*top.precision, 4) : "n/a") << '\n';
  }
  out << "\nsize distribution (headline groups)\n";
  const SizeHistogram h = eval ? eval->histogram : size_distribution(ranking);
  for (const auto& [bucket, count] : h) {
    out << bucket << '-' << bucket + kHistogramBucket - 1 << '\t' << count << '\n';
  }
}

Ranking read_ranked_jsonl(std::istream& in, const ReviewTable& table, std::size_t size_floor,
                          std::size_t* unmatched) {
  Ranking ranking;
  ranking.size_floor = size_floor;
  std::size_t missing = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      std::vector<ReviewerId> members;
      for (const auto& name : rec.at("members")) {
        if (auto id = table.find_reviewer(name.get<std::string>())) members.push_back(*id);
        else ++missing;
      }
      ScoredGroup s;
      s.group = make_group(rec.at("group_id").get<std::string>(), -1, std::move(members), table);
      s.omega = rec.value("omega", 0.0);
      s.normalized = {rec.value("pi_hat", 0.0), rec.value("avd_hat", 0.0), rec.value("bst_hat", 0.0)};
      if (s.group.size() >= size_floor) ranking.headline.push_back(ranking.all.size());
      ranking.all.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw StageError("eval", "ranked record " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (unmatched) *unmatched = missing;
  return ranking;
}

void write_precision_table(std::ostream& out, const Ranking& ranking, char d) {
  out << "group_id" << d << "size" << d << "precision\n";
  for (const auto& s : ranking.all) {
    out << s.group.id << d << s.group.size() << d << (s.precision ? fixed(*s.precision, 4) : "n/a") << '\n';
  }
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows, char d) {
  out << "k" << d << "mean_top10_precision" << d << "groups" << d << "partial\n";
  for (const auto& r : rows) {
    out << r.k << d << fixed(r.mean_precision) << d << r.groups << d << (r.partial ? "yes" : "no") << '\n';
  }
}

json manifest(const PipelineConfig& cfg, const std::string& command, const DetectResult* result) {
  json m = {
      {"version", kVersion},
      {"command", command},
      {"config", to_json(cfg)},
      {"config_hash", config_hash(cfg)},
      {"seed", cfg.seed},
      {"train_seed", cfg.effective_train().seed},
  };
  if (result) {
    m["graph"] = {{"nodes", result->graph.size()},
                  {"edges", result->graph.edges.size()},
                  {"min_co_review", result->graph.min_co_review},
                  {"weighting", to_string(cfg.weighting)}};
    m["clusters"] = result->clusters.size();
    m["candidate_groups"] = result->ranking.all.size();
    m["initial_loss"] = result->training.initial_loss;
    m["final_loss"] = result->training.final_loss;
    m["loss_trace"] = result->training.loss_trace;
  }
  return m;
}

DetectResult run_detect_command(const ReviewTable& table, const PipelineConfig& cfg) {
  DetectResult result = detect(table, cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const char d = cfg.delimiter();
  const std::string ext = cfg.format == "tsv" ? ".tsv" : ".csv";
  auto open = [&](const std::string& name) {
    std::ofstream f(cfg.out_dir / name);
    if (!f) throw StageError("report", "cannot write " + (cfg.out_dir / name).string());
    return f;
  };
  {
    auto f = open("ranked.jsonl");
    write_ranked_jsonl(f, result.ranking, table);
  }
  {
    auto f = open("indicators" + ext);
    write_indicator_dump(f, result.ranking, d);
  }
  {
    auto f = open("summary.txt");
    write_summary(f, result.ranking, result.eval);
  }
  {
    auto f = open("assignments" + ext);
    write_assignments(f, table, result.graph, result.training.assignment, cfg.train.assign_threshold, d);
  }
  {
    auto f = open("manifest.json");
    f << manifest(cfg, "detect", &result).dump(2) << '\n';
  }
  if (cfg.dump_graph) {
    auto edges = open("graph_edges.tsv");
    write_edge_list(edges, table, result.graph, cfg.weighting);
    auto nodes = open("graph_nodes.tsv");
    write_node_attributes(nodes, table, result.graph);
  }
  if (cfg.save_checkpoint) {
    save_checkpoint(cfg.out_dir / "checkpoint.json",
                    {result.training.params, cfg.effective_train(), result.training.final_loss});
  }
  return result;
}

}  // namespace fgd
