#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fgd/pipeline.hpp"
#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace fgd;

namespace {

/// Command-line values that override the config file when given.
struct Overrides {
  std::optional<std::string> input, format, dedup, weighting, neighbor_mode, out;
  std::optional<std::uint64_t> seed;
  std::optional<bool> header, intersect_all, add_self_loops, dump_graph, save_checkpoint;
  std::optional<std::size_t> min_co_review, min_support, size_floor;
  std::optional<int> k, epochs, burst_window_days, positional_dims, positional_smoothing;
  std::optional<double> learning_rate, dropout_rate, collapse_weight, assign_threshold, compactness_weight;
  std::vector<int> hidden_widths;
  std::optional<int> n_reviewers, n_products, horizon_days;
  std::optional<double> reviews_per_reviewer, rating_noise;
};

void add_common(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "top-level seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--format", o.format, "delimited format")->check(CLI::IsMember({"csv", "tsv"}));
}

void add_input(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--input", o.input, "review file");
  cmd->add_option("--header", o.header, "first line is a header (true/false)");
  cmd->add_option("--dedup", o.dedup)->check(CLI::IsMember({"keep_latest", "keep_first"}));
}

void add_model(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--min-co-review", o.min_co_review);
  cmd->add_option("--weighting", o.weighting)->check(CLI::IsMember({"binary", "co_review_count"}));
  cmd->add_option("--k", o.k, "cluster count");
  cmd->add_option("--hidden-widths", o.hidden_widths)->delimiter(',');
  cmd->add_option("--learning-rate", o.learning_rate);
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--dropout-rate", o.dropout_rate);
  cmd->add_option("--collapse-weight", o.collapse_weight);
  cmd->add_option("--assign-threshold", o.assign_threshold);
  cmd->add_option("--add-self-loops", o.add_self_loops);
  cmd->add_option("--positional-dims", o.positional_dims);
  cmd->add_option("--positional-smoothing", o.positional_smoothing);
  cmd->add_option("--min-support", o.min_support);
  cmd->add_option("--intersect-all", o.intersect_all);
  cmd->add_option("--neighbor-mode", o.neighbor_mode)->check(CLI::IsMember({"pair_mean", "literal"}));
  cmd->add_option("--burst-window-days", o.burst_window_days);
  cmd->add_option("--size-floor", o.size_floor);
  cmd->add_option("--compactness-weight", o.compactness_weight);
}

void add_synth(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--n-reviewers", o.n_reviewers);
  cmd->add_option("--n-products", o.n_products);
  cmd->add_option("--reviews-per-reviewer", o.reviews_per_reviewer);
  cmd->add_option("--horizon-days", o.horizon_days);
  cmd->add_option("--rating-noise", o.rating_noise);
}

template <typename T, typename U>
void apply(const std::optional<T>& value, U& field) {
  if (value) field = static_cast<U>(*value);
}

PipelineConfig resolve(const std::string& config_path, const Overrides& o) {
  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
  nlohmann::json patch = nlohmann::json::object();
  if (o.dedup) patch["dedup"] = *o.dedup;
  if (o.weighting) patch["graph"]["weighting"] = *o.weighting;
  if (o.neighbor_mode) patch["group"]["neighbor_mode"] = *o.neighbor_mode;
  merge_json(cfg, patch);

  if (o.input) cfg.input = *o.input;
  apply(o.format, cfg.format);
  apply(o.header, cfg.header);
  if (o.out) cfg.out_dir = *o.out;
  apply(o.seed, cfg.seed);
  apply(o.min_co_review, cfg.min_co_review);
  apply(o.k, cfg.train.k);
  if (!o.hidden_widths.empty()) cfg.train.hidden_widths = o.hidden_widths;
  apply(o.learning_rate, cfg.train.learning_rate);
  apply(o.epochs, cfg.train.epochs);
  apply(o.dropout_rate, cfg.train.dropout_rate);
  apply(o.collapse_weight, cfg.train.collapse_weight);
  apply(o.assign_threshold, cfg.train.assign_threshold);
  apply(o.add_self_loops, cfg.train.add_self_loops);
  apply(o.positional_dims, cfg.train.positional_dims);
  apply(o.positional_smoothing, cfg.train.positional_smoothing);
  apply(o.min_support, cfg.group.min_support);
  apply(o.intersect_all, cfg.group.intersect_all);
  apply(o.burst_window_days, cfg.indicators.burst_window_days);
  apply(o.size_floor, cfg.size_floor);
  apply(o.compactness_weight, cfg.compactness_weight);
  apply(o.dump_graph, cfg.dump_graph);
  apply(o.save_checkpoint, cfg.save_checkpoint);
  apply(o.n_reviewers, cfg.synth.n_reviewers);
  apply(o.n_products, cfg.synth.n_products);
  apply(o.reviews_per_reviewer, cfg.synth.reviews_per_reviewer);
  apply(o.horizon_days, cfg.synth.horizon_days);
  apply(o.rating_noise, cfg.synth.rating_noise);
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const PipelineConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  std::ofstream f(cfg.out_dir / name);
  if (!f) throw StageError("report", "cannot write " + (cfg.out_dir / name).string());
  return f;
}

IngestResult load_reviews(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw StageError("ingest", "no input file (use --input or the config's \"input\")");
  auto in = ingest(cfg);
  if (!in.parsed.errors.empty()) {
    std::cerr << "ingest: skipped " << in.parsed.errors.size() << " malformed row(s)\n";
  }
  return in;
}

int cmd_ingest(const PipelineConfig& cfg) {
  auto in = load_reviews(cfg);
  const auto summary = summarize(in);
  write_ingest_summary(std::cout, summary, {});
  auto f = open_output(cfg, "ingest_summary.txt");
  write_ingest_summary(f, summary, in.parsed.errors);
  auto m = open_output(cfg, "manifest.json");
  m << manifest(cfg, "ingest", nullptr).dump(2) << '\n';
  return 0;
}

int cmd_detect(const PipelineConfig& cfg) {
  auto in = load_reviews(cfg);
  auto result = run_detect_command(in.table, cfg);
  write_summary(std::cout, result.ranking, result.eval);
  std::cout << "\nreports written to " << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_sweep(const PipelineConfig& cfg, const std::vector<int>& k_list) {
  auto in = load_reviews(cfg);
  auto rows = cluster_sweep(in.table, k_list, cfg);
  write_sweep(std::cout, rows, cfg.delimiter());
  auto f = open_output(cfg, cfg.format == "tsv" ? "sweep.tsv" : "sweep.csv");
  write_sweep(f, rows, cfg.delimiter());
  auto m = open_output(cfg, "manifest.json");
  auto man = manifest(cfg, "sweep", nullptr);
  man["k_list"] = k_list;
  m << man.dump(2) << '\n';
  return 0;
}

int cmd_synth(const PipelineConfig& cfg) {
  const auto synth = cfg.effective_synth();
  const auto data = synth_generate(synth);
  const std::string name = cfg.format == "tsv" ? "reviews.tsv" : "reviews.csv";
  {
    auto f = open_output(cfg, name);
    write_reviews(f, data.table, cfg.parse_options());
  }
  {
    auto f = open_output(cfg, "ground_truth.tsv");
    write_ground_truth(f, data);
  }
  auto m = open_output(cfg, "manifest.json");
  auto man = manifest(cfg, "synth", nullptr);
  man["seeds"]["synth"] = synth.seed;
  m << man.dump(2) << '\n';
  std::cout << "wrote " << data.table.size() << " reviews and " << data.groups.size() << " planted group(s) to "
            << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_eval(const PipelineConfig& cfg, const fs::path& ranked_path) {
  auto in = load_reviews(cfg);
  if (!in.table.has_labels()) throw StageError("eval", "input has no labels");
  std::ifstream ranked(ranked_path);
  if (!ranked) throw StageError("eval", "cannot read " + ranked_path.string());
  std::size_t unmatched = 0;
  auto ranking = read_ranked_jsonl(ranked, in.table, cfg.size_floor, &unmatched);
  if (ranking.all.empty()) throw StageError("eval", "no groups in " + ranked_path.string());
  if (unmatched > 0) std::cerr << "eval: " << unmatched << " member name(s) not found in the input\n";
  auto report = evaluate(ranking, in.table);
  write_summary(std::cout, ranking, report);
  {
    auto f = open_output(cfg, "eval.txt");
    write_summary(f, ranking, report);
  }
  auto f = open_output(cfg, cfg.format == "tsv" ? "precision.tsv" : "precision.csv");
  write_precision_table(f, ranking, cfg.delimiter());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake reviewer group detection on product-rating graphs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  std::vector<int> k_list;
  std::string ranked_path;

  auto* ingest_cmd = app.add_subcommand("ingest", "parse and deduplicate reviews, report counts");
  add_common(ingest_cmd, config_path, o);
  add_input(ingest_cmd, o);

  auto* detect_cmd = app.add_subcommand("detect", "cluster, score and rank candidate groups");
  add_common(detect_cmd, config_path, o);
  add_input(detect_cmd, o);
  add_model(detect_cmd, o);
  detect_cmd->add_option("--dump-graph", o.dump_graph, "write graph edge/node files (true/false)");
  detect_cmd->add_option("--save-checkpoint", o.save_checkpoint, "write model checkpoint (true/false)");

  auto* sweep_cmd = app.add_subcommand("sweep", "mean top-10 cluster precision for each k");
  add_common(sweep_cmd, config_path, o);
  add_input(sweep_cmd, o);
  add_model(sweep_cmd, o);
  sweep_cmd->add_option("--k-list", k_list, "comma-separated cluster counts")->delimiter(',')->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a labelled dataset with planted groups");
  add_common(synth_cmd, config_path, o);
  add_synth(synth_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "precision of a ranked.jsonl against labelled reviews");
  add_common(eval_cmd, config_path, o);
  add_input(eval_cmd, o);
  eval_cmd->add_option("--ranked", ranked_path, "ranked.jsonl from detect")->required();
  eval_cmd->add_option("--size-floor", o.size_floor);

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = resolve(config_path, o);
    if (*ingest_cmd) return cmd_ingest(cfg);
    if (*detect_cmd) return cmd_detect(cfg);
    if (*sweep_cmd) return cmd_sweep(cfg, k_list);
    if (*synth_cmd) return cmd_synth(cfg);
    if (*eval_cmd) return cmd_eval(cfg, ranked_path);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
