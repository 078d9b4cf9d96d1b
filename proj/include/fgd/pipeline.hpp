#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgd/dmon.hpp"
#include "fgd/indicators.hpp"
#include "fgd/pr_graph.hpp"
#include "fgd/review.hpp"
#include "fgd/scoring.hpp"
#include "fgd/synth.hpp"
#include "json.hpp"

namespace fgd {

inline constexpr const char* kVersion = "1.0.0";

/// Every tunable of a run. Missing keys in a config file keep these defaults.
struct PipelineConfig {
  std::filesystem::path input;
  std::string format = "csv";  // csv | tsv; also selects the output delimiter
  bool header = false;
  std::vector<std::string> fake_labels{"-1"};
  std::vector<std::string> genuine_labels{"1"};
  DedupPolicy dedup = DedupPolicy::KeepLatest;

  std::size_t min_co_review = 2;
  EdgeWeighting weighting = EdgeWeighting::CoReviewCount;

  TrainConfig train;

  GroupOptions group;
  IndicatorOptions indicators;

  std::size_t size_floor = kDefaultSizeFloor;
  double compactness_weight = kCompactnessWeight;

  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  bool dump_graph = false;
  bool save_checkpoint = false;

  SynthConfig synth;

  char delimiter() const { return format == "tsv" ? '\t' : ','; }
  ParseOptions parse_options() const;
  /// Train config with the seed derived from the top-level seed.
  TrainConfig effective_train() const;
  /// Synth config with the seed derived from the top-level seed.
  SynthConfig effective_synth() const;
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// Overlays the keys present in `j` onto `cfg`. Unknown keys are rejected.
void merge_json(PipelineConfig& cfg, const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

/// Raised by a pipeline stage; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct IngestResult {
  ParseResult parsed;
  ReviewTable table;  // deduplicated
  std::size_t duplicates_removed = 0;
};

/// Parse + dedupe. Throws StageError("ingest") if nothing valid was read.
IngestResult ingest(const PipelineConfig& cfg);

struct IngestSummary {
  std::size_t rows = 0, parse_errors = 0, duplicates_removed = 0, reviews = 0;
  std::size_t reviewers = 0, products = 0;
  std::size_t fake = 0, genuine = 0, unknown = 0;
  bool labels = false;
};

IngestSummary summarize(const IngestResult& in);
void write_ingest_summary(std::ostream& out, const IngestSummary& s, const std::vector<RowError>& errors);

struct DetectResult {
  PRGraph graph;
  TrainResult training;
  std::vector<Cluster> clusters;
  Ranking ranking;
  std::optional<EvalReport> eval;  // when the table carries labels
};

/// Graph -> train -> extract -> indicators -> normalise -> rank.
DetectResult detect(const ReviewTable& table, const PipelineConfig& cfg);

/// Candidate groups from clusters, in cluster order.
std::vector<CandidateGroup> extract_groups(const std::vector<Cluster>& clusters, const PRGraph& graph,
                                           const ReviewTable& table, const GroupOptions& opts);

struct SweepRow {
  int k = 0;
  double mean_precision = 0.0;  // over the best min(10, groups) groups
  std::size_t groups = 0;       // groups with a defined precision
  bool partial = false;         // fewer than 10 groups
};

inline constexpr std::size_t kSweepTopGroups = 10;

/// Cluster-only precision per k; throws StageError("sweep") on unlabelled data.
std::vector<SweepRow> cluster_sweep(const ReviewTable& table, const std::vector<int>& k_list,
                                    const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Output writers

/// One JSON object per line, best group first.
void write_ranked_jsonl(std::ostream& out, const Ranking& ranking, const ReviewTable& table);
/// Raw indicator values per group.
void write_indicator_dump(std::ostream& out, const Ranking& ranking, char delimiter);
/// Table-II style summary plus size histogram of headline groups.
void write_summary(std::ostream& out, const Ranking& ranking, const std::optional<EvalReport>& eval);
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows, char delimiter);
nlohmann::json manifest(const PipelineConfig& cfg, const std::string& command, const DetectResult* result);

/**
 * Rebuilds a ranking from ranked.jsonl records, resolving member names
 * against `table`. Names absent from the table are skipped and counted in
 * `unmatched`. Throws StageError("eval") on malformed records.
 */
Ranking read_ranked_jsonl(std::istream& in, const ReviewTable& table, std::size_t size_floor,
                          std::size_t* unmatched = nullptr);
/// "group_id, size, precision" per ranked group; undefined precision printed as n/a.
void write_precision_table(std::ostream& out, const Ranking& ranking, char delimiter);

/// Runs detect and writes every artifact into cfg.out_dir.
DetectResult run_detect_command(const ReviewTable& table, const PipelineConfig& cfg);

}  // namespace fgd
