#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgd/indicators.hpp"

namespace fgd {

inline constexpr double kCompactnessWeight = 3.0;
inline constexpr std::size_t kDefaultSizeFloor = 20;

struct NormalizedScores {
  double pi = 0, avd = 0, bst = 0;
};

struct ScoredGroup {
  CandidateGroup group;
  IndicatorVector raw;
  NormalizedScores normalized;
  double omega = 0;
  std::optional<double> precision;  // set when labels are available
};

/// Min-max scaling to [0,1]; a column with zero range maps to all zeros.
std::vector<double> min_max(std::span<const double> values);

/// Omega = w * pi + avd + bst (w = 3 by default).
double anomaly_score(const NormalizedScores& s, double compactness_weight = kCompactnessWeight);

/**
 * Min-max normalises Pi, mean AVD and mean BST independently across the
 * candidate population and fills in Omega. Throws std::invalid_argument on
 * empty input.
 */
std::vector<ScoredGroup> normalize_scores(std::vector<std::pair<CandidateGroup, IndicatorVector>> groups,
                                          double compactness_weight = kCompactnessWeight);

struct Ranking {
  std::vector<ScoredGroup> all;       // every group, best first
  std::vector<std::size_t> headline;  // positions in `all` with size >= floor
  std::size_t size_floor = kDefaultSizeFloor;
};

/// Descending Omega; ties by larger size, then lexicographic group id.
Ranking rank_groups(std::vector<ScoredGroup> scored, std::size_t size_floor = kDefaultSizeFloor);

/// Strict weak order used by rank_groups.
bool ranks_before(const ScoredGroup& a, const ScoredGroup& b);

/// A reviewer counts as fake when any of their reviews is labelled fake.
bool is_fake_reviewer(ReviewerId reviewer, const ReviewTable& table);

/// Fraction of members that are fake reviewers; nullopt when no member has a labelled review.
std::optional<double> group_precision(const CandidateGroup& group, const ReviewTable& table);

inline constexpr std::size_t kHistogramBucket = 10;

/// Bucket start (multiple of 10) -> count.
using SizeHistogram = std::map<std::size_t, std::size_t>;

/// Histogram of the first top_n sizes (all of them when top_n is absent).
SizeHistogram size_distribution(std::span<const std::size_t> sizes, std::optional<std::size_t> top_n = {});
SizeHistogram size_distribution(const Ranking& ranking, std::optional<std::size_t> top_n = {});

struct TopGroupRow {
  std::string group_id;
  std::size_t size = 0;
  std::optional<double> precision;
};

struct EvalReport {
  std::vector<std::optional<double>> precision;  // parallel to ranking.all
  std::optional<TopGroupRow> top;                // best headline group
  SizeHistogram histogram;                       // over headline groups
};

/// Fills ScoredGroup::precision in place and summarises the ranking.
EvalReport evaluate(Ranking& ranking, const ReviewTable& table);

}  // namespace fgd
