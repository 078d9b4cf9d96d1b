#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgd/pr_graph.hpp"
#include "fgd/review.hpp"

namespace fgd {

/// Reviewers drawn from one cluster, with each member's full product set.
struct CandidateGroup {
  std::string id;
  int source_cluster = -1;
  std::vector<ReviewerId> members;                    // sorted
  std::vector<std::vector<ProductId>> member_products;  // parallel to members, each sorted
  std::vector<ProductId> products;                    // union of member_products, sorted

  std::size_t size() const { return members.size(); }
};

struct GroupOptions {
  /// A reviewer joins when present in at least this many distinct cluster nodes.
  std::size_t min_support = 2;
  /// Require presence in every node of the cluster instead (strict intersection).
  bool intersect_all = false;
};

/// Builds a CandidateGroup from an explicit member list using the table's product sets.
CandidateGroup make_group(std::string id, int source_cluster, std::vector<ReviewerId> members,
                          const ReviewTable& table);

/// Nullopt when no reviewer meets the membership rule.
std::optional<CandidateGroup> extract_group(std::span<const std::size_t> cluster_nodes, int cluster_id,
                                            const PRGraph& graph, const ReviewTable& table,
                                            const GroupOptions& opts = {});

/// Logistic of (|R| + |P| - 3).
double penalty(std::size_t reviewers, std::size_t products);
double penalty(const CandidateGroup& group);

double review_tightness(const CandidateGroup& group);
double product_tightness(const CandidateGroup& group);

enum class NeighborNormalization {
  PairMean,  // 2 * sum_{i<j} JS / (|R| (|R| - 1)), bounded by 1
  Literal,   // 2 * sum_{i<j} JS / |R|, may exceed 1
};

/// Mean pairwise Jaccard similarity of member product sets, times the penalty. 0 for singletons.
double neighbor_tightness(const CandidateGroup& group,
                          NeighborNormalization mode = NeighborNormalization::PairMean);

/// RT * PT * NT.
double group_anomaly_compactness(const CandidateGroup& group,
                                 NeighborNormalization mode = NeighborNormalization::PairMean);

double jaccard(std::span<const ProductId> a, std::span<const ProductId> b);

/// Largest possible |rating - average| on a 1..5 scale.
inline constexpr double kMaxRatingDeviation = 4.0;
inline constexpr int kDefaultBurstWindowDays = 30;

/// Mean |rating - product average| over the reviewer's reviews, unscaled.
double rating_deviation(ReviewerId reviewer, const ReviewTable& table, std::span<const ProductStats> stats);
/// rating_deviation / 4, in [0, 1]. Throws std::out_of_range for an unknown reviewer.
double avg_rating_deviation(ReviewerId reviewer, const ReviewTable& table, std::span<const ProductStats> stats);

/// 1 - (last - first) / window for spans within the window, else 0.
double burstness(ReviewerId reviewer, const ReviewTable& table, int window_days = kDefaultBurstWindowDays);

struct IndicatorOptions {
  NeighborNormalization neighbor_mode = NeighborNormalization::PairMean;
  int burst_window_days = kDefaultBurstWindowDays;
};

struct IndicatorVector {
  double rt = 0, pt = 0, nt = 0, pi = 0;
  double avg_avd = 0;      // normalised by 4
  double avg_bst = 0;
  double avg_avd_raw = 0;  // in rating points
};

IndicatorVector compute_indicators(const CandidateGroup& group, const ReviewTable& table,
                                   std::span<const ProductStats> stats, const IndicatorOptions& opts = {});

}  // namespace fgd
