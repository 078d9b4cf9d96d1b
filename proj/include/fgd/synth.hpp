#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fgd/review.hpp"

namespace fgd {

struct PlantedGroupSpec {
  int size = 25;
  int target_products = 5;
  int rating = 5;            // common extreme rating given to every target
  int burst_window_days = 7;
};

struct SynthConfig {
  int n_reviewers = 2000;
  int n_products = 300;
  double reviews_per_reviewer = 5.0;  // mean background activity
  int horizon_days = 720;
  double rating_noise = 0.8;  // spread of background ratings around a product's mean
  std::vector<PlantedGroupSpec> planted{{25, 5, 5, 7}, {40, 6, 5, 10}, {60, 8, 1, 14}};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for infeasible settings.
  void validate() const;
};

struct SynthDataset {
  ReviewTable table;
  std::vector<std::vector<std::string>> groups;  // planted member names, per planted group
};

/**
 * Background reviewers rate uniformly chosen products at uniform dates over
 * the horizon, with ratings scattered around a per-product mean. Each planted
 * group's members (fresh reviewers) give all of the group's target products
 * the same extreme rating inside a short window. Planted reviews are labelled
 * fake and background reviews genuine. Deterministic per seed.
 */
SynthDataset synth_generate(const SynthConfig& cfg);

/// "group_index \t reviewer_id" per planted member.
void write_ground_truth(std::ostream& out, const SynthDataset& data);

}  // namespace fgd
