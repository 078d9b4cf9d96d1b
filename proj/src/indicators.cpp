#include "fgd/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <unordered_map>

namespace fgd {

namespace {

std::vector<ProductId> products_of(ReviewerId reviewer, const ReviewTable& table) {
  std::vector<ProductId> out;
  for (std::size_t row : table.by_reviewer(reviewer)) out.push_back(table.reviews()[row].product);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t intersection_size(std::span<const ProductId> a, std::span<const ProductId> b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

void check_reviewer(ReviewerId reviewer, const ReviewTable& table) {
  if (index(reviewer) >= table.reviewer_count() || table.by_reviewer(reviewer).empty()) {
    throw std::out_of_range("unknown reviewer id " + std::to_string(index(reviewer)));
  }
}

}  // namespace

CandidateGroup make_group(std::string id, int source_cluster, std::vector<ReviewerId> members,
                          const ReviewTable& table) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  CandidateGroup g;
  g.id = std::move(id);
  g.source_cluster = source_cluster;
  for (ReviewerId m : members) {
    check_reviewer(m, table);
    g.member_products.push_back(products_of(m, table));
    g.products.insert(g.products.end(), g.member_products.back().begin(), g.member_products.back().end());
  }
  std::sort(g.products.begin(), g.products.end());
  g.products.erase(std::unique(g.products.begin(), g.products.end()), g.products.end());
  g.members = std::move(members);
  return g;
}

std::optional<CandidateGroup> extract_group(std::span<const std::size_t> cluster_nodes, int cluster_id,
                                            const PRGraph& graph, const ReviewTable& table,
                                            const GroupOptions& opts) {
  if (cluster_nodes.empty()) return std::nullopt;
  // Count distinct nodes per reviewer; node reviewer sets have no duplicates.
  std::unordered_map<std::uint32_t, std::size_t> support;
  std::vector<std::size_t> nodes(cluster_nodes.begin(), cluster_nodes.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (std::size_t node : nodes) {
    for (ReviewerId r : graph.nodes.at(node).reviewers) ++support[index(r)];
  }
  const std::size_t needed = opts.intersect_all ? nodes.size() : std::max<std::size_t>(opts.min_support, 1);

  std::vector<ReviewerId> members;
  for (const auto& [reviewer, count] : support) {
    if (count >= needed) members.push_back(ReviewerId{reviewer});
  }
  if (members.empty()) return std::nullopt;

  char id[32];
  std::snprintf(id, sizeof(id), "c%05d", cluster_id);
  return make_group(id, cluster_id, std::move(members), table);
}

// ---------------------------------------------------------------------------

double penalty(std::size_t reviewers, std::size_t products) {
  const double x = static_cast<double>(reviewers) + static_cast<double>(products) - 3.0;
  return 1.0 / (1.0 + std::exp(-x));
}

double penalty(const CandidateGroup& group) { return penalty(group.members.size(), group.products.size()); }

double review_tightness(const CandidateGroup& group) {
  if (group.members.empty() || group.products.empty()) return 0.0;
  std::size_t reviews = 0;
  for (const auto& p : group.member_products) reviews += intersection_size(p, group.products);
  const double ratio = static_cast<double>(reviews) /
                       (static_cast<double>(group.members.size()) * static_cast<double>(group.products.size()));
  return ratio * penalty(group);
}

double product_tightness(const CandidateGroup& group) {
  if (group.member_products.empty()) return 0.0;
  std::vector<ProductId> common = group.member_products.front();
  std::vector<ProductId> all = group.member_products.front();
  for (std::size_t i = 1; i < group.member_products.size(); ++i) {
    const auto& p = group.member_products[i];
    std::vector<ProductId> next_common, next_all;
    std::set_intersection(common.begin(), common.end(), p.begin(), p.end(), std::back_inserter(next_common));
    std::set_union(all.begin(), all.end(), p.begin(), p.end(), std::back_inserter(next_all));
    common = std::move(next_common);
    all = std::move(next_all);
  }
  if (all.empty()) return 0.0;
  return static_cast<double>(common.size()) / static_cast<double>(all.size());
}

double jaccard(std::span<const ProductId> a, std::span<const ProductId> b) {
  const std::size_t inter = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double neighbor_tightness(const CandidateGroup& group, NeighborNormalization mode) {
  const std::size_t r = group.members.size();
  if (r < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) sum += jaccard(group.member_products[i], group.member_products[j]);
  }
  const double rd = static_cast<double>(r);
  const double denom = mode == NeighborNormalization::PairMean ? rd * (rd - 1.0) : rd;
  return 2.0 * sum / denom * penalty(group);
}

double group_anomaly_compactness(const CandidateGroup& group, NeighborNormalization mode) {
  return review_tightness(group) * product_tightness(group) * neighbor_tightness(group, mode);
}

// ---------------------------------------------------------------------------

double rating_deviation(ReviewerId reviewer, const ReviewTable& table, std::span<const ProductStats> stats) {
  check_reviewer(reviewer, table);
  const auto& rows = table.by_reviewer(reviewer);
  double sum = 0.0;
  for (std::size_t row : rows) {
    const auto& r = table.reviews()[row];
    sum += std::abs(static_cast<double>(r.rating) - stats[index(r.product)].avg_rating);
  }
  return sum / static_cast<double>(rows.size());
}

double avg_rating_deviation(ReviewerId reviewer, const ReviewTable& table, std::span<const ProductStats> stats) {
  return rating_deviation(reviewer, table, stats) / kMaxRatingDeviation;
}

double burstness(ReviewerId reviewer, const ReviewTable& table, int window_days) {
  check_reviewer(reviewer, table);
  if (window_days <= 0) throw std::invalid_argument("burst window must be positive");
  Date first = Date::max(), last = Date::min();
  for (std::size_t row : table.by_reviewer(reviewer)) {
    first = std::min(first, table.reviews()[row].date);
    last = std::max(last, table.reviews()[row].date);
  }
  const auto span = (last - first).count();
  if (span > window_days) return 0.0;
  return 1.0 - static_cast<double>(span) / static_cast<double>(window_days);
}

IndicatorVector compute_indicators(const CandidateGroup& group, const ReviewTable& table,
                                   std::span<const ProductStats> stats, const IndicatorOptions& opts) {
  IndicatorVector v;
  v.rt = review_tightness(group);
  v.pt = product_tightness(group);
  v.nt = neighbor_tightness(group, opts.neighbor_mode);
  v.pi = v.rt * v.pt * v.nt;
  if (!group.members.empty()) {
    for (ReviewerId m : group.members) {
      v.avg_avd_raw += rating_deviation(m, table, stats);
      v.avg_bst += burstness(m, table, opts.burst_window_days);
    }
    const double n = static_cast<double>(group.members.size());
    v.avg_avd_raw /= n;
    v.avg_bst /= n;
    v.avg_avd = v.avg_avd_raw / kMaxRatingDeviation;
  }
  return v;
}

}  // namespace fgd
