#include "fgd/scoring.hpp"

#include <algorithm>
#include <stdexcept>

namespace fgd {

std::vector<double> min_max(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

double anomaly_score(const NormalizedScores& s, double compactness_weight) {
  return compactness_weight * s.pi + s.avd + s.bst;
}

std::vector<ScoredGroup> normalize_scores(std::vector<std::pair<CandidateGroup, IndicatorVector>> groups,
                                          double compactness_weight) {
  if (groups.empty()) throw std::invalid_argument("normalize_scores: no candidate groups");
  std::vector<double> pi, avd, bst;
  for (const auto& [g, v] : groups) {
    pi.push_back(v.pi);
    avd.push_back(v.avg_avd);
    bst.push_back(v.avg_bst);
  }
  const auto pi_n = min_max(pi), avd_n = min_max(avd), bst_n = min_max(bst);

  std::vector<ScoredGroup> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    ScoredGroup s;
    s.group = std::move(groups[i].first);
    s.raw = groups[i].second;
    s.normalized = {pi_n[i], avd_n[i], bst_n[i]};
    s.omega = anomaly_score(s.normalized, compactness_weight);
    out.push_back(std::move(s));
  }
  return out;
}

bool ranks_before(const ScoredGroup& a, const ScoredGroup& b) {
  if (a.omega != b.omega) return a.omega > b.omega;
  if (a.group.size() != b.group.size()) return a.group.size() > b.group.size();
  return a.group.id < b.group.id;
}

Ranking rank_groups(std::vector<ScoredGroup> scored, std::size_t size_floor) {
  std::sort(scored.begin(), scored.end(), ranks_before);
  Ranking r;
  r.size_floor = size_floor;
  r.all = std::move(scored);
  for (std::size_t i = 0; i < r.all.size(); ++i) {
    if (r.all[i].group.size() >= size_floor) r.headline.push_back(i);
  }
  return r;
}

bool is_fake_reviewer(ReviewerId reviewer, const ReviewTable& table) {
  for (std::size_t row : table.by_reviewer(reviewer)) {
    if (table.reviews()[row].label == Label::Fake) return true;
  }
  return false;
}

std::optional<double> group_precision(const CandidateGroup& group, const ReviewTable& table) {
  if (group.members.empty()) return std::nullopt;
  std::size_t fake = 0;
  bool any_label = false;
  for (ReviewerId m : group.members) {
    for (std::size_t row : table.by_reviewer(m)) {
      const Label l = table.reviews()[row].label;
      any_label = any_label || l != Label::Unknown;
    }
    if (is_fake_reviewer(m, table)) ++fake;
  }
  if (!any_label) return std::nullopt;
  return static_cast<double>(fake) / static_cast<double>(group.members.size());
}

SizeHistogram size_distribution(std::span<const std::size_t> sizes, std::optional<std::size_t> top_n) {
  SizeHistogram h;
  const std::size_t limit = top_n ? std::min(*top_n, sizes.size()) : sizes.size();
  for (std::size_t i = 0; i < limit; ++i) ++h[sizes[i] / kHistogramBucket * kHistogramBucket];
  return h;
}

SizeHistogram size_distribution(const Ranking& ranking, std::optional<std::size_t> top_n) {
  std::vector<std::size_t> sizes;
  for (std::size_t pos : ranking.headline) sizes.push_back(ranking.all[pos].group.size());
  return size_distribution(sizes, top_n);
}

EvalReport evaluate(Ranking& ranking, const ReviewTable& table) {
  EvalReport report;
  for (auto& g : ranking.all) {
    g.precision = group_precision(g.group, table);
    report.precision.push_back(g.precision);
  }
  if (!ranking.headline.empty()) {
    const auto& best = ranking.all[ranking.headline.front()];
    report.top = TopGroupRow{best.group.id, best.group.size(), best.precision};
  }
  report.histogram = size_distribution(ranking);
  return report;
}

}  // namespace fgd
