#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fgd/scoring.hpp"
#include "fgd/synth.hpp"

using namespace fgd;

namespace {

ScoredGroup scored(std::string id, std::size_t size, double omega) {
  ScoredGroup g;
  g.group.id = std::move(id);
  for (std::size_t i = 0; i < size; ++i) g.group.members.push_back(ReviewerId{static_cast<std::uint32_t>(i)});
  g.omega = omega;
  return g;
}

std::vector<std::string> ids(const std::vector<ScoredGroup>& gs) {
  std::vector<std::string> out;
  for (const auto& g : gs) out.push_back(g.group.id);
  return out;
}

ReviewTable labelled(int fake, int genuine, int unknown) {
  std::vector<RawReview> rows;
  const Date d = *parse_date("2016-01-01");
  for (int i = 0; i < fake; ++i) {
    rows.push_back({"f" + std::to_string(i), "p", 5, d, Label::Fake});
    rows.push_back({"f" + std::to_string(i), "q", 4, d, Label::Genuine});
  }
  for (int i = 0; i < genuine; ++i) rows.push_back({"g" + std::to_string(i), "p", 3, d, Label::Genuine});
  for (int i = 0; i < unknown; ++i) rows.push_back({"n" + std::to_string(i), "p", 3, d, Label::Unknown});
  return ReviewTable(std::move(rows));
}

CandidateGroup everyone(const ReviewTable& t) {
  std::vector<ReviewerId> members;
  for (std::uint32_t i = 0; i < t.reviewer_count(); ++i) members.push_back(ReviewerId{i});
  return make_group("g", 0, members, t);
}

}  // namespace

TEST(MinMax, Examples) {
  std::vector<double> pi{0.2, 0.6, 1.0};
  auto scaled = min_max(pi);
  EXPECT_NEAR(scaled[0], 0.0, 1e-15);
  EXPECT_NEAR(scaled[1], 0.5, 1e-15);
  EXPECT_NEAR(scaled[2], 1.0, 1e-15);
  std::vector<double> constant{0.4, 0.4};
  EXPECT_EQ(min_max(constant), (std::vector<double>{0.0, 0.0}));
  std::vector<double> one{0.9};
  EXPECT_EQ(min_max(one), std::vector<double>{0.0});
}

TEST(AnomalyScore, Examples) {
  EXPECT_DOUBLE_EQ(anomaly_score({1, 1, 1}), 5.0);
  EXPECT_DOUBLE_EQ(anomaly_score({0, 0, 0}), 0.0);
  EXPECT_NEAR(anomaly_score({0.5, 0.2, 0.4}), 2.1, 1e-15);
  EXPECT_NEAR(anomaly_score({0.5, 0.2, 0.4}, 1.0), 1.1, 1e-15);
}

TEST(NormalizeScores, SingleGroupAllZeroAndEmptyThrows) {
  CandidateGroup g;
  g.id = "a";
  IndicatorVector v;
  v.pi = 0.7;
  v.avg_avd = 0.2;
  v.avg_bst = 0.9;
  auto out = normalize_scores({{g, v}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].omega, 0.0);
  EXPECT_THROW(normalize_scores({}), std::invalid_argument);
}

TEST(NormalizeScores, ColumnsScaledIndependently) {
  std::vector<std::pair<CandidateGroup, IndicatorVector>> in;
  for (int i = 0; i < 3; ++i) {
    CandidateGroup g;
    g.id = "g" + std::to_string(i);
    IndicatorVector v;
    v.pi = 0.2 + 0.4 * i;
    v.avg_avd = 0.5;
    v.avg_bst = 1.0 - 0.1 * i;
    in.emplace_back(g, v);
  }
  auto out = normalize_scores(in);
  EXPECT_NEAR(out[1].normalized.pi, 0.5, 1e-12);
  EXPECT_EQ(out[1].normalized.avd, 0.0);
  EXPECT_NEAR(out[1].normalized.bst, 0.5, 1e-12);
  for (const auto& s : out) {
    EXPECT_NEAR(s.omega, 3 * s.normalized.pi + s.normalized.avd + s.normalized.bst, 1e-15);
    EXPECT_GE(s.omega, 0.0);
    EXPECT_LE(s.omega, 5.0);
  }
}

TEST(NormalizeScores, RankingInvariantUnderAffineRescaling) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<CandidateGroup, IndicatorVector>> base, rescaled;
    const double a1 = 0.1 + u(rng), a2 = 0.1 + u(rng), a3 = 0.1 + u(rng);
    const double b1 = u(rng), b2 = u(rng), b3 = u(rng);
    for (int i = 0; i < 12; ++i) {
      CandidateGroup g;
      g.id = "g" + std::to_string(i);
      g.members.resize(20 + static_cast<std::size_t>(rng() % 5));
      IndicatorVector v;
      v.pi = u(rng);
      v.avg_avd = u(rng);
      v.avg_bst = u(rng);
      base.emplace_back(g, v);
      IndicatorVector w = v;
      w.pi = a1 * v.pi + b1;
      w.avg_avd = a2 * v.avg_avd + b2;
      w.avg_bst = a3 * v.avg_bst + b3;
      rescaled.emplace_back(g, w);
    }
    auto r1 = rank_groups(normalize_scores(base));
    auto r2 = rank_groups(normalize_scores(rescaled));
    EXPECT_EQ(ids(r1.all), ids(r2.all));
  }
}

TEST(RankGroups, OrderFloorAndTiebreaks) {
  auto r = rank_groups({scored("a", 30, 2.1), scored("b", 25, 5.0), scored("c", 40, 0.3)});
  EXPECT_EQ(ids(r.all), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(r.headline, (std::vector<std::size_t>{0, 1, 2}));

  auto floor = rank_groups({scored("small", 12, 5.0), scored("big", 30, 1.0)});
  EXPECT_EQ(ids(floor.all), (std::vector<std::string>{"small", "big"}));
  EXPECT_EQ(floor.headline, std::vector<std::size_t>{1});

  auto ties = rank_groups({scored("x", 25, 3.0), scored("y", 40, 3.0), scored("a", 25, 3.0)});
  EXPECT_EQ(ids(ties.all), (std::vector<std::string>{"y", "a", "x"}));
}

TEST(RankGroups, TotalOrderIndependentOfInputOrder) {
  std::mt19937_64 rng(42);
  std::vector<ScoredGroup> gs;
  for (int i = 0; i < 40; ++i) gs.push_back(scored("g" + std::to_string(i), 15 + rng() % 10, static_cast<double>(rng() % 4)));
  auto r1 = rank_groups(gs);
  std::shuffle(gs.begin(), gs.end(), rng);
  auto r2 = rank_groups(gs);
  EXPECT_EQ(ids(r1.all), ids(r2.all));
  for (std::size_t i = 1; i < r1.all.size(); ++i) EXPECT_FALSE(ranks_before(r1.all[i], r1.all[i - 1]));
}

TEST(GroupPrecision, NineteenOfTwentyFive) {
  auto t = labelled(19, 6, 0);
  EXPECT_NEAR(*group_precision(everyone(t), t), 0.76, 1e-12);
}

TEST(GroupPrecision, Endpoints) {
  auto none = labelled(0, 5, 0);
  EXPECT_EQ(*group_precision(everyone(none), none), 0.0);
  auto all = labelled(4, 0, 0);
  EXPECT_EQ(*group_precision(everyone(all), all), 1.0);
  auto unknown = labelled(0, 0, 3);
  EXPECT_FALSE(group_precision(everyone(unknown), unknown));
  auto mixed = labelled(1, 0, 3);
  EXPECT_NEAR(*group_precision(everyone(mixed), mixed), 0.25, 1e-15);
}

TEST(SizeDistribution, Examples) {
  std::vector<std::size_t> sizes{25, 25, 60};
  auto h = size_distribution(sizes);
  EXPECT_EQ(h, (SizeHistogram{{20, 2}, {60, 1}}));
  EXPECT_EQ(size_distribution(sizes, 1), (SizeHistogram{{20, 1}}));
  std::size_t total = 0;
  for (auto [bucket, count] : h) total += count;
  EXPECT_EQ(total, sizes.size());
}

TEST(Evaluate, FillsPrecisionAndTopRow) {
  auto t = labelled(19, 6, 0);
  ScoredGroup g;
  g.group = everyone(t);
  g.group.id = "c00001";
  g.omega = 4.0;
  ScoredGroup small;
  small.group = make_group("c00002", 2, {ReviewerId{0}}, t);
  small.omega = 5.0;
  auto ranking = rank_groups({g, small});
  auto report = evaluate(ranking, t);
  ASSERT_EQ(report.precision.size(), 2u);
  ASSERT_TRUE(report.top);
  EXPECT_EQ(report.top->group_id, "c00001");
  EXPECT_EQ(report.top->size, 25u);
  EXPECT_NEAR(*report.top->precision, 0.76, 1e-12);
  EXPECT_EQ(report.histogram, (SizeHistogram{{20, 1}}));
  EXPECT_TRUE(ranking.all[0].precision);
}

TEST(Synth, DefaultsMatchDocumentedSetup) {
  SynthConfig cfg;
  EXPECT_EQ(cfg.n_reviewers, 2000);
  EXPECT_EQ(cfg.n_products, 300);
  EXPECT_EQ(cfg.reviews_per_reviewer, 5.0);
  EXPECT_EQ(cfg.horizon_days, 720);
  ASSERT_EQ(cfg.planted.size(), 3u);
  EXPECT_EQ(cfg.planted[0].size, 25);
  EXPECT_EQ(cfg.planted[1].size, 40);
  EXPECT_EQ(cfg.planted[2].size, 60);
}

TEST(Synth, SinglePlantedGroupGroundTruth) {
  SynthConfig cfg;
  cfg.planted = {{30, 5, 5, 7}};
  cfg.seed = 3;
  auto data = synth_generate(cfg);
  ASSERT_EQ(data.groups.size(), 1u);
  EXPECT_EQ(data.groups[0].size(), 30u);
  std::set<std::string> truth(data.groups[0].begin(), data.groups[0].end());
  std::size_t fake_reviewers = 0;
  for (std::uint32_t u = 0; u < data.table.reviewer_count(); ++u) {
    const bool fake = is_fake_reviewer(ReviewerId{u}, data.table);
    EXPECT_EQ(fake, truth.count(data.table.name(ReviewerId{u})) == 1);
    fake_reviewers += fake ? 1 : 0;
  }
  EXPECT_EQ(fake_reviewers, 30u);
  std::vector<ReviewerId> members;
  for (const auto& m : data.groups[0]) members.push_back(*data.table.find_reviewer(m));
  auto g = make_group("truth", 0, members, data.table);
  EXPECT_EQ(*group_precision(g, data.table), 1.0);
  EXPECT_EQ(g.products.size(), 5u);
  // Every planted review falls inside the burst window.
  for (auto m : members) {
    Date lo = Date::max(), hi = Date::min();
    for (auto row : data.table.by_reviewer(m)) {
      lo = std::min(lo, data.table.reviews()[row].date);
      hi = std::max(hi, data.table.reviews()[row].date);
      EXPECT_EQ(data.table.reviews()[row].rating, 5);
    }
    EXPECT_LE((hi - lo).count(), 7);
  }
}

TEST(Synth, NoPlantedGroupsAllGenuine) {
  SynthConfig cfg;
  cfg.planted.clear();
  cfg.n_reviewers = 200;
  auto data = synth_generate(cfg);
  for (const auto& r : data.table.reviews()) EXPECT_EQ(r.label, Label::Genuine);
  std::ostringstream gt;
  write_ground_truth(gt, data);
  EXPECT_TRUE(gt.str().empty());
}

TEST(Synth, DeterministicPerSeed) {
  SynthConfig cfg;
  cfg.n_reviewers = 300;
  cfg.seed = 17;
  EXPECT_EQ(synth_generate(cfg).table, synth_generate(cfg).table);
  auto other = cfg;
  other.seed = 18;
  EXPECT_FALSE(synth_generate(cfg).table == synth_generate(other).table);
}

TEST(Synth, InfeasibleConfigRejected) {
  SynthConfig cfg;
  cfg.n_products = 4;
  cfg.planted = {{10, 5, 5, 7}};
  EXPECT_THROW(synth_generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.planted = {{1, 3, 5, 7}};
  EXPECT_THROW(synth_generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.planted = {{5, 3, 5, -1}};
  EXPECT_THROW(synth_generate(cfg), std::invalid_argument);
}

TEST(Synth, PlantedCompactnessBeatsRandomBackgroundGroups) {
  int passes = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    auto data = synth_generate(cfg);
    const auto& t = data.table;
    auto stats = product_stats(t);
    std::vector<ReviewerId> background;
    for (std::uint32_t u = 0; u < t.reviewer_count(); ++u) {
      if (!is_fake_reviewer(ReviewerId{u}, t)) background.push_back(ReviewerId{u});
    }
    std::mt19937_64 rng(seed);
    for (const auto& names : data.groups) {
      std::vector<ReviewerId> members;
      for (const auto& m : names) members.push_back(*t.find_reviewer(m));
      const double planted = compute_indicators(make_group("p", 0, members, t), t, stats).pi;
      std::shuffle(background.begin(), background.end(), rng);
      std::vector<ReviewerId> random(background.begin(), background.begin() + static_cast<long>(members.size()));
      const double other = compute_indicators(make_group("r", 0, random, t), t, stats).pi;
      ++checks;
      passes += planted > other ? 1 : 0;
    }
  }
  EXPECT_GE(passes, static_cast<int>(0.95 * checks));
}
