#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fgd/indicators.hpp"
#include "oracles.hpp"

using namespace fgd;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Row {
  std::string reviewer, product;
  int rating = 5;
  const char* date = "2016-05-01";
};

ReviewTable table_of(const std::vector<Row>& rows) {
  std::vector<RawReview> raw;
  for (const auto& r : rows) raw.push_back({r.reviewer, r.product, r.rating, *parse_date(r.date), Label::Unknown});
  return ReviewTable(std::move(raw));
}

CandidateGroup everyone(const ReviewTable& t) {
  std::vector<ReviewerId> ids;
  for (std::uint32_t i = 0; i < t.reviewer_count(); ++i) ids.push_back(ReviewerId{i});
  return make_group("g", 0, ids, t);
}

}  // namespace

TEST(ExtractGroup, SupportRule) {
  auto t = table_of({{"a", "p1"}, {"b", "p1"}, {"a", "p2"}, {"b", "p2"}, {"c", "p2"}});
  auto g = build_graph(t, 1);
  std::vector<std::size_t> nodes{0, 1};
  auto two = extract_group(nodes, 3, g, t, {2, false});
  ASSERT_TRUE(two);
  EXPECT_EQ(two->members, (std::vector<ReviewerId>{*t.find_reviewer("a"), *t.find_reviewer("b")}));
  EXPECT_EQ(two->source_cluster, 3);
  EXPECT_EQ(two->id, "c00003");
  auto one = extract_group(nodes, 3, g, t, {1, false});
  ASSERT_TRUE(one);
  EXPECT_EQ(one->size(), 3u);
}

TEST(ExtractGroup, DisjointNodesGiveNone) {
  auto t = table_of({{"a", "p1"}, {"b", "p2"}, {"c", "p3"}});
  auto g = build_graph(t, 1);
  std::vector<std::size_t> nodes{0, 1, 2};
  EXPECT_FALSE(extract_group(nodes, 0, g, t));
}

TEST(ExtractGroup, IntersectAllAndFullProductSets) {
  auto t = table_of({{"a", "p1"}, {"b", "p1"}, {"a", "p2"}, {"b", "p2"}, {"c", "p2"}, {"c", "p3"}, {"a", "p9", 1}});
  auto g = build_graph(t, 1);
  // p1#5, p2#5, p3#5: c appears in two nodes but not all three; nobody does.
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].id.rating == 5) nodes.push_back(i);
  }
  EXPECT_FALSE(extract_group(nodes, 0, g, t, {2, true}));
  auto support = extract_group(nodes, 0, g, t, {2, false});
  ASSERT_TRUE(support);
  EXPECT_EQ(support->size(), 3u);
  // a's product set includes p9 although p9 is outside the cluster.
  EXPECT_EQ(support->member_products[0].size(), 3u);
  EXPECT_EQ(support->products.size(), 4u);
}

TEST(Penalty, Examples) {
  EXPECT_DOUBLE_EQ(penalty(2, 1), 0.5);
  EXPECT_GT(penalty(20, 5), 1.0 - 1e-9);
  EXPECT_LT(penalty(20, 5), 1.0);
  EXPECT_NEAR(penalty(1, 1), 0.2689, 1e-4);
  for (std::size_t s = 2; s < 30; ++s) EXPECT_LT(penalty(s, 1), penalty(s + 1, 1));
}

TEST(ReviewTightness, Examples) {
  auto full = table_of({{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}});
  EXPECT_NEAR(review_tightness(everyone(full)), logistic(1.0), 1e-12);
  EXPECT_NEAR(review_tightness(everyone(full)), 0.7311, 1e-4);

  std::vector<Row> sparse_rows;
  for (int i = 0; i < 10; ++i) sparse_rows.push_back({"r" + std::to_string(i), "p" + std::to_string(i)});
  auto sparse = table_of(sparse_rows);
  EXPECT_NEAR(review_tightness(everyone(sparse)), 0.1 * logistic(17.0), 1e-12);
  EXPECT_NEAR(review_tightness(everyone(sparse)), 0.1, 1e-7);
}

TEST(ProductTightness, Examples) {
  auto same = table_of({{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}});
  EXPECT_DOUBLE_EQ(product_tightness(everyone(same)), 1.0);
  auto overlap = table_of({{"a", "x"}, {"a", "y"}, {"b", "y"}, {"b", "z"}});
  EXPECT_DOUBLE_EQ(product_tightness(everyone(overlap)), 1.0 / 3.0);
  auto disjoint = table_of({{"a", "x"}, {"b", "y"}});
  EXPECT_DOUBLE_EQ(product_tightness(everyone(disjoint)), 0.0);
}

TEST(NeighborTightness, Examples) {
  auto same = table_of({{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}, {"c", "x"}, {"c", "y"}});
  auto g = everyone(same);
  EXPECT_NEAR(neighbor_tightness(g), penalty(g), 1e-12);
  auto overlap = table_of({{"a", "x"}, {"a", "y"}, {"b", "y"}, {"b", "z"}});
  EXPECT_NEAR(neighbor_tightness(everyone(overlap)), logistic(2.0) / 3.0, 1e-12);
  EXPECT_NEAR(neighbor_tightness(everyone(overlap)), 0.2936, 1e-4);
  auto disjoint = table_of({{"a", "x"}, {"b", "y"}, {"c", "z"}});
  EXPECT_EQ(neighbor_tightness(everyone(disjoint)), 0.0);
  auto single = table_of({{"a", "x"}});
  EXPECT_EQ(neighbor_tightness(everyone(single)), 0.0);
}

TEST(NeighborTightness, LiteralModeScalesByMemberCountMinusOne) {
  auto same = table_of({{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "x"}});
  auto g = everyone(same);
  EXPECT_NEAR(neighbor_tightness(g, NeighborNormalization::Literal),
              3.0 * neighbor_tightness(g, NeighborNormalization::PairMean), 1e-12);
}

TEST(Compactness, Examples) {
  auto disjoint = table_of({{"a", "x"}, {"b", "y"}});
  EXPECT_EQ(group_anomaly_compactness(everyone(disjoint)), 0.0);
  auto overlap = table_of({{"a", "x"}, {"a", "y"}, {"b", "y"}, {"b", "z"}});
  auto g = everyone(overlap);
  EXPECT_NEAR(group_anomaly_compactness(g), review_tightness(g) * product_tightness(g) * neighbor_tightness(g), 1e-15);
  EXPECT_NEAR(0.7311 * (1.0 / 3.0) * 0.2936, 0.0716, 1e-4);
  // Large identical-product group approaches the Π = 1 limit.
  std::vector<Row> rows;
  for (int i = 0; i < 30; ++i) {
    for (const char* p : {"x", "y", "z"}) rows.push_back({"r" + std::to_string(i), p});
  }
  EXPECT_NEAR(group_anomaly_compactness(everyone(table_of(rows))), 1.0, 1e-9);
}

TEST(RatingDeviation, Examples) {
  auto t = table_of({{"fan", "p", 5}, {"hater", "p", 1}, {"x1", "q", 5}, {"x2", "q", 5}, {"x3", "q", 5},
                     {"x4", "q", 5}, {"dev", "q", 3}, {"dev", "r", 4}, {"y", "r", 4}});
  auto stats = product_stats(t);
  // p averages 3; fan deviates by 2 on p.
  EXPECT_DOUBLE_EQ(rating_deviation(*t.find_reviewer("fan"), t, stats), 2.0);
  EXPECT_DOUBLE_EQ(avg_rating_deviation(*t.find_reviewer("y"), t, stats), 0.0);
  auto single = table_of({{"lone", "p", 1}, {"o1", "p", 5}, {"o2", "p", 5}, {"o3", "p", 5}});
  auto single_stats = product_stats(single);
  single_stats[index(*single.find_product("p"))].avg_rating = 5.0;
  EXPECT_DOUBLE_EQ(avg_rating_deviation(*single.find_reviewer("lone"), single, single_stats), 1.0);
  // q averages 4.6 and r averages 4: deviations {1.6, 0} for dev.
  EXPECT_NEAR(rating_deviation(*t.find_reviewer("dev"), t, stats), 0.8, 1e-12);
  EXPECT_THROW(avg_rating_deviation(ReviewerId{999}, t, stats), std::out_of_range);
}

TEST(RatingDeviation, DeviationsTwoAndZero) {
  auto t = table_of({{"u", "a", 5}, {"v", "a", 1}, {"u", "b", 4}});
  auto stats = product_stats(t);
  EXPECT_DOUBLE_EQ(rating_deviation(*t.find_reviewer("u"), t, stats), 1.0);
  EXPECT_DOUBLE_EQ(avg_rating_deviation(*t.find_reviewer("u"), t, stats), 0.25);
}

TEST(Burstness, Examples) {
  auto t = table_of({{"day", "a", 5, "2016-01-01"}, {"day", "b", 5, "2016-01-01"},
                     {"long", "a", 5, "2016-01-01"}, {"long", "b", 5, "2016-02-15"},
                     {"half", "a", 5, "2016-01-01"}, {"half", "b", 5, "2016-01-16"},
                     {"one", "a", 5, "2016-03-03"}});
  EXPECT_EQ(burstness(*t.find_reviewer("day"), t), 1.0);
  EXPECT_EQ(burstness(*t.find_reviewer("long"), t), 0.0);
  EXPECT_DOUBLE_EQ(burstness(*t.find_reviewer("half"), t), 0.5);
  EXPECT_EQ(burstness(*t.find_reviewer("one"), t), 1.0);
  EXPECT_DOUBLE_EQ(burstness(*t.find_reviewer("long"), t, 90), 0.5);
}

namespace {

ReviewTable random_table(std::mt19937_64& rng, int reviewers, int products) {
  std::vector<RawReview> raw;
  const Date start = *parse_date("2015-01-01");
  for (int u = 0; u < reviewers; ++u) {
    const int count = 1 + static_cast<int>(rng() % 4);
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < std::min(count, products)) chosen.insert(static_cast<int>(rng() % products));
    for (int p : chosen) {
      raw.push_back({"u" + std::to_string(u), "p" + std::to_string(p), 1 + static_cast<int>(rng() % 5),
                     start + std::chrono::days{static_cast<int>(rng() % 90)}, Label::Unknown});
    }
  }
  return ReviewTable(std::move(raw));
}

}  // namespace

TEST(IndicatorProperties, AllWithinUnitIntervalOnRandomGroups) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_table(rng, 2 + trial % 12, 3 + trial % 5);
    auto stats = product_stats(t);
    auto v = compute_indicators(everyone(t), t, stats);
    for (double x : {v.rt, v.pt, v.nt, v.pi, v.avg_avd, v.avg_bst}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    EXPECT_GT(v.rt, 0.0);
    EXPECT_NEAR(v.pi, v.rt * v.pt * v.nt, 1e-15);
    EXPECT_NEAR(v.avg_avd * kMaxRatingDeviation, v.avg_avd_raw, 1e-12);
  }
}

TEST(IndicatorProperties, MatchNaiveSetArithmetic) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_table(rng, 2 + trial % 7, 4);
    auto g = everyone(t);
    std::vector<std::vector<std::string>> sets;
    for (std::uint32_t u = 0; u < t.reviewer_count(); ++u) {
      std::vector<std::string> s;
      for (auto row : t.by_reviewer(ReviewerId{u})) s.push_back(t.name(t.reviews()[row].product));
      sets.push_back(s);
    }
    // PT: products every member reviewed over products any member reviewed.
    std::vector<std::string> uni, inter = sets[0];
    for (const auto& s : sets) {
      for (const auto& p : s) {
        if (std::find(uni.begin(), uni.end(), p) == uni.end()) uni.push_back(p);
      }
      std::vector<std::string> keep;
      for (const auto& p : inter) {
        if (std::find(s.begin(), s.end(), p) != s.end()) keep.push_back(p);
      }
      inter = keep;
    }
    EXPECT_DOUBLE_EQ(product_tightness(g), static_cast<double>(inter.size()) / static_cast<double>(uni.size()));

    double js = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) js += oracle::naive_jaccard(sets[i], sets[j]);
    }
    const double n = static_cast<double>(sets.size());
    const double l = 1.0 / (1.0 + std::exp(-(n + static_cast<double>(uni.size()) - 3.0)));
    EXPECT_NEAR(neighbor_tightness(g), 2.0 * js / (n * (n - 1.0)) * l, 1e-12);
    EXPECT_NEAR(neighbor_tightness(g, NeighborNormalization::Literal), 2.0 * js / n * l, 1e-12);
  }
}

TEST(IndicatorProperties, InvariantUnderRenaming) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = random_table(rng, 6, 5);
    auto renamed_rows = t.to_raw();
    for (auto& r : renamed_rows) {
      r.reviewer = "zz" + r.reviewer + "_renamed";
      r.product = std::string(1, static_cast<char>('Z' - (r.product.back() - '0'))) + "prod";
    }
    ReviewTable renamed(renamed_rows);
    auto v1 = compute_indicators(everyone(t), t, product_stats(t));
    auto v2 = compute_indicators(everyone(renamed), renamed, product_stats(renamed));
    EXPECT_NEAR(v1.rt, v2.rt, 1e-15);
    EXPECT_NEAR(v1.pt, v2.pt, 1e-15);
    EXPECT_NEAR(v1.nt, v2.nt, 1e-12);
    EXPECT_NEAR(v1.avg_avd, v2.avg_avd, 1e-12);
    EXPECT_NEAR(v1.avg_bst, v2.avg_bst, 1e-12);
  }
}

TEST(Jaccard, Basic) {
  std::vector<ProductId> a{ProductId{1}, ProductId{2}}, b{ProductId{2}, ProductId{3}}, e;
  EXPECT_DOUBLE_EQ(jaccard(a, b), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(e, e), 0.0);
}
