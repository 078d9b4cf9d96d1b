#include "fgd/pr_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <ostream>
#include <unordered_map>

namespace fgd {

std::vector<PRNode> build_nodes(const ReviewTable& table) {
  std::map<PRNodeId, std::vector<ReviewerId>> grouped;
  for (const auto& r : table.reviews()) grouped[{r.product, r.rating}].push_back(r.reviewer);

  std::vector<PRNode> nodes;
  nodes.reserve(grouped.size());
  for (auto& [id, reviewers] : grouped) {
    std::sort(reviewers.begin(), reviewers.end());
    reviewers.erase(std::unique(reviewers.begin(), reviewers.end()), reviewers.end());
    nodes.push_back({id, std::move(reviewers)});
  }
  return nodes;
}

std::vector<PREdge> build_edges(const std::vector<PRNode>& nodes, std::size_t min_co_review) {
  if (min_co_review == 0) min_co_review = 1;

  std::unordered_map<std::uint32_t, std::vector<std::size_t>> reviewer_nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (ReviewerId r : nodes[i].reviewers) reviewer_nodes[index(r)].push_back(i);
  }
  // Visit reviewers in id order so co-reviewer lists come out sorted.
  std::vector<std::uint32_t> reviewers;
  reviewers.reserve(reviewer_nodes.size());
  for (const auto& entry : reviewer_nodes) reviewers.push_back(entry.first);
  std::sort(reviewers.begin(), reviewers.end());

  std::unordered_map<std::uint64_t, std::vector<ReviewerId>> pairs;
  for (std::uint32_t r : reviewers) {
    const auto& list = reviewer_nodes[r];  // ascending node positions
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        const std::size_t u = list[a], v = list[b];
        if (nodes[u].id.product == nodes[v].id.product) continue;
        pairs[(static_cast<std::uint64_t>(u) << 32) | v].push_back(ReviewerId{r});
      }
    }
  }

  std::vector<PREdge> edges;
  for (auto& [key, co] : pairs) {
    if (co.size() < min_co_review) continue;
    edges.push_back({static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xffffffffu),
                     std::move(co)});
  }
  std::sort(edges.begin(), edges.end(),
            [](const PREdge& a, const PREdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  return edges;
}

PRGraph build_graph(const ReviewTable& table, std::size_t min_co_review) {
  PRGraph g;
  g.nodes = build_nodes(table);
  g.edges = build_edges(g.nodes, min_co_review);
  g.min_co_review = std::max<std::size_t>(min_co_review, 1);
  return g;
}

AdjacencyMatrix adjacency(const PRGraph& graph, EdgeWeighting mode) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edges.size() * 2);
  for (const auto& e : graph.edges) {
    const double w = mode == EdgeWeighting::Binary ? 1.0 : static_cast<double>(e.co_reviewers.size());
    triplets.emplace_back(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v), w);
    triplets.emplace_back(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u), w);
  }
  AdjacencyMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

FeatureMatrix node_features(const PRGraph& graph, EdgeWeighting mode) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const auto& e : graph.edges) {
    const double w = mode == EdgeWeighting::Binary ? 1.0 : static_cast<double>(e.co_reviewers.size());
    degree[static_cast<Eigen::Index>(e.u)] += w;
    degree[static_cast<Eigen::Index>(e.v)] += w;
  }
  FeatureMatrix x = FeatureMatrix::Zero(n, kNodeFeatureWidth);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& node = graph.nodes[static_cast<std::size_t>(i)];
    x(i, node.id.rating - 1) = 1.0;
    x(i, 5) = std::log1p(static_cast<double>(node.reviewers.size()));
    x(i, 6) = std::log1p(degree[i]);
  }
  return x;
}

std::string node_label(const ReviewTable& table, const PRNode& node) {
  return table.name(node.id.product) + "#" + std::to_string(node.id.rating);
}

void write_edge_list(std::ostream& out, const ReviewTable& table, const PRGraph& graph,
                     EdgeWeighting mode) {
  for (const auto& e : graph.edges) {
    const std::size_t w = mode == EdgeWeighting::Binary ? 1 : e.co_reviewers.size();
    out << node_label(table, graph.nodes[e.u]) << '\t' << node_label(table, graph.nodes[e.v]) << '\t'
        << w << '\n';
  }
}

void write_node_attributes(std::ostream& out, const ReviewTable& table, const PRGraph& graph) {
  for (const auto& node : graph.nodes) {
    out << table.name(node.id.product) << '\t' << node.id.rating << '\t' << node.reviewers.size()
        << '\n';
  }
}

}  // namespace fgd
