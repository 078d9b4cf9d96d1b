#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "fgd/review.hpp"

namespace fgd {

using AdjacencyMatrix = Eigen::SparseMatrix<double>;
using FeatureMatrix = Eigen::MatrixXd;

struct PRNodeId {
  ProductId product{};
  int rating = 0;

  auto operator<=>(const PRNodeId&) const = default;
};

/// A (product, rating) pair and every reviewer who gave that product that rating.
struct PRNode {
  PRNodeId id;
  std::vector<ReviewerId> reviewers;  // sorted, nonempty
};

/// Undirected edge u < v (node positions) between nodes of distinct products.
struct PREdge {
  std::size_t u = 0;
  std::size_t v = 0;
  std::vector<ReviewerId> co_reviewers;  // sorted intersection of endpoint reviewer sets
};

enum class EdgeWeighting { Binary, CoReviewCount };

struct PRGraph {
  std::vector<PRNode> nodes;  // sorted by (product, rating)
  std::vector<PREdge> edges;  // sorted by (u, v)
  std::size_t min_co_review = 2;

  std::size_t size() const { return nodes.size(); }
};

/// One node per (product, rating) pair present in the table, in (product, rating) order.
std::vector<PRNode> build_nodes(const ReviewTable& table);

/**
 * Links nodes of distinct products whose reviewer sets share at least
 * min_co_review reviewers. Pairs are discovered through a reviewer -> nodes
 * inverted index, so cost scales with the sum of squared reviewer activity
 * rather than the square of the node count.
 */
std::vector<PREdge> build_edges(const std::vector<PRNode>& nodes, std::size_t min_co_review);

PRGraph build_graph(const ReviewTable& table, std::size_t min_co_review = 2);

AdjacencyMatrix adjacency(const PRGraph& graph, EdgeWeighting mode = EdgeWeighting::CoReviewCount);

/// Feature width of node_features().
inline constexpr int kNodeFeatureWidth = 7;

/// Per node: one-hot rating (5), log(1 + reviewer count), log(1 + weighted degree).
FeatureMatrix node_features(const PRGraph& graph, EdgeWeighting mode = EdgeWeighting::CoReviewCount);

/// "product#rating"
std::string node_label(const ReviewTable& table, const PRNode& node);

/// Edge list "node_u \t node_v \t weight".
void write_edge_list(std::ostream& out, const ReviewTable& table, const PRGraph& graph,
                     EdgeWeighting mode);
/// Node attributes "product \t rating \t reviewer_count".
void write_node_attributes(std::ostream& out, const ReviewTable& table, const PRGraph& graph);

}  // namespace fgd
