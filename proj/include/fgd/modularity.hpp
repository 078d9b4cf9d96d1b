#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fgd/pr_graph.hpp"

namespace fgd {

/// Raised when 2m = 0: modularity has no meaning on an edgeless graph.
class UndefinedModularity : public std::domain_error {
 public:
  UndefinedModularity() : std::domain_error("modularity undefined: total edge weight is zero") {}
};

struct DegreeVector {
  Eigen::VectorXd d;        // weighted degree (row sums of A)
  double total_weight = 0;  // 2m = sum of d

  bool degenerate() const { return total_weight <= 0.0; }
};

DegreeVector degree_vector(const AdjacencyMatrix& a);

/// Exactly one cluster label in [0, k) per node.
struct HardAssignment {
  std::vector<int> labels;
  int k = 0;

  /// Binary n x k indicator matrix.
  Eigen::MatrixXd to_matrix() const;
};

/**
 * Q = 1/2m * sum_ij (A_ij - d_i d_j / 2m) delta(c_i, c_j) over ordered pairs
 * including i = j. Evaluated in O(nnz + n) from within-cluster weight and
 * per-cluster degree mass. Throws UndefinedModularity when 2m = 0.
 */
double modularity(const AdjacencyMatrix& a, const HardAssignment& assignment);

/// B = A - d d^T / 2m, dense. Throws UndefinedModularity when 2m = 0.
Eigen::MatrixXd modularity_matrix(const AdjacencyMatrix& a);

/// 1/2m * Tr(C^T B C); C may be hard or soft.
double modularity_trace(const Eigen::MatrixXd& b, const Eigen::MatrixXd& c, double total_weight);

struct BestPartition {
  HardAssignment assignment;
  double q = 0.0;
};

inline constexpr std::size_t kBruteForceMaxNodes = 12;

/**
 * Exhaustive search over all set partitions of the nodes into at most k
 * unlabeled blocks (restricted growth strings). Returns the first maximiser
 * in enumeration order. Throws std::invalid_argument for n > 12 and
 * UndefinedModularity for 2m = 0.
 */
BestPartition brute_force_best_partition(const AdjacencyMatrix& a, int k);

}  // namespace fgd
