#include "fgd/modularity.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fgd {

DegreeVector degree_vector(const AdjacencyMatrix& a) {
  DegreeVector out;
  out.d = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (AdjacencyMatrix::InnerIterator it(a, col); it; ++it) out.d[it.row()] += it.value();
  }
  out.total_weight = out.d.sum();
  return out;
}

Eigen::MatrixXd HardAssignment::to_matrix() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) c(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return c;
}

namespace {

void check_assignment(const AdjacencyMatrix& a, const HardAssignment& assignment) {
  if (static_cast<Eigen::Index>(assignment.labels.size()) != a.rows()) {
    throw std::invalid_argument("assignment length does not match node count");
  }
  for (int label : assignment.labels) {
    if (label < 0 || label >= assignment.k) throw std::invalid_argument("cluster label out of range");
  }
}

}  // namespace

double modularity(const AdjacencyMatrix& a, const HardAssignment& assignment) {
  check_assignment(a, assignment);
  const DegreeVector deg = degree_vector(a);
  if (deg.degenerate()) throw UndefinedModularity();

  double within = 0.0;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (AdjacencyMatrix::InnerIterator it(a, col); it; ++it) {
      if (assignment.labels[static_cast<std::size_t>(it.row())] ==
          assignment.labels[static_cast<std::size_t>(col)]) {
        within += it.value();
      }
    }
  }
  std::vector<double> mass(static_cast<std::size_t>(assignment.k), 0.0);
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    mass[static_cast<std::size_t>(assignment.labels[i])] += deg.d[static_cast<Eigen::Index>(i)];
  }
  double expected = 0.0;
  for (double m : mass) expected += m * m;
  const double two_m = deg.total_weight;
  return (within - expected / two_m) / two_m;
}

Eigen::MatrixXd modularity_matrix(const AdjacencyMatrix& a) {
  const DegreeVector deg = degree_vector(a);
  if (deg.degenerate()) throw UndefinedModularity();
  Eigen::MatrixXd b = Eigen::MatrixXd(a);
  b.noalias() -= deg.d * deg.d.transpose() / deg.total_weight;
  return b;
}

double modularity_trace(const Eigen::MatrixXd& b, const Eigen::MatrixXd& c, double total_weight) {
  if (total_weight <= 0.0) throw UndefinedModularity();
  return (c.transpose() * b * c).trace() / total_weight;
}

BestPartition brute_force_best_partition(const AdjacencyMatrix& a, int k) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (n > kBruteForceMaxNodes) {
    throw std::invalid_argument("brute-force partition search refuses n=" + std::to_string(n) +
                                " (limit " + std::to_string(kBruteForceMaxNodes) + ")");
  }
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const DegreeVector deg = degree_vector(a);
  if (deg.degenerate()) throw UndefinedModularity();

  const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  const double two_m = deg.total_weight;

  BestPartition best;
  best.q = -std::numeric_limits<double>::infinity();
  if (n == 0) {
    best.q = 0.0;
    best.assignment.k = 1;
    return best;
  }

  // Restricted growth string: labels[0] = 0, labels[i] <= 1 + max(labels[0..i)).
  std::vector<int> labels(n, 0);
  std::vector<int> prefix_max(n, 0);
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);

  auto evaluate = [&] {
    std::fill(mass.begin(), mass.end(), 0.0);
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass[static_cast<std::size_t>(labels[i])] += deg.d[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[i] == labels[j]) within += dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    double expected = 0.0;
    for (double m : mass) expected += m * m;
    return (within - expected / two_m) / two_m;
  };

  while (true) {
    const double q = evaluate();
    if (q > best.q) {
      best.q = q;
      best.assignment.labels = labels;
    }
    // Advance to the next restricted growth string with block count <= k.
    std::size_t i = n - 1;
    while (i > 0) {
      const int limit = std::min(prefix_max[i - 1] + 1, k - 1);
      if (labels[i] < limit) break;
      --i;
    }
    if (i == 0) break;
    ++labels[i];
    prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      labels[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  best.assignment.k = 1 + *std::max_element(best.assignment.labels.begin(), best.assignment.labels.end());
  return best;
}

}  // namespace fgd
