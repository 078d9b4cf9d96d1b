#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgd/pr_graph.hpp"
#include "fgd/rng.hpp"

namespace fgd {

struct TrainConfig {
  int k = 200;                         // cluster count
  std::vector<int> hidden_widths{64};  // one graph-conv layer with SeLU per entry
  double learning_rate = 1e-3;
  int epochs = 500;
  double dropout_rate = 0.5;
  double collapse_weight = 0.5;  // lambda on the collapse regulariser
  std::uint64_t seed = 0;
  double assign_threshold = 0.2;
  bool add_self_loops = false;  // use A + I inside the normalised adjacency
  int positional_dims = 32;      // seeded random feature columns appended to the node features
  int positional_smoothing = 2;  // propagation steps applied to those columns

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct GcnLayer {
  Eigen::MatrixXd weight;  // neighbourhood transform, in x out
  Eigen::MatrixXd skip;    // skip-connection transform, in x out
};

/**
 * Stacked graph convolutions with skip connections:
 *   H(t+1) = SeLU(Ã H(t) W(t) + H(t) Ws(t))
 * for hidden layers, and the same affine map without activation for the
 * final layer, whose k outputs are the cluster logits.
 */
struct GcnParams {
  std::vector<GcnLayer> layers;

  /// LeCun-uniform initialisation, bound sqrt(3 / fan_in).
  static GcnParams init(int input_width, const std::vector<int>& hidden_widths, int k, Rng& rng);
  static GcnParams zeros(int input_width, const std::vector<int>& hidden_widths, int k);

  int input_width() const;
  int output_width() const;
  std::size_t parameter_count() const;
  /// Throws std::invalid_argument unless layer shapes chain from input_width.
  void check_shapes(int input_width) const;
};

inline constexpr double kSeluScale = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double selu(double x);
double selu_derivative(double x);

/**
 * D^-1/2 A D^-1/2 with degrees taken from A itself (no self-loops unless
 * requested). Zero-degree rows and columns stay zero.
 */
Eigen::SparseMatrix<double> normalized_adjacency(const AdjacencyMatrix& a, bool add_self_loops = false);

struct ForwardPass {
  std::vector<Eigen::MatrixXd> inputs;           // H(t) as fed to layer t (after dropout)
  std::vector<Eigen::MatrixXd> propagated;       // Ã H(t)
  std::vector<Eigen::MatrixXd> pre_activations;  // Z(t)
  Eigen::MatrixXd logits;
  Eigen::MatrixXd assignment;  // row softmax of logits

  /// Hidden states H(1..L-1) after activation (and dropout when supplied).
  std::vector<Eigen::MatrixXd> hidden() const {
    return {inputs.begin() + 1, inputs.end()};
  }
};

/// Dropout masks hold 0 or 1/(1-p) per hidden activation; one per hidden layer.
using DropoutMasks = std::vector<Eigen::MatrixXd>;

ForwardPass gcn_forward(const Eigen::SparseMatrix<double>& a_norm, const Eigen::MatrixXd& x,
                        const GcnParams& params, const DropoutMasks* masks = nullptr);

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits);

/**
 * -1/2m Tr(C^T B C) + lambda * (sqrt(k)/n * ||1^T C||_2 - 1).
 * Throws UndefinedModularity for 2m = 0.
 */
double dmon_loss(const Eigen::MatrixXd& c, const Eigen::MatrixXd& b, double total_weight, int k,
                 double collapse_weight);

/// Collapse regulariser sqrt(k)/n * ||1^T C||_2 - 1 (without lambda).
double collapse_term(const Eigen::MatrixXd& c);

/**
 * The same loss evaluated with B kept implicit as A - d d^T / 2m, so that
 * the dense n x n modularity matrix is never formed during training.
 */
class DmonObjective {
 public:
  DmonObjective(const AdjacencyMatrix& a, int k, double collapse_weight);

  double loss(const Eigen::MatrixXd& c) const;
  /// Loss and dLoss/dC.
  double loss_and_gradient(const Eigen::MatrixXd& c, Eigen::MatrixXd& grad) const;

  double total_weight() const { return total_weight_; }

 private:
  AdjacencyMatrix a_;
  Eigen::VectorXd degree_;
  double total_weight_;
  int k_;
  double collapse_weight_;
};

struct ParamGradients {
  std::vector<GcnLayer> layers;
};

/// Loss and analytic gradients of the objective through the network.
double loss_and_gradients(const Eigen::SparseMatrix<double>& a_norm, const Eigen::MatrixXd& x,
                          const GcnParams& params, const DmonObjective& objective,
                          ParamGradients& grads, const DropoutMasks* masks = nullptr);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  Eigen::MatrixXd assignment;  // evaluated without dropout after the last epoch
  GcnParams params;
  std::vector<double> loss_trace;  // training loss per epoch (with dropout)
  double initial_loss = 0.0;       // dropout-free loss before the first update
  double final_loss = 0.0;         // dropout-free loss after the last update
};

/**
 * Full-batch Adam on the DMoN objective. Deterministic for a given seed:
 * weights and dropout masks are drawn from one generator seeded by cfg.seed.
 * Throws UndefinedModularity if 2m = 0 and TrainingDiverged on a non-finite loss.
 */
TrainResult train(const AdjacencyMatrix& a, const Eigen::MatrixXd& x, const TrainConfig& cfg);

/**
 * `dims` columns of U(-1, 1) noise from `seed`, propagated `smoothing` times
 * through the normalised adjacency, then standardised per column (a column
 * with zero spread becomes zero). Nodes that share neighbourhoods end up with
 * similar rows while otherwise identical nodes are told apart.
 */
Eigen::MatrixXd positional_features(const AdjacencyMatrix& a, int dims, int smoothing, std::uint64_t seed);

/// node_features followed by the positional columns configured in cfg.
Eigen::MatrixXd training_features(const PRGraph& graph, const TrainConfig& cfg,
                                  EdgeWeighting weighting = EdgeWeighting::CoReviewCount);

/// Trains on the graph's adjacency and training_features.
TrainResult train(const PRGraph& graph, const TrainConfig& cfg,
                  EdgeWeighting weighting = EdgeWeighting::CoReviewCount);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::vector<double> weight_error;  // per layer
  std::vector<double> skip_error;    // per layer
};

/**
 * Central finite differences (step h) of the dropout-free loss against the
 * analytic gradients, entry by entry. Relative error is
 * |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
 */
GradientCheckReport gradient_check(const AdjacencyMatrix& a, const Eigen::MatrixXd& x,
                                   const GcnParams& params, const TrainConfig& cfg, double h = 1e-5);

/// Randomly initialised params (from cfg.seed) on the graph's adjacency and training_features.
GradientCheckReport gradient_check(const PRGraph& graph, const TrainConfig& cfg, double h = 1e-5);

struct Cluster {
  int id = 0;
  std::vector<std::size_t> nodes;  // ascending
};

/**
 * Overlapping hard clusters: every node joins its argmax cluster (lowest
 * index on ties) and every cluster whose probability is >= threshold.
 * Empty clusters are dropped; the rest are returned in id order.
 */
std::vector<Cluster> assign_clusters(const Eigen::MatrixXd& c, double threshold);

// ---------------------------------------------------------------------------
// Persistence

struct Checkpoint {
  GcnParams params;
  TrainConfig config;
  double final_loss = 0.0;
};

inline constexpr int kCheckpointVersion = 1;

/// Structured-text (JSON) checkpoint. Doubles are written with round-trip precision.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rows "node_id, argmax_cluster, memberships, max_prob"; memberships joined by ';'.
void write_assignments(std::ostream& out, const ReviewTable& table, const PRGraph& graph,
                       const Eigen::MatrixXd& c, double threshold, char delimiter = ',');

}  // namespace fgd
