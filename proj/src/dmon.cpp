#include "fgd/dmon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgd/modularity.hpp"

namespace fgd {

using Eigen::Index;
using Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (k < 2) fail("k must be >= 2");
  for (int w : hidden_widths) {
    if (w < 1) fail("hidden widths must be positive");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must lie in (0,1]");
  if (epochs < 0) fail("epochs must be non-negative");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0,1)");
  if (!(collapse_weight >= 0.0 && std::isfinite(collapse_weight))) fail("collapse_weight must be >= 0");
  if (!(assign_threshold > 0.0 && assign_threshold < 1.0)) fail("assign_threshold must lie in (0,1)");
  if (positional_dims < 0) fail("positional_dims must be non-negative");
  if (positional_smoothing < 0) fail("positional_smoothing must be non-negative");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> layer_widths(int input_width, const std::vector<int>& hidden, int k) {
  std::vector<int> widths{input_width};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(k);
  return widths;
}

}  // namespace

GcnParams GcnParams::init(int input_width, const std::vector<int>& hidden_widths, int k, Rng& rng) {
  const auto widths = layer_widths(input_width, hidden_widths, k);
  GcnParams p;
  for (std::size_t t = 0; t + 1 < widths.size(); ++t) {
    const double bound = std::sqrt(3.0 / std::max(widths[t], 1));
    GcnLayer layer{MatrixXd(widths[t], widths[t + 1]), MatrixXd(widths[t], widths[t + 1])};
    for (Index j = 0; j < layer.weight.cols(); ++j) {
      for (Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = uniform(rng, -bound, bound);
    }
    for (Index j = 0; j < layer.skip.cols(); ++j) {
      for (Index i = 0; i < layer.skip.rows(); ++i) layer.skip(i, j) = uniform(rng, -bound, bound);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

GcnParams GcnParams::zeros(int input_width, const std::vector<int>& hidden_widths, int k) {
  const auto widths = layer_widths(input_width, hidden_widths, k);
  GcnParams p;
  for (std::size_t t = 0; t + 1 < widths.size(); ++t) {
    p.layers.push_back({MatrixXd::Zero(widths[t], widths[t + 1]), MatrixXd::Zero(widths[t], widths[t + 1])});
  }
  return p;
}

int GcnParams::input_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.rows());
}

int GcnParams::output_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.cols());
}

std::size_t GcnParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += static_cast<std::size_t>(l.weight.size() + l.skip.size());
  return total;
}

void GcnParams::check_shapes(int width) const {
  if (layers.empty()) throw std::invalid_argument("GCN has no layers");
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const auto& l = layers[t];
    if (l.weight.rows() != width || l.skip.rows() != width || l.weight.cols() != l.skip.cols()) {
      throw std::invalid_argument("GCN layer " + std::to_string(t) + " shape mismatch");
    }
    width = static_cast<int>(l.weight.cols());
  }
}

// ---------------------------------------------------------------------------

double selu(double x) {
  return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
}

double selu_derivative(double x) {
  return x > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(x);
}

SparseMatrix normalized_adjacency(const AdjacencyMatrix& a, bool add_self_loops) {
  SparseMatrix hat = a;
  if (add_self_loops) {
    SparseMatrix eye(a.rows(), a.cols());
    eye.setIdentity();
    hat = a + eye;
  }
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(hat.rows());
  for (Index col = 0; col < hat.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(hat, col); it; ++it) inv_sqrt[it.row()] += it.value();
  }
  for (Index i = 0; i < inv_sqrt.size(); ++i) {
    inv_sqrt[i] = inv_sqrt[i] > 0.0 ? 1.0 / std::sqrt(inv_sqrt[i]) : 0.0;
  }
  for (Index col = 0; col < hat.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(hat, col); it; ++it) {
      it.valueRef() *= inv_sqrt[it.row()] * inv_sqrt[col];
    }
  }
  hat.prune(0.0);
  return hat;
}

MatrixXd row_softmax(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - top);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

ForwardPass gcn_forward(const SparseMatrix& a_norm, const MatrixXd& x, const GcnParams& params,
                        const DropoutMasks* masks) {
  params.check_shapes(static_cast<int>(x.cols()));
  if (a_norm.rows() != x.rows() || a_norm.cols() != x.rows()) {
    throw std::invalid_argument("adjacency and feature matrix disagree on node count");
  }
  const std::size_t hidden_layers = params.layers.size() - 1;
  if (masks && masks->size() != hidden_layers) throw std::invalid_argument("one dropout mask per hidden layer");

  ForwardPass fp;
  MatrixXd h = x;
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    const auto& layer = params.layers[t];
    MatrixXd ah = a_norm * h;
    MatrixXd z = ah * layer.weight;
    z.noalias() += h * layer.skip;
    fp.inputs.push_back(std::move(h));
    fp.propagated.push_back(std::move(ah));
    if (t == hidden_layers) {
      fp.logits = z;
      fp.pre_activations.push_back(std::move(z));
      break;
    }
    h = z.unaryExpr([](double v) { return selu(v); });
    if (masks) h.array() *= (*masks)[t].array();
    fp.pre_activations.push_back(std::move(z));
  }
  fp.assignment = row_softmax(fp.logits);
  return fp;
}

// ---------------------------------------------------------------------------

double collapse_term(const MatrixXd& c) {
  const double n = static_cast<double>(c.rows());
  const double k = static_cast<double>(c.cols());
  return std::sqrt(k) / n * c.colwise().sum().norm() - 1.0;
}

double dmon_loss(const MatrixXd& c, const MatrixXd& b, double total_weight, int k, double collapse_weight) {
  if (c.cols() != k) throw std::invalid_argument("assignment width differs from k");
  return -modularity_trace(b, c, total_weight) + collapse_weight * collapse_term(c);
}

DmonObjective::DmonObjective(const AdjacencyMatrix& a, int k, double collapse_weight)
    : a_(a), k_(k), collapse_weight_(collapse_weight) {
  const DegreeVector deg = degree_vector(a);
  if (deg.degenerate()) throw UndefinedModularity();
  degree_ = deg.d;
  total_weight_ = deg.total_weight;
}

double DmonObjective::loss(const MatrixXd& c) const {
  const MatrixXd ac = a_ * c;
  const Eigen::RowVectorXd dc = degree_.transpose() * c;
  const double trace = (c.array() * ac.array()).sum() - dc.squaredNorm() / total_weight_;
  return -trace / total_weight_ + collapse_weight_ * collapse_term(c);
}

double DmonObjective::loss_and_gradient(const MatrixXd& c, MatrixXd& grad) const {
  if (c.cols() != k_) throw std::invalid_argument("assignment width differs from k");
  const double n = static_cast<double>(c.rows());
  const MatrixXd ac = a_ * c;
  const Eigen::RowVectorXd dc = degree_.transpose() * c;
  const double trace = (c.array() * ac.array()).sum() - dc.squaredNorm() / total_weight_;

  const Eigen::RowVectorXd mass = c.colwise().sum();
  const double mass_norm = mass.norm();
  const double scale = std::sqrt(static_cast<double>(k_)) / n;

  // d/dC of -Tr(C^T B C)/2m = -(2 A C - 2 d (d^T C)/2m) / 2m
  grad = ac;
  grad.noalias() -= degree_ * dc / total_weight_;
  grad *= -2.0 / total_weight_;
  if (mass_norm > 0.0) grad.rowwise() += (collapse_weight_ * scale / mass_norm) * mass;

  return -trace / total_weight_ + collapse_weight_ * (scale * mass_norm - 1.0);
}

double loss_and_gradients(const SparseMatrix& a_norm, const MatrixXd& x, const GcnParams& params,
                          const DmonObjective& objective, ParamGradients& grads, const DropoutMasks* masks) {
  const ForwardPass fp = gcn_forward(a_norm, x, params, masks);
  MatrixXd grad_c;
  const double loss = objective.loss_and_gradient(fp.assignment, grad_c);

  // softmax backward, row by row: dZ = C .* (G - <G, C>)
  const Eigen::VectorXd inner = (grad_c.array() * fp.assignment.array()).rowwise().sum();
  MatrixXd delta = fp.assignment.array() * (grad_c.colwise() - inner).array();

  grads.layers.resize(params.layers.size());
  for (std::size_t t = params.layers.size(); t-- > 0;) {
    const auto& layer = params.layers[t];
    if (t + 1 < params.layers.size()) {
      // delta currently holds dLoss/dH(t+1) (post-dropout); go through dropout and SeLU.
      if (masks) delta.array() *= (*masks)[t].array();
      delta.array() *= fp.pre_activations[t].unaryExpr([](double v) { return selu_derivative(v); }).array();
    }
    grads.layers[t].weight = fp.propagated[t].transpose() * delta;
    grads.layers[t].skip = fp.inputs[t].transpose() * delta;
    if (t > 0) {
      MatrixXd dh = a_norm * (delta * layer.weight.transpose());
      dh.noalias() += delta * layer.skip.transpose();
      delta = std::move(dh);
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

struct AdamState {
  std::vector<GcnLayer> m, v;
  int step = 0;
};

void adam_step(GcnParams& params, const ParamGradients& g, AdamState& s, double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++s.step;
  const double c1 = 1.0 - std::pow(beta1, s.step);
  const double c2 = 1.0 - std::pow(beta2, s.step);
  auto update = [&](MatrixXd& w, const MatrixXd& grad, MatrixXd& m, MatrixXd& v) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    update(params.layers[t].weight, g.layers[t].weight, s.m[t].weight, s.v[t].weight);
    update(params.layers[t].skip, g.layers[t].skip, s.m[t].skip, s.v[t].skip);
  }
}

DropoutMasks sample_masks(const GcnParams& params, Index n, double rate, Rng& rng) {
  DropoutMasks masks;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t t = 0; t + 1 < params.layers.size(); ++t) {
    MatrixXd mask(n, params.layers[t].weight.cols());
    for (Index j = 0; j < mask.cols(); ++j) {
      for (Index i = 0; i < n; ++i) mask(i, j) = uniform01(rng) < rate ? 0.0 : keep_scale;
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

void check_row_stochastic(const MatrixXd& c, int epoch) {
  for (Index i = 0; i < c.rows(); ++i) {
    if (std::abs(c.row(i).sum() - 1.0) > 1e-9) {
      throw std::logic_error("soft assignment row " + std::to_string(i) + " not stochastic at epoch " +
                             std::to_string(epoch));
    }
  }
}

}  // namespace

TrainResult train(const AdjacencyMatrix& a, const MatrixXd& x, const TrainConfig& cfg) {
  cfg.validate();
  if (a.rows() == 0) throw std::invalid_argument("cannot train on an empty graph");
  const DmonObjective objective(a, cfg.k, cfg.collapse_weight);
  const SparseMatrix a_norm = normalized_adjacency(a, cfg.add_self_loops);

  Rng rng(cfg.seed);
  TrainResult result;
  result.params = GcnParams::init(static_cast<int>(x.cols()), cfg.hidden_widths, cfg.k, rng);
  result.initial_loss = objective.loss(gcn_forward(a_norm, x, result.params).assignment);

  AdamState adam;
  adam.m = GcnParams::zeros(static_cast<int>(x.cols()), cfg.hidden_widths, cfg.k).layers;
  adam.v = adam.m;

  ParamGradients grads;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    DropoutMasks masks;
    if (cfg.dropout_rate > 0.0) masks = sample_masks(result.params, a.rows(), cfg.dropout_rate, rng);
    const double loss = loss_and_gradients(a_norm, x, result.params, objective, grads,
                                           cfg.dropout_rate > 0.0 ? &masks : nullptr);
    if (!std::isfinite(loss)) {
      throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(loss);
    adam_step(result.params, grads, adam, cfg.learning_rate);
  }

  result.assignment = gcn_forward(a_norm, x, result.params).assignment;
  check_row_stochastic(result.assignment, cfg.epochs);
  result.final_loss = objective.loss(result.assignment);
  if (!std::isfinite(result.final_loss)) throw TrainingDiverged("final loss is non-finite");
  return result;
}

MatrixXd positional_features(const AdjacencyMatrix& a, int dims, int smoothing, std::uint64_t seed) {
  const Index n = a.rows();
  Rng rng(seed);
  MatrixXd r(n, std::max(dims, 0));
  for (Index j = 0; j < r.cols(); ++j) {
    for (Index i = 0; i < n; ++i) r(i, j) = uniform(rng, -1.0, 1.0);
  }
  if (smoothing > 0 && n > 0) {
    const SparseMatrix a_norm = normalized_adjacency(a);
    for (int t = 0; t < smoothing; ++t) r = a_norm * r;
  }
  for (Index j = 0; j < r.cols(); ++j) {
    const double mean = r.col(j).mean();
    r.col(j).array() -= mean;
    const double sd = std::sqrt(r.col(j).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12) r.col(j) /= sd;
    else r.col(j).setZero();
  }
  return r;
}

MatrixXd training_features(const PRGraph& graph, const TrainConfig& cfg, EdgeWeighting weighting) {
  const MatrixXd base = node_features(graph, weighting);
  if (cfg.positional_dims <= 0) return base;
  const MatrixXd pos = positional_features(adjacency(graph, weighting), cfg.positional_dims,
                                           cfg.positional_smoothing, derive_seed(cfg.seed, "positional"));
  MatrixXd x(base.rows(), base.cols() + pos.cols());
  x << base, pos;
  return x;
}

TrainResult train(const PRGraph& graph, const TrainConfig& cfg, EdgeWeighting weighting) {
  return train(adjacency(graph, weighting), training_features(graph, cfg, weighting), cfg);
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const AdjacencyMatrix& a, const MatrixXd& x, const GcnParams& params,
                                   const TrainConfig& cfg, double h) {
  const DmonObjective objective(a, params.output_width(), cfg.collapse_weight);
  const SparseMatrix a_norm = normalized_adjacency(a, cfg.add_self_loops);

  ParamGradients analytic;
  loss_and_gradients(a_norm, x, params, objective, analytic);

  GcnParams probe = params;
  auto eval = [&] { return objective.loss(gcn_forward(a_norm, x, probe).assignment); };
  auto block_error = [&](MatrixXd& w, const MatrixXd& g) {
    double worst = 0.0;
    for (Index j = 0; j < w.cols(); ++j) {
      for (Index i = 0; i < w.rows(); ++i) {
        const double saved = w(i, j);
        w(i, j) = saved + h;
        const double up = eval();
        w(i, j) = saved - h;
        const double down = eval();
        w(i, j) = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(g(i, j)), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(g(i, j) - numeric) / denom);
      }
    }
    return worst;
  };

  GradientCheckReport report;
  for (std::size_t t = 0; t < probe.layers.size(); ++t) {
    report.weight_error.push_back(block_error(probe.layers[t].weight, analytic.layers[t].weight));
    report.skip_error.push_back(block_error(probe.layers[t].skip, analytic.layers[t].skip));
    report.max_relative_error =
        std::max({report.max_relative_error, report.weight_error.back(), report.skip_error.back()});
  }
  return report;
}

GradientCheckReport gradient_check(const PRGraph& graph, const TrainConfig& cfg, double h) {
  if (graph.size() > 50) throw std::invalid_argument("gradient check limited to graphs of at most 50 nodes");
  const MatrixXd x = training_features(graph, cfg);
  Rng rng(cfg.seed);
  const GcnParams params = GcnParams::init(static_cast<int>(x.cols()), cfg.hidden_widths, cfg.k, rng);
  return gradient_check(adjacency(graph), x, params, cfg, h);
}

// ---------------------------------------------------------------------------

std::vector<Cluster> assign_clusters(const MatrixXd& c, double threshold) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(c.cols()));
  for (Index i = 0; i < c.rows(); ++i) {
    Index best = 0;
    c.row(i).maxCoeff(&best);
    for (Index j = 0; j < c.cols(); ++j) {
      if (j == best || c(i, j) >= threshold) members[static_cast<std::size_t>(j)].push_back(static_cast<std::size_t>(i));
    }
  }
  std::vector<Cluster> out;
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (!members[j].empty()) out.push_back({static_cast<int>(j), std::move(members[j])});
  }
  return out;
}

}  // namespace fgd
