#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fgd/dmon.hpp"
#include "json.hpp"

namespace fgd {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw std::runtime_error("checkpoint: row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::runtime_error("checkpoint: column count mismatch");
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = row.at(static_cast<std::size_t>(j2)).get<double>();
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json layers = json::array();
  for (const auto& l : ckpt.params.layers) {
    layers.push_back({{"weight", matrix_to_json(l.weight)}, {"skip", matrix_to_json(l.skip)}});
  }
  const auto& c = ckpt.config;
  json doc = {
      {"version", kCheckpointVersion},
      {"config",
       {{"k", c.k},
        {"hidden_widths", c.hidden_widths},
        {"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"dropout_rate", c.dropout_rate},
        {"collapse_weight", c.collapse_weight},
        {"seed", c.seed},
        {"assign_threshold", c.assign_threshold},
        {"add_self_loops", c.add_self_loops},
        {"positional_dims", c.positional_dims},
        {"positional_smoothing", c.positional_smoothing}}},
      {"final_loss", ckpt.final_loss},
      {"layers", std::move(layers)},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  const json doc = json::parse(in);
  if (doc.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  Checkpoint ckpt;
  const auto& c = doc.at("config");
  ckpt.config.k = c.at("k").get<int>();
  ckpt.config.hidden_widths = c.at("hidden_widths").get<std::vector<int>>();
  ckpt.config.learning_rate = c.at("learning_rate").get<double>();
  ckpt.config.epochs = c.at("epochs").get<int>();
  ckpt.config.dropout_rate = c.at("dropout_rate").get<double>();
  ckpt.config.collapse_weight = c.at("collapse_weight").get<double>();
  ckpt.config.seed = c.at("seed").get<std::uint64_t>();
  ckpt.config.assign_threshold = c.at("assign_threshold").get<double>();
  ckpt.config.add_self_loops = c.at("add_self_loops").get<bool>();
  ckpt.config.positional_dims = c.value("positional_dims", 0);
  ckpt.config.positional_smoothing = c.value("positional_smoothing", 0);
  ckpt.final_loss = doc.at("final_loss").get<double>();
  for (const auto& l : doc.at("layers")) {
    ckpt.params.layers.push_back({matrix_from_json(l.at("weight")), matrix_from_json(l.at("skip"))});
  }
  ckpt.params.check_shapes(ckpt.params.input_width());
  return ckpt;
}

void write_assignments(std::ostream& out, const ReviewTable& table, const PRGraph& graph,
                       const Eigen::MatrixXd& c, double threshold, char delimiter) {
  if (static_cast<std::size_t>(c.rows()) != graph.size()) {
    throw std::invalid_argument("assignment rows differ from graph node count");
  }
  out << "node_id" << delimiter << "argmax_cluster" << delimiter << "memberships" << delimiter << "max_prob\n";
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    Eigen::Index best = 0;
    const double top = c.row(i).maxCoeff(&best);
    std::string memberships;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (j == best || c(i, j) >= threshold) {
        if (!memberships.empty()) memberships += ';';
        memberships += std::to_string(j);
      }
    }
    char prob[32];
    std::snprintf(prob, sizeof(prob), "%.6f", top);
    out << node_label(table, graph.nodes[static_cast<std::size_t>(i)]) << delimiter << best << delimiter
        << memberships << delimiter << prob << '\n';
  }
}

}  // namespace fgd
