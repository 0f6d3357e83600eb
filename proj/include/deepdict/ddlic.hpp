#pragma once

// Deep dictionary learning with an intra-class compactness constraint.
//
// Each layer minimizes
//   F(D, Z) = ||Z_prev - D Z||_F^2 + alpha * sum_c sum_{i,j in c} ||z_i - z_j||^2
// by alternating the closed-form least-squares dictionary with a
// Gauss-Seidel sweep of exact per-column minimizers
//   z_k = [D^T D + 2 alpha (n_c - 1) I]^{-1} (D^T z_prev_k + 2 alpha sum_{i != k} z_i).
// Layers are trained greedily; layer l consumes the codes of layer l-1.

#include <deepdict/dataset.hpp>
#include <deepdict/linalg.hpp>
#include <deepdict/model.hpp>

#include <map>
#include <optional>
#include <vector>

namespace deepdict {

struct DdlicConfig {
  std::vector<Index> layer_sizes{400, 200, 100};
  std::vector<double> alphas{1e-3, 1e-3, 1e-3};
  int iters = 20;
  std::uint64_t seed = 0;
  InitMode init = InitMode::qr_first_random_rest;
  RidgePolicy ridge;
  /// Stop a layer early once the relative objective change drops below this.
  /// Unset (the default) always runs `iters` iterations.
  std::optional<double> early_stop_rel_change;
};

struct DdlicModel {
  DictionaryStack stack;
  std::vector<double> alphas;
  int iters = 20;
  std::uint64_t seed = 0;
  InitMode init = InitMode::qr_first_random_rest;
  std::vector<long long> train_labels;
  ClassIndex class_index;

  const Matrix& train_repr() const { return stack.layer_codes.back(); }
};

inline void validate(const DdlicConfig& cfg, Index input_dim) {
  require(!cfg.layer_sizes.empty(), "depth must be >= 1");
  require(cfg.alphas.size() == cfg.layer_sizes.size(),
          "got " + std::to_string(cfg.alphas.size()) + " alphas for " + std::to_string(cfg.layer_sizes.size()) +
              " layers");
  for (auto k : cfg.layer_sizes) require(k >= 1, "layer sizes must be >= 1");
  for (auto a : cfg.alphas) require(a >= 0.0 && std::isfinite(a), "alphas must be finite and >= 0");
  require(cfg.iters >= 1, "iterations per layer must be >= 1");
  if (cfg.init == InitMode::qr_first_random_rest)
    require(cfg.layer_sizes.front() <= input_dim,
            "QR init needs k_1 <= k_0 (k_1=" + std::to_string(cfg.layer_sizes.front()) +
                ", k_0=" + std::to_string(input_dim) + ")");
}

/// Throws unless every column 0..cols-1 appears in exactly one class.
inline void validate_class_index(const ClassIndex& classes, Index cols) {
  std::vector<char> seen(static_cast<std::size_t>(cols), 0);
  Index total = 0;
  for (const auto& members : classes) {
    for (auto j : members) {
      require(j >= 0 && j < cols, "class index refers to column " + std::to_string(j) + " of " +
                                      std::to_string(cols));
      require(!seen[static_cast<std::size_t>(j)], "column " + std::to_string(j) + " belongs to two classes");
      seen[static_cast<std::size_t>(j)] = 1;
      ++total;
    }
  }
  require(total == cols, "class index covers " + std::to_string(total) + " of " + std::to_string(cols) +
                             " columns");
}

/// sum_c sum_{i,j in c} ||z_i - z_j||^2 over ordered pairs, computed as
/// sum_c 2 n_c sum_i ||z_i - mean_c||^2.
inline double intra_class_pair_sum(const Matrix& z, const ClassIndex& classes) {
  double total = 0.0;
  for (const auto& members : classes) {
    if (members.size() < 2) continue;
    Vector mean = Vector::Zero(z.rows());
    for (auto j : members) mean += z.col(j);
    mean /= static_cast<double>(members.size());
    double spread = 0.0;
    for (auto j : members) spread += (z.col(j) - mean).squaredNorm();
    total += 2.0 * static_cast<double>(members.size()) * spread;
  }
  return total;
}

/// F = ||Z_prev - D Z||_F^2 + alpha * sum_c sum_{i,j} ||z_i^c - z_j^c||^2
inline double layer_objective(const Matrix& z_prev, const Matrix& dict, const Matrix& z, double alpha,
                              const ClassIndex& classes) {
  require(dict.rows() == z_prev.rows() && dict.cols() == z.rows() && z.cols() == z_prev.cols(),
          "shape mismatch: Z_prev " + shape_str(z_prev) + ", D " + shape_str(dict) + ", Z " + shape_str(z));
  const double reconstruction = (z_prev - dict * z).squaredNorm();
  return alpha == 0.0 ? reconstruction : reconstruction + alpha * intra_class_pair_sum(z, classes);
}

/// Dictionary step. Only the reconstruction term depends on D, so this is
/// the plain least-squares dictionary.
inline Matrix update_dictionary(const Matrix& z_prev, const Matrix& z, const RidgePolicy& policy = {}) {
  return solve_least_squares_dictionary(z_prev, z, policy);
}

/// One Gauss-Seidel sweep over all columns, class by class, in index order.
/// Every column is replaced by its exact minimizer given the current values
/// of the other columns of its class. The system matrix depends only on n_c,
/// so it is factorized once per distinct class size.
inline void update_representations(const Matrix& dict, const Matrix& z_prev, Matrix& z, double alpha,
                                   const ClassIndex& classes, const RidgePolicy& policy = {}) {
  require(dict.rows() == z_prev.rows() && dict.cols() == z.rows() && z.cols() == z_prev.cols(),
          "shape mismatch: Z_prev " + shape_str(z_prev) + ", D " + shape_str(dict) + ", Z " + shape_str(z));
  require(alpha >= 0.0, "alpha must be >= 0");
  const Matrix gram = dict.transpose() * dict;
  const Matrix target = dict.transpose() * z_prev;
  std::map<std::size_t, GramSolver> solvers;
  auto solver_for = [&](std::size_t n_c) -> const GramSolver& {
    auto it = solvers.find(n_c);
    if (it == solvers.end()) {
      Matrix system = gram;
      system.diagonal().array() += 2.0 * alpha * static_cast<double>(n_c - 1);
      it = solvers.emplace(n_c, GramSolver(system, policy)).first;
    }
    return it->second;
  };

  Vector sum(z.rows());
  Vector rhs(z.rows());
  for (const auto& members : classes) {
    if (members.empty()) continue;
    const GramSolver& solver = solver_for(members.size());
    sum.setZero();
    for (auto j : members) sum += z.col(j);
    for (auto j : members) {
      rhs = target.col(j);
      if (alpha != 0.0) rhs += 2.0 * alpha * (sum - z.col(j));
      solver.solve_in_place(rhs);
      sum += rhs - z.col(j);
      z.col(j) = rhs;
    }
  }
}

/// Trains one layer: codes start as least-squares codes against `init_dict`,
/// then `iters` rounds of (dictionary update, representation sweep). The
/// trace holds the objective after each round.
inline LayerResult train_layer(const Matrix& z_prev, double alpha, int iters, const ClassIndex& classes,
                               const Matrix& init_dict, const RidgePolicy& policy = {},
                               std::optional<double> early_stop_rel_change = std::nullopt) {
  require(init_dict.rows() == z_prev.rows(), "initial dictionary has " + std::to_string(init_dict.rows()) +
                                                 " rows, input has " + std::to_string(z_prev.rows()));
  require(iters >= 1, "iterations per layer must be >= 1");
  validate_class_index(classes, z_prev.cols());
  LayerResult layer;
  layer.dictionary = init_dict;
  layer.codes = ridge_code(init_dict, z_prev, policy);
  layer.initial_objective = layer_objective(z_prev, layer.dictionary, layer.codes, alpha, classes);
  double previous = layer.initial_objective;
  for (int it = 0; it < iters; ++it) {
    layer.dictionary = update_dictionary(z_prev, layer.codes, policy);
    update_representations(layer.dictionary, z_prev, layer.codes, alpha, classes, policy);
    const double value = layer_objective(z_prev, layer.dictionary, layer.codes, alpha, classes);
    layer.trace.push_back(value);
    if (early_stop_rel_change && std::abs(previous - value) <= *early_stop_rel_change * std::abs(previous)) break;
    previous = value;
  }
  return layer;
}

/// Greedy layer-wise training over the whole stack. The first dictionary is
/// an orthonormal basis of the training matrix (unless random init is
/// requested); deeper dictionaries start as normalized Gaussian atoms.
inline DdlicModel train_ddlic(const LabeledMatrix& train, const DdlicConfig& cfg) {
  validate(cfg, train.dim());
  require(train.size() >= 1, "training set is empty");
  DdlicModel model;
  model.alphas = cfg.alphas;
  model.iters = cfg.iters;
  model.seed = cfg.seed;
  model.init = cfg.init;
  model.train_labels = train.labels();
  model.class_index = train.class_index();
  Matrix input = train.features();
  for (std::size_t l = 0; l < cfg.layer_sizes.size(); ++l) {
    const Matrix init = initial_dictionary(l, input, cfg.layer_sizes[l], cfg.init, cfg.seed);
    LayerResult layer =
        train_layer(input, cfg.alphas[l], cfg.iters, model.class_index, init, cfg.ridge, cfg.early_stop_rel_change);
    input = layer.codes;
    model.stack.push(std::move(layer));
  }
  return model;
}

} // namespace deepdict
