#pragma once

// Unsupervised deep dictionary learning with identity activation: dense
// least-squares layers up to the penultimate one, an L1-sparse final layer,
// and test coding against the product dictionary D_1 ... D_L.

#include <deepdict/dataset.hpp>
#include <deepdict/linalg.hpp>
#include <deepdict/model.hpp>

#include <vector>

namespace deepdict {

struct TrainConfig {
  std::vector<Index> layer_sizes{400, 200, 100};
  double lambda = 0.1;
  int iters = 20;
  std::uint64_t seed = 0;
  InitMode init = InitMode::qr_first_random_rest;
  RidgePolicy ridge;
  IstaConfig ista;
};

struct DdlModel {
  DictionaryStack stack;
  double lambda = 0.1;
  int iters = 20;
  std::uint64_t seed = 0;
  InitMode init = InitMode::qr_first_random_rest;
  /// Original labels of the training columns, aligned with the codes.
  std::vector<long long> train_labels;

  const Matrix& train_repr() const { return stack.layer_codes.back(); }
};

inline void validate(const TrainConfig& cfg, Index input_dim) {
  require(!cfg.layer_sizes.empty(), "depth must be >= 1");
  for (auto k : cfg.layer_sizes) require(k >= 1, "layer sizes must be >= 1");
  require(cfg.iters >= 1, "iterations per layer must be >= 1");
  require(cfg.lambda >= 0.0, "lambda must be >= 0");
  require(input_dim >= 1, "input dimension must be >= 1");
  if (cfg.init == InitMode::qr_first_random_rest)
    require(cfg.layer_sizes.front() <= input_dim,
            "QR init needs k_1 <= k_0 (k_1=" + std::to_string(cfg.layer_sizes.front()) +
                ", k_0=" + std::to_string(input_dim) + ")");
}

/// Dense layer: alternates the least-squares dictionary and least-squares
/// codes for `iters` rounds, starting from codes fitted to `init_dict`.
inline LayerResult train_dense_layer(const Matrix& z_prev, const Matrix& init_dict, int iters,
                                     const RidgePolicy& policy = {}) {
  require(init_dict.rows() == z_prev.rows(), "initial dictionary has " + std::to_string(init_dict.rows()) +
                                                 " rows, input has " + std::to_string(z_prev.rows()));
  LayerResult layer;
  layer.dictionary = init_dict;
  layer.codes = ridge_code(init_dict, z_prev, policy);
  layer.initial_objective = (z_prev - layer.dictionary * layer.codes).squaredNorm();
  for (int it = 0; it < iters; ++it) {
    layer.dictionary = solve_least_squares_dictionary(z_prev, layer.codes, policy);
    layer.codes = ridge_code(layer.dictionary, z_prev, policy);
    layer.trace.push_back((z_prev - layer.dictionary * layer.codes).squaredNorm());
  }
  return layer;
}

/// Sparse layer: alternates the least-squares dictionary with warm-started
/// ISTA on ||Z_prev - D Z||_F^2 + lambda ||Z||_1.
inline LayerResult train_sparse_layer(const Matrix& z_prev, const Matrix& init_dict, double lambda, int iters,
                                      const RidgePolicy& policy = {}, const IstaConfig& ista = {}) {
  require(init_dict.rows() == z_prev.rows(), "initial dictionary has " + std::to_string(init_dict.rows()) +
                                                 " rows, input has " + std::to_string(z_prev.rows()));
  LayerResult layer;
  layer.dictionary = init_dict;
  const Matrix start = ridge_code(init_dict, z_prev, policy);
  layer.codes = ista_sparse_code(init_dict, z_prev, lambda, ista, &start);
  layer.initial_objective = sparse_coding_objective(layer.dictionary, z_prev, layer.codes, lambda);
  for (int it = 0; it < iters; ++it) {
    layer.dictionary = solve_least_squares_dictionary(z_prev, layer.codes, policy);
    layer.codes = ista_sparse_code(layer.dictionary, z_prev, lambda, ista, &layer.codes);
    layer.trace.push_back(sparse_coding_objective(layer.dictionary, z_prev, layer.codes, lambda));
  }
  return layer;
}

/// Greedy layer-wise training: layers 1..L-1 dense, layer L sparse.
inline DdlModel train_ddl(const LabeledMatrix& train, const TrainConfig& cfg) {
  validate(cfg, train.dim());
  require(train.size() >= 1, "training set is empty");
  DdlModel model;
  model.lambda = cfg.lambda;
  model.iters = cfg.iters;
  model.seed = cfg.seed;
  model.init = cfg.init;
  model.train_labels = train.labels();
  const std::size_t depth = cfg.layer_sizes.size();
  Matrix input = train.features();
  for (std::size_t l = 0; l < depth; ++l) {
    const Matrix init = initial_dictionary(l, input, cfg.layer_sizes[l], cfg.init, cfg.seed);
    LayerResult layer = l + 1 < depth ? train_dense_layer(input, init, cfg.iters, cfg.ridge)
                                      : train_sparse_layer(input, init, cfg.lambda, cfg.iters, cfg.ridge, cfg.ista);
    input = layer.codes;
    model.stack.push(std::move(layer));
  }
  return model;
}

/// Codes test columns Y against the product dictionary P = D_1 ... D_upto.
/// At the final layer the L1 problem is solved by ISTA warm-started from
/// the least-squares codes; shallower layers stop at least squares.
inline Matrix code_test_ddl(const DdlModel& model, const Matrix& y, Index upto, const RidgePolicy& policy = {},
                            const IstaConfig& ista = {}) {
  require(y.rows() == model.stack.input_dim(), "test data has " + std::to_string(y.rows()) +
                                                   " rows, model expects " +
                                                   std::to_string(model.stack.input_dim()));
  const Matrix product = model.stack.product(upto);
  const Matrix start = ridge_code(product, y, policy);
  if (upto < model.stack.depth() || y.cols() == 0) return start;
  return ista_sparse_code(product, y, model.lambda, ista, &start);
}

inline Matrix code_test_ddl(const DdlModel& model, const Matrix& y, const RidgePolicy& policy = {},
                            const IstaConfig& ista = {}) {
  return code_test_ddl(model, y, model.stack.depth(), policy, ista);
}

} // namespace deepdict
