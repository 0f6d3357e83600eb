#pragma once

#include <deepdict/classify.hpp>
#include <deepdict/dataset.hpp>
#include <deepdict/matrix_io.hpp>
#include <deepdict/model_io.hpp>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <vector>

namespace deepdict {

namespace detail {

inline double scatter_about_mean(const Matrix& z, const std::vector<Index>& members) {
  Vector mean = Vector::Zero(z.rows());
  for (auto j : members) mean += z.col(j);
  mean /= static_cast<double>(members.size());
  double s = 0.0;
  for (auto j : members) s += (z.col(j) - mean).squaredNorm();
  return s;
}

} // namespace detail

/// Within-class scatter over total scatter,
///   sum_c sum_i ||z_i^c - mu_c||^2 / sum_j ||z_j - mu||^2.
/// Zero when every column is identical.
inline double intra_class_scatter_ratio(const Matrix& repr, const ClassIndex& classes) {
  require(repr.cols() >= 2, "scatter ratio needs >= 2 columns");
  require(!classes.empty(), "scatter ratio needs >= 1 class");
  validate_class_index(classes, repr.cols());
  std::vector<Index> all(static_cast<std::size_t>(repr.cols()));
  if (classes.size() == 1) {
    all = classes.front();
  } else {
    std::iota(all.begin(), all.end(), Index{0});
  }
  const double total = detail::scatter_about_mean(repr, all);
  if (!(total > 0.0)) return 0.0;
  double within = 0.0;
  for (const auto& members : classes)
    if (!members.empty()) within += detail::scatter_about_mean(repr, members);
  return std::clamp(within / total, 0.0, 1.0);
}

/// Test codes for every layer 1..L: layer-wise least squares for DDLIC;
/// product-dictionary coding for DDL (ISTA at the final layer).
inline std::vector<Matrix> code_test_all_layers(const AnyModel& model, const Matrix& y,
                                                const RidgePolicy& policy = {}, const IstaConfig& ista = {}) {
  if (const auto* ddlic = std::get_if<DdlicModel>(&model))
    return code_layerwise(ddlic->stack, y, ddlic->stack.depth(), policy);
  const auto& ddl = std::get<DdlModel>(model);
  std::vector<Matrix> codes;
  for (Index l = 1; l <= ddl.stack.depth(); ++l) codes.push_back(code_test_ddl(ddl, y, l, policy, ista));
  return codes;
}

/// KNN accuracy (as selected by `knn`) of each layer's codes.
inline std::vector<double> per_layer_accuracy(const AnyModel& model, const std::vector<Matrix>& test_codes,
                                              const std::vector<long long>& test_labels, const KnnConfig& knn) {
  const auto& stack = stack_of(model);
  require(static_cast<Index>(test_codes.size()) == stack.depth(), "need test codes for every layer");
  std::vector<double> accuracy;
  for (std::size_t l = 0; l < test_codes.size(); ++l)
    accuracy.push_back(
        evaluate_accuracy(stack.layer_codes[l], train_labels_of(model), test_codes[l], test_labels, knn)
            .chosen_accuracy);
  return accuracy;
}

inline std::vector<double> per_layer_accuracy(const AnyModel& model, const LabeledMatrix& test, const KnnConfig& knn,
                                              const RidgePolicy& policy = {}, const IstaConfig& ista = {}) {
  return per_layer_accuracy(model, code_test_all_layers(model, test.features(), policy, ista), test.labels(), knn);
}

/// Writes layer_0.csv (the input Z_0), layer_1.csv .. layer_L.csv and
/// labels.csv, one sample per row. Returns the written paths.
inline std::vector<std::filesystem::path> export_embeddings(const DictionaryStack& stack, const Matrix& input,
                                                            const std::vector<long long>& labels,
                                                            const std::filesystem::path& out_dir) {
  stack.validate();
  require(input.rows() == stack.input_dim(), "input has " + std::to_string(input.rows()) + " rows, model expects " +
                                                 std::to_string(stack.input_dim()));
  require(input.cols() == stack.layer_codes.front().cols(), "input has " + std::to_string(input.cols()) +
                                                                " samples, model codes have " +
                                                                std::to_string(stack.layer_codes.front().cols()));
  require(static_cast<Index>(labels.size()) == input.cols(), "label count does not match samples");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const Matrix& m, Index layer) {
    auto path = out_dir / ("layer_" + std::to_string(layer) + ".csv");
    io::write_matrix(path, m.transpose(), ',');
    written.push_back(std::move(path));
  };
  emit(input, 0);
  for (std::size_t l = 0; l < stack.layer_codes.size(); ++l) emit(stack.layer_codes[l], static_cast<Index>(l + 1));
  auto path = out_dir / "labels.csv";
  auto out = io::open_output(path);
  for (auto l : labels) out << l << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
  written.push_back(std::move(path));
  return written;
}

/// Reads back one exported layer file as a column-per-sample matrix.
inline Matrix read_embedding(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = io::trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    for (auto f : io::split_fields(body, ',')) {
      double v = 0.0;
      if (!io::parse_double(f, v)) throw DataError(path.string() + ": malformed value '" + std::string(f) + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  Matrix m(rows.empty() ? 0 : static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  return m;
}

} // namespace deepdict
