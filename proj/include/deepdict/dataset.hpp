#pragma once

#include <deepdict/matrix_io.hpp>
#include <deepdict/types.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace deepdict {

/// Feature matrix with one sample per column plus its class labels.
///
/// Labels are remapped to class ids 0..C-1 in ascending order of the
/// original label values; the original labels are kept for reporting.
/// Instances are immutable once constructed.
class LabeledMatrix {
public:
  LabeledMatrix() = default;

  LabeledMatrix(Matrix features, std::vector<long long> labels, std::vector<Index> origin = {})
      : features_(std::move(features)), labels_(std::move(labels)), origin_(std::move(origin)) {
    require(static_cast<Index>(labels_.size()) == features_.cols(),
            "label count " + std::to_string(labels_.size()) + " does not match sample count " +
                std::to_string(features_.cols()));
    require(features_.cols() == 0 || features_.rows() >= 1, "feature dimension must be >= 1");
    if (origin_.empty()) {
      origin_.resize(labels_.size());
      std::iota(origin_.begin(), origin_.end(), Index{0});
    }
    require(origin_.size() == labels_.size(), "origin index count does not match sample count");
    for (Index j = 0; j < features_.cols(); ++j)
      for (Index i = 0; i < features_.rows(); ++i)
        if (!std::isfinite(features_(i, j)))
          throw DataError("non-finite value at (" + std::to_string(i) + "," + std::to_string(j) +
                          ")");

    std::map<long long, int> ids;
    for (auto l : labels_) ids.emplace(l, 0);
    for (auto& [label, id] : ids) {
      id = static_cast<int>(class_labels_.size());
      class_labels_.push_back(label);
    }
    class_index_.resize(class_labels_.size());
    classes_.reserve(labels_.size());
    for (std::size_t j = 0; j < labels_.size(); ++j) {
      const int c = ids.at(labels_[j]);
      classes_.push_back(c);
      class_index_[static_cast<std::size_t>(c)].push_back(static_cast<Index>(j));
    }
  }

  const Matrix& features() const { return features_; }
  /// Original label of every column.
  const std::vector<long long>& labels() const { return labels_; }
  /// Class id (0..C-1) of every column.
  const std::vector<int>& classes() const { return classes_; }
  /// Original label of each class id.
  const std::vector<long long>& class_labels() const { return class_labels_; }
  const ClassIndex& class_index() const { return class_index_; }
  /// Column index of each sample in the dataset it was split from.
  const std::vector<Index>& origin() const { return origin_; }

  Index dim() const { return features_.rows(); }
  Index size() const { return features_.cols(); }
  Index num_classes() const { return static_cast<Index>(class_labels_.size()); }

private:
  Matrix features_;
  std::vector<long long> labels_;
  std::vector<Index> origin_;
  std::vector<int> classes_;
  std::vector<long long> class_labels_;
  ClassIndex class_index_;
};

enum class DataFormat { dense_csv, matrix_and_labels };

struct LoadOptions {
  /// Scale every sample column to unit L2 norm (zero columns are left alone).
  bool normalize_columns = false;
};

inline void normalize_columns(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0.0) m.col(j) /= n;
  }
}

namespace detail {

inline LabeledMatrix finish_load(Matrix features, std::vector<long long> labels,
                                 const LoadOptions& opts) {
  if (opts.normalize_columns) normalize_columns(features);
  LabeledMatrix data(std::move(features), std::move(labels));
  require(data.size() > 0, "dataset is empty");
  return data;
}

} // namespace detail

/// Reads the dense text format: one sample per row, comma-separated reals,
/// the final field an integer label. Rows become columns of the result.
inline LabeledMatrix load_dense_csv(const std::filesystem::path& path, const LoadOptions& opts = {}) {
  auto in = io::open_input(path);
  std::vector<std::vector<double>> rows;
  std::vector<long long> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = io::split_fields(body, ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() < 2) throw DataError(where + ": expected features followed by a label");
    if (rows.empty()) width = fields.size();
    if (fields.size() != width)
      throw DataError(where + ": row has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width));
    std::vector<double> row(fields.size() - 1);
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
      if (!io::parse_double(fields[k], row[k]))
        throw DataError(where + ": malformed value '" + std::string(fields[k]) + "'");
      if (!std::isfinite(row[k]))
        throw DataError("non-finite value at (" + std::to_string(rows.size()) + "," +
                        std::to_string(k) + ")");
    }
    long long label = 0;
    if (!io::parse_int(fields.back(), label))
      throw DataError(where + ": label '" + std::string(fields.back()) + "' is not an integer");
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  Matrix features(static_cast<Index>(width ? width - 1 : 0), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      features(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  return detail::finish_load(std::move(features), std::move(labels), opts);
}

/// Reads a whitespace-separated matrix (rows = features, columns = samples)
/// and a label file with one integer per line.
inline LabeledMatrix load_matrix_pair(const std::filesystem::path& matrix_path,
                                      const std::filesystem::path& label_path,
                                      const LoadOptions& opts = {}) {
  Matrix features = io::read_matrix(matrix_path);
  auto in = io::open_input(label_path);
  std::vector<long long> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty() || body.front() == '#') continue;
    long long label = 0;
    if (!io::parse_int(body, label))
      throw DataError(label_path.string() + ":" + std::to_string(line_no) + ": label '" +
                      std::string(body) + "' is not an integer");
    labels.push_back(label);
  }
  return detail::finish_load(std::move(features), std::move(labels), opts);
}

inline LabeledMatrix load_labeled_matrix(const std::filesystem::path& path, DataFormat format,
                                         const std::filesystem::path& label_path = {},
                                         const LoadOptions& opts = {}) {
  if (format == DataFormat::dense_csv) return load_dense_csv(path, opts);
  require(!label_path.empty(), "matrix format requires a label file");
  return load_matrix_pair(path, label_path, opts);
}

inline void save_dense_csv(const std::filesystem::path& path, const LabeledMatrix& data) {
  auto out = io::open_output(path);
  const Matrix& x = data.features();
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) out << io::format_double(x(i, j)) << ',';
    out << data.labels()[static_cast<std::size_t>(j)] << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline void save_matrix_pair(const std::filesystem::path& matrix_path,
                             const std::filesystem::path& label_path, const LabeledMatrix& data) {
  io::write_matrix(matrix_path, data.features());
  auto out = io::open_output(label_path);
  for (auto l : data.labels()) out << l << '\n';
  if (!out) throw DataError("write failed for '" + label_path.string() + "'");
}

/// Selects the columns `cols` (in that order) into a new LabeledMatrix whose
/// origin indices refer back to the source dataset.
inline LabeledMatrix select_columns(const LabeledMatrix& data, const std::vector<Index>& cols) {
  Matrix features(data.dim(), static_cast<Index>(cols.size()));
  std::vector<long long> labels;
  std::vector<Index> origin;
  labels.reserve(cols.size());
  origin.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    features.col(static_cast<Index>(k)) = data.features().col(cols[k]);
    labels.push_back(data.labels()[static_cast<std::size_t>(cols[k])]);
    origin.push_back(data.origin()[static_cast<std::size_t>(cols[k])]);
  }
  return LabeledMatrix(std::move(features), std::move(labels), std::move(origin));
}

struct SplitSpec {
  Index per_class_train_count = 1;
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;
};

struct Split {
  LabeledMatrix train;
  LabeledMatrix test;
};

/// Draws `h` training columns per class uniformly at random; the rest go to
/// the test set. Both outputs are grouped contiguously by class, with columns
/// inside a class kept in their original order.
inline Split split_per_class(const LabeledMatrix& data, const SplitSpec& spec) {
  const Index h = spec.per_class_train_count;
  require(h >= 1, "per-class training count must be >= 1");
  for (std::size_t c = 0; c < data.class_index().size(); ++c) {
    const auto n_c = static_cast<Index>(data.class_index()[c].size());
    if (h >= n_c)
      throw DataError("per-class training count " + std::to_string(h) + " leaves no test sample for class " +
                      std::to_string(data.class_labels()[c]) + " (n_c=" + std::to_string(n_c) + ")");
  }
  std::mt19937_64 rng(derive_seed(spec.seed, spec.replicate_index));
  std::vector<Index> train_cols;
  std::vector<Index> test_cols;
  for (const auto& members : data.class_index()) {
    std::vector<Index> shuffled = members;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<Index> chosen(shuffled.begin(), shuffled.begin() + h);
    std::vector<Index> rest(shuffled.begin() + h, shuffled.end());
    std::sort(chosen.begin(), chosen.end());
    std::sort(rest.begin(), rest.end());
    train_cols.insert(train_cols.end(), chosen.begin(), chosen.end());
    test_cols.insert(test_cols.end(), rest.begin(), rest.end());
  }
  return {select_columns(data, train_cols), select_columns(data, test_cols)};
}

/// C isotropic Gaussian clusters with unit within-class standard deviation.
/// When C <= dim the class means sit on scaled coordinate axes, so every pair
/// is exactly `separation` apart; otherwise random means are rescaled so the
/// closest pair is `separation` apart. Columns are grouped by class, labels 0..C-1.
inline LabeledMatrix make_synthetic_clusters(Index num_classes, Index n_per_class, Index dim,
                                             double separation, std::uint64_t seed) {
  require(num_classes >= 1 && n_per_class >= 1 && dim >= 1, "synthetic sizes must be positive");
  require(separation >= 0.0 && std::isfinite(separation), "separation must be finite and >= 0");
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix means = Matrix::Zero(dim, num_classes);
  if (num_classes <= dim) {
    for (Index c = 0; c < num_classes; ++c) means(c, c) = separation / std::sqrt(2.0);
  } else {
    for (Index c = 0; c < num_classes; ++c)
      for (Index i = 0; i < dim; ++i) means(i, c) = normal(rng);
    double closest = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < num_classes; ++a)
      for (Index b = a + 1; b < num_classes; ++b)
        closest = std::min(closest, (means.col(a) - means.col(b)).norm());
    means *= closest > 0.0 ? separation / closest : 0.0;
  }

  Matrix features(dim, num_classes * n_per_class);
  std::vector<long long> labels;
  labels.reserve(static_cast<std::size_t>(features.cols()));
  for (Index c = 0; c < num_classes; ++c) {
    for (Index k = 0; k < n_per_class; ++k) {
      const Index j = c * n_per_class + k;
      for (Index i = 0; i < dim; ++i) features(i, j) = means(i, c) + normal(rng);
      labels.push_back(c);
    }
  }
  return LabeledMatrix(std::move(features), std::move(labels));
}

} // namespace deepdict
