#pragma once

// Test-stage coding and the KNN classifier applied to the final codes.

#include <deepdict/baseline.hpp>
#include <deepdict/ddlic.hpp>
#include <deepdict/linalg.hpp>
#include <deepdict/model.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

namespace deepdict {

/// Layer-wise greedy coding: Z_t0 = Y and Z_tl = argmin ||Z_t(l-1) - D_l Z_tl||_F^2
/// for l = 1..upto. Returns every intermediate Z_t1..Z_t,upto.
inline std::vector<Matrix> code_layerwise(const DictionaryStack& stack, const Matrix& y, Index upto,
                                          const RidgePolicy& policy = {}) {
  require(y.rows() == stack.input_dim(), "test data has " + std::to_string(y.rows()) + " rows, model expects " +
                                             std::to_string(stack.input_dim()));
  require(upto >= 1 && upto <= stack.depth(), "layer " + std::to_string(upto) + " out of range");
  std::vector<Matrix> codes;
  const Matrix* input = &y;
  for (Index l = 0; l < upto; ++l) {
    codes.push_back(ridge_code(stack.dictionaries[static_cast<std::size_t>(l)], *input, policy));
    input = &codes.back();
  }
  return codes;
}

inline Matrix code_test_ddlic(const DdlicModel& model, const Matrix& y, const RidgePolicy& policy = {}) {
  return code_layerwise(model.stack, y, model.stack.depth(), policy).back();
}

enum class KSelection {
  /// Best accuracy over the k range on the evaluation split.
  best_over_range,
  /// k chosen by leave-one-out accuracy on the training codes, then applied to the test split.
  leave_one_out,
};

struct KnnConfig {
  int k_min = 1;
  int k_max = 30;
  int k_step = 1;
  KSelection selection = KSelection::best_over_range;

  std::vector<int> ks() const {
    require(k_min >= 1 && k_max >= k_min && k_step >= 1, "invalid KNN k range");
    std::vector<int> values;
    for (int k = k_min; k <= k_max; k += k_step) values.push_back(k);
    return values;
  }
};

namespace detail {

struct Neighbor {
  double distance;
  Index index;
};

// Nearest `count` training columns to `query`, ordered by (distance, index).
// `skip` excludes one training column (leave-one-out).
inline std::vector<Neighbor> nearest(const Matrix& train, const Eigen::Ref<const Vector>& query, Index count,
                                     Index skip = -1) {
  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(train.cols()));
  for (Index j = 0; j < train.cols(); ++j)
    if (j != skip) all.push_back({(train.col(j) - query).squaredNorm(), j});
  count = std::min<Index>(count, static_cast<Index>(all.size()));
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + count, all.end(), less);
  all.resize(static_cast<std::size_t>(count));
  for (auto& n : all) n.distance = std::sqrt(n.distance);
  return all;
}

// Majority vote over the first k neighbors. Ties go to the smallest sum of
// distances, then to the smallest label.
inline long long vote(const std::vector<Neighbor>& neighbors, const std::vector<long long>& labels, int k) {
  std::map<long long, std::pair<int, double>> tally;
  for (int i = 0; i < k; ++i) {
    auto& entry = tally[labels[static_cast<std::size_t>(neighbors[static_cast<std::size_t>(i)].index)]];
    entry.first += 1;
    entry.second += neighbors[static_cast<std::size_t>(i)].distance;
  }
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const auto& [count, dist] = it->second;
    if (count > best->second.first || (count == best->second.first && dist < best->second.second)) best = it;
  }
  return best->first;
}

inline void check_knn_inputs(const Matrix& train_repr, const std::vector<long long>& train_labels,
                             const Matrix& test_repr) {
  require(static_cast<Index>(train_labels.size()) == train_repr.cols(),
          "train label count does not match train codes");
  require(test_repr.rows() == train_repr.rows(), "test codes have " + std::to_string(test_repr.rows()) +
                                                     " rows, train codes " + std::to_string(train_repr.rows()));
}

} // namespace detail

/// Euclidean k-nearest-neighbor majority vote.
inline std::vector<long long> knn_predict(const Matrix& train_repr, const std::vector<long long>& train_labels,
                                          const Matrix& test_repr, int k) {
  detail::check_knn_inputs(train_repr, train_labels, test_repr);
  require(k >= 1, "k must be >= 1");
  require(k <= train_repr.cols(), "k=" + std::to_string(k) + " exceeds training set size " +
                                      std::to_string(train_repr.cols()));
  std::vector<long long> predicted;
  predicted.reserve(static_cast<std::size_t>(test_repr.cols()));
  for (Index j = 0; j < test_repr.cols(); ++j)
    predicted.push_back(detail::vote(detail::nearest(train_repr, test_repr.col(j), k), train_labels, k));
  return predicted;
}

struct AccuracyCurve {
  std::vector<int> ks;
  std::vector<double> accuracy;
  /// The k used for the reported accuracy, and that accuracy.
  int chosen_k = 0;
  double chosen_accuracy = 0.0;
  /// argmax over the curve (smallest k on ties).
  int best_k = 0;
  double best_accuracy = 0.0;
};

/// Leave-one-out accuracy of every k on the training codes; returns the
/// best k (smallest on ties).
inline int select_k_leave_one_out(const Matrix& train_repr, const std::vector<long long>& train_labels,
                                  std::vector<int> ks) {
  require(train_repr.cols() >= 2, "leave-one-out k selection needs >= 2 training samples");
  std::erase_if(ks, [&](int k) { return k > train_repr.cols() - 1; });
  require(!ks.empty(), "no k in range fits leave-one-out on " + std::to_string(train_repr.cols()) + " samples");
  const int max_k = ks.back();
  std::vector<int> correct(ks.size(), 0);
  for (Index j = 0; j < train_repr.cols(); ++j) {
    const auto neighbors = detail::nearest(train_repr, train_repr.col(j), max_k, j);
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (detail::vote(neighbors, train_labels, ks[i]) == train_labels[static_cast<std::size_t>(j)]) ++correct[i];
  }
  const auto best = std::max_element(correct.begin(), correct.end());
  return ks[static_cast<std::size_t>(best - correct.begin())];
}

/// Sweeps k over the configured range (values above the training set size
/// are dropped) and records test accuracy for each.
inline AccuracyCurve evaluate_accuracy(const Matrix& train_repr, const std::vector<long long>& train_labels,
                                       const Matrix& test_repr, const std::vector<long long>& test_labels,
                                       const KnnConfig& cfg = {}) {
  detail::check_knn_inputs(train_repr, train_labels, test_repr);
  require(static_cast<Index>(test_labels.size()) == test_repr.cols(), "test label count does not match test codes");
  if (test_repr.cols() == 0) throw DataError("empty test set");
  AccuracyCurve curve;
  for (int k : cfg.ks())
    if (k <= train_repr.cols()) curve.ks.push_back(k);
  require(!curve.ks.empty(), "every k in the range exceeds training set size " + std::to_string(train_repr.cols()));

  std::vector<int> correct(curve.ks.size(), 0);
  for (Index j = 0; j < test_repr.cols(); ++j) {
    const auto neighbors = detail::nearest(train_repr, test_repr.col(j), curve.ks.back());
    for (std::size_t i = 0; i < curve.ks.size(); ++i)
      if (detail::vote(neighbors, train_labels, curve.ks[i]) == test_labels[static_cast<std::size_t>(j)])
        ++correct[i];
  }
  const double m = static_cast<double>(test_repr.cols());
  for (int c : correct) curve.accuracy.push_back(c / m);

  const auto best = std::max_element(curve.accuracy.begin(), curve.accuracy.end());
  curve.best_k = curve.ks[static_cast<std::size_t>(best - curve.accuracy.begin())];
  curve.best_accuracy = *best;
  if (cfg.selection == KSelection::leave_one_out) {
    curve.chosen_k = select_k_leave_one_out(train_repr, train_labels, curve.ks);
    const auto pos = std::find(curve.ks.begin(), curve.ks.end(), curve.chosen_k) - curve.ks.begin();
    curve.chosen_accuracy = curve.accuracy[static_cast<std::size_t>(pos)];
  } else {
    curve.chosen_k = curve.best_k;
    curve.chosen_accuracy = curve.best_accuracy;
  }
  return curve;
}

} // namespace deepdict
