#include "oracles.hpp"

#include <deepdict/classify.hpp>

#include <gtest/gtest.h>

using namespace deepdict;

namespace {

DictionaryStack stack_of(std::vector<Matrix> dicts) {
  DictionaryStack stack;
  for (auto& d : dicts) {
    const Index k = d.cols();
    stack.push({std::move(d), Matrix::Zero(k, 1), 0.0, {0.0}});
  }
  return stack;
}

std::vector<long long> random_labels(Index n, int classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<long long> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = pick(rng);
  return labels;
}

} // namespace

TEST(CodeLayerwise, OrthonormalDictionariesProject) {
  std::mt19937_64 rng(1);
  const Matrix q1 = oracle::random_matrix(8, 8, rng).householderQr().householderQ();
  const Matrix q2 = oracle::random_matrix(5, 5, rng).householderQr().householderQ();
  const auto stack = stack_of({q1.leftCols(5), q2.leftCols(3)});
  const Matrix y = oracle::random_matrix(8, 6, rng);
  const auto codes = code_layerwise(stack, y, 2);
  ASSERT_EQ(codes.size(), 2u);
  EXPECT_LE((codes[0] - q1.leftCols(5).transpose() * y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((codes[1] - q2.leftCols(3).transpose() * codes[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CodeLayerwise, RecoversPlantedCodesAndResidualIsOrthogonal) {
  std::mt19937_64 rng(2);
  const auto stack = stack_of({oracle::random_matrix(10, 6, rng), oracle::random_matrix(6, 4, rng)});
  const Matrix w = oracle::random_matrix(4, 5, rng);
  const Matrix y = stack.dictionaries[0] * stack.dictionaries[1] * w;
  EXPECT_LE((code_layerwise(stack, y, 2).back() - w).cwiseAbs().maxCoeff(), 1e-8);

  const Matrix noisy = oracle::random_matrix(10, 5, rng);
  const auto codes = code_layerwise(stack, noisy, 2);
  const Matrix r1 = noisy - stack.dictionaries[0] * codes[0];
  const Matrix r2 = codes[0] - stack.dictionaries[1] * codes[1];
  EXPECT_LE((stack.dictionaries[0].transpose() * r1).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((stack.dictionaries[1].transpose() * r2).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CodeLayerwise, TrainingColumnsReproduceTrainCodesWithoutCompactness) {
  const auto data = make_synthetic_clusters(3, 10, 12, 4.0, 3);
  DdlicConfig cfg;
  cfg.layer_sizes = {10, 6, 4};
  cfg.alphas = {0.0, 0.0, 0.0};
  const auto model = train_ddlic(data, cfg);
  const Matrix coded = code_test_ddlic(model, data.features());
  EXPECT_LE((coded - model.train_repr()).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + model.train_repr().norm()));
}

TEST(CodeLayerwise, RejectsBadInput) {
  const auto stack = stack_of({Matrix::Identity(4, 3)});
  EXPECT_THROW((void)code_layerwise(stack, Matrix::Ones(5, 2), 1), DataError);
  EXPECT_THROW((void)code_layerwise(stack, Matrix::Ones(4, 2), 2), DataError);
  EXPECT_THROW((void)code_layerwise(stack, Matrix::Ones(4, 2), 0), DataError);
  EXPECT_EQ(code_layerwise(stack, Matrix(4, 0), 1).back().cols(), 0);
}

TEST(Knn, IdenticalPointWinsAtKOne) {
  std::mt19937_64 rng(4);
  const Matrix train = oracle::random_matrix(3, 10, rng);
  const auto labels = random_labels(10, 4, rng);
  const auto predicted = knn_predict(train, labels, train, 1);
  EXPECT_EQ(predicted, labels);
}

TEST(Knn, TiesBreakByDistanceSumThenLabel) {
  Matrix train(1, 4);
  train << -1, 1, 3, -3;
  // k=2 from 0: one vote each for 7 and 3 at equal distance -> smaller label.
  EXPECT_EQ(knn_predict(train, {7, 3, 9, 9}, Matrix::Zero(1, 1), 2)[0], 3);
  // k=4 from 0.5: two votes for 9 (sum 5) against one each, 9 wins on votes.
  EXPECT_EQ(knn_predict(train, {7, 3, 9, 9}, Matrix::Constant(1, 1, 0.5), 4)[0], 9);
  // k=4 from 0.5, labels {2,2,1,1}: two votes each; sums 1.5+0.5 vs 2.5+3.5.
  EXPECT_EQ(knn_predict(train, {2, 2, 1, 1}, Matrix::Constant(1, 1, 0.5), 4)[0], 2);
}

TEST(Knn, MatchesBruteForceOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(5, 120);
  std::uniform_int_distribution<int> kk(1, 15);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = size(rng);
    const Index dim = size(rng) % 10 + 1;
    const Matrix train = oracle::random_matrix(dim, n, rng);
    const Matrix test = oracle::random_matrix(dim, 30, rng);
    const auto labels = random_labels(n, 5, rng);
    const int k = std::min<int>(kk(rng), static_cast<int>(n));
    EXPECT_EQ(knn_predict(train, labels, test, k), oracle::knn(train, labels, test, k)) << "trial " << trial;
  }
}

TEST(Knn, InvariantToTrainingOrderAndRotation) {
  std::mt19937_64 rng(6);
  const Matrix train = oracle::random_matrix(4, 40, rng);
  const Matrix test = oracle::random_matrix(4, 25, rng);
  const auto labels = random_labels(40, 3, rng);
  const auto expected = knn_predict(train, labels, test, 5);

  std::vector<Index> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix shuffled(4, 40);
  std::vector<long long> shuffled_labels(40);
  for (Index j = 0; j < 40; ++j) {
    shuffled.col(j) = train.col(order[static_cast<std::size_t>(j)]);
    shuffled_labels[static_cast<std::size_t>(j)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
  }
  EXPECT_EQ(knn_predict(shuffled, shuffled_labels, test, 5), expected);

  const Matrix q = oracle::random_matrix(4, 4, rng).householderQr().householderQ();
  EXPECT_EQ(knn_predict(q * train, labels, q * test, 5), expected);
}

TEST(Knn, RejectsBadInput) {
  const Matrix train = Matrix::Identity(2, 3);
  EXPECT_THROW((void)knn_predict(train, {0, 1, 2}, train, 0), DataError);
  EXPECT_THROW((void)knn_predict(train, {0, 1, 2}, train, 4), DataError);
  EXPECT_THROW((void)knn_predict(train, {0, 1}, train, 1), DataError);
  EXPECT_THROW((void)knn_predict(train, {0, 1, 2}, Matrix::Ones(3, 1), 1), DataError);
}

TEST(EvaluateAccuracy, SeparatedClustersArePerfect) {
  const auto data = make_synthetic_clusters(3, 20, 5, 30.0, 7);
  const auto split = split_per_class(data, {10, 7, 0});
  const auto curve = evaluate_accuracy(split.train.features(), split.train.labels(), split.test.features(),
                                       split.test.labels());
  EXPECT_EQ(curve.ks.size(), 30u);
  EXPECT_DOUBLE_EQ(curve.best_accuracy, 1.0);
  EXPECT_EQ(curve.best_k, 1);
}

TEST(EvaluateAccuracy, BestIsArgmaxOfCurve) {
  const auto data = make_synthetic_clusters(4, 25, 6, 1.5, 8);
  const auto split = split_per_class(data, {10, 8, 0});
  KnnConfig cfg;
  cfg.k_max = 50;  // clipped to the 40 training samples
  const auto curve = evaluate_accuracy(split.train.features(), split.train.labels(), split.test.features(),
                                       split.test.labels(), cfg);
  ASSERT_EQ(curve.ks.size(), 40u);
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    const auto predicted = knn_predict(split.train.features(), split.train.labels(), split.test.features(), curve.ks[i]);
    int correct = 0;
    for (std::size_t j = 0; j < predicted.size(); ++j) correct += predicted[j] == split.test.labels()[j];
    EXPECT_DOUBLE_EQ(curve.accuracy[i], correct / static_cast<double>(predicted.size()));
    EXPECT_LE(curve.accuracy[i], curve.best_accuracy);
  }
  EXPECT_EQ(curve.chosen_k, curve.best_k);
}

TEST(EvaluateAccuracy, LeaveOneOutSelectsOnTrainingCodes) {
  const auto data = make_synthetic_clusters(3, 30, 4, 2.0, 9);
  const auto split = split_per_class(data, {15, 9, 0});
  KnnConfig cfg;
  cfg.k_max = 10;
  cfg.selection = KSelection::leave_one_out;
  const auto curve = evaluate_accuracy(split.train.features(), split.train.labels(), split.test.features(),
                                       split.test.labels(), cfg);

  // Oracle: literal leave-one-out with the brute-force classifier.
  const Matrix& train = split.train.features();
  int best_k = 0, best_correct = -1;
  for (int k = 1; k <= 10; ++k) {
    int correct = 0;
    for (Index j = 0; j < train.cols(); ++j) {
      Matrix rest(train.rows(), train.cols() - 1);
      std::vector<long long> rest_labels;
      for (Index i = 0, c = 0; i < train.cols(); ++i)
        if (i != j) {
          rest.col(c++) = train.col(i);
          rest_labels.push_back(split.train.labels()[static_cast<std::size_t>(i)]);
        }
      correct += oracle::knn(rest, rest_labels, train.col(j), k)[0] == split.train.labels()[static_cast<std::size_t>(j)];
    }
    if (correct > best_correct) best_correct = correct, best_k = k;
  }
  EXPECT_EQ(curve.chosen_k, best_k);
  const auto pos = static_cast<std::size_t>(best_k - 1);
  EXPECT_DOUBLE_EQ(curve.chosen_accuracy, curve.accuracy[pos]);
}

TEST(EvaluateAccuracy, RejectsEmptyTestSet) {
  const Matrix train = Matrix::Identity(2, 3);
  try {
    (void)evaluate_accuracy(train, {0, 1, 2}, Matrix(2, 0), {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty test set");
  }
}
