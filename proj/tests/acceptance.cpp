// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-deepdict-cli>

#include "oracles.hpp"
#include "test_util.hpp"

#include <deepdict/deepdict.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>

using namespace deepdict;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    out.pass = false;
    out.detail += "; exceeded " + std::to_string(static_cast<int>(limit_seconds)) + " s";
  }
  if (!out.pass) ++failures;
  std::printf("%s %2d %-28s %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ClassIndex random_classes(Index n, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> count(1, std::min<Index>(n, 5));
  const Index c = count(rng);
  std::vector<Index> sizes(static_cast<std::size_t>(c), 1);
  std::uniform_int_distribution<Index> pick(0, c - 1);
  for (Index i = c; i < n; ++i) ++sizes[static_cast<std::size_t>(pick(rng))];
  return oracle::contiguous_classes(sizes);
}

// Synthetic setup shared by the directional criteria.
ExperimentConfig synthetic_setup() {
  ExperimentConfig cfg;
  cfg.data.synthetic = {3, 40, 20, 6.0, 0};
  cfg.layer_sizes = {16, 12, 8};
  cfg.h = 20;
  cfg.replicates = 10;
  cfg.iters = 20;
  return cfg;
}

Outcome stationarity() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<Index> dim(1, 20), cols(1, 60);
  std::uniform_real_distribution<double> alpha(0.0, 1.0);
  double worst_dict = 0.0, worst_col = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index k_prev = dim(rng), k = dim(rng), n = cols(rng);
    const Matrix z_prev = oracle::random_matrix(k_prev, n, rng);
    const Matrix z = oracle::random_matrix(k, n, rng);
    const ClassIndex classes = random_classes(n, rng);
    const double a = alpha(rng);

    const Matrix d = solve_least_squares_dictionary(z_prev, z);
    const Matrix g = oracle::dictionary_gradient(z_prev, d, z);
    const double scale = 2.0 * (z_prev * z.transpose()).norm() + 2.0 * (d * z * z.transpose()).norm();
    worst_dict = std::max(worst_dict, g.norm() / scale);

    // Rebuild the state seen right after each column update of the sweep.
    // A column's gradient only involves its own class, so other classes can
    // stay at their old values.
    Matrix after = z;
    update_representations(d, z_prev, after, a, classes);
    for (const auto& members : classes) {
      Matrix state = z;
      for (auto kcol : members) {
        state.col(kcol) = after.col(kcol);
        const Vector gk = oracle::column_gradient(z_prev, d, state, a, members, kcol);
        Vector others = Vector::Zero(k);
        for (auto i : members)
          if (i != kcol) others += state.col(i);
        const double n_c = static_cast<double>(members.size());
        const double s = 2.0 * (d.transpose() * z_prev.col(kcol)).norm() +
                         2.0 * (d.transpose() * d * state.col(kcol)).norm() +
                         4.0 * a * ((n_c - 1.0) * state.col(kcol).norm() + others.norm());
        worst_col = std::max(worst_col, s > 0 ? gk.norm() / s : gk.norm());
      }
    }
  }
  return {worst_dict <= 1e-6 && worst_col <= 1e-6,
          "max rel grad: dictionary " + sci(worst_dict) + ", column " + sci(worst_col)};
}

Outcome finite_differences() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<Index> dim(1, 10), cols(2, 20);
  std::uniform_real_distribution<double> alpha(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index k_prev = dim(rng), k = dim(rng), n = cols(rng);
    const Matrix z_prev = oracle::random_matrix(k_prev, n, rng);
    const Matrix d = oracle::random_matrix(k_prev, k, rng);
    const Matrix z = oracle::random_matrix(k, n, rng);
    const ClassIndex classes = random_classes(n, rng);
    const double a = alpha(rng);
    for (const auto& members : classes)
      for (auto kcol : members) {
        const Vector analytic = oracle::column_gradient(z_prev, d, z, a, members, kcol);
        auto f = [&](const Matrix& m) { return layer_objective(z_prev, d, m, a, classes); };
        const Vector numeric = oracle::finite_difference_column(f, z, kcol, 1e-5);
        worst = std::max(worst, (analytic - numeric).norm() / std::max(1.0, analytic.norm()));
      }
  }
  return {worst <= 1e-4, "max rel error " + sci(worst)};
}

Outcome monotonicity() {
  // 50 training runs on the synthetic setup, alphas cycled over the default grid.
  const auto base = synthetic_setup();
  const auto data = make_synthetic_clusters(3, 40, 20, 6.0, 0);
  int runs = 0, layers = 0;
  double worst = 0.0;
  for (int r = 1; r <= 50; ++r) {
    const Split split = split_per_class(data, {20, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(r)});
    auto cfg = base.ddlic_config(static_cast<std::uint64_t>(r));
    cfg.alphas = std::vector<double>(3, base.alpha_grid[static_cast<std::size_t>(r) % base.alpha_grid.size()]);
    const auto model = train_ddlic(split.train, cfg);
    ++runs;
    for (std::size_t l = 0; l < 3; ++l, ++layers) {
      double previous = model.stack.initial_objectives[l];
      if (model.stack.traces[l].size() != 20) return {false, "trace length " + std::to_string(model.stack.traces[l].size())};
      for (double v : model.stack.traces[l]) {
        worst = std::max(worst, (v - previous) / previous);
        previous = v;
      }
    }
  }
  return {worst <= 1e-8, std::to_string(runs) + " runs, " + std::to_string(layers) +
                             " layer traces, max rel increase " + sci(std::max(worst, 0.0))};
}

Outcome alpha_zero_reduction() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<Index> dim(2, 20), cols(20, 60);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index k_prev = dim(rng);
    std::uniform_int_distribution<Index> atoms(1, k_prev);
    const Index k = atoms(rng), n = cols(rng);
    const Matrix z_prev = oracle::random_matrix(k_prev, n, rng);
    const Matrix init = qr_orthonormal_init(z_prev, k, static_cast<std::uint64_t>(trial));
    const auto ours = train_layer(z_prev, 0.0, 20, random_classes(n, rng), init);
    const auto dense = train_dense_layer(z_prev, init, 20);
    worst = std::max({worst, (ours.dictionary - dense.dictionary).cwiseAbs().maxCoeff(),
                      (ours.codes - dense.codes).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-8, "max abs difference " + sci(worst)};
}

Outcome oracle_equivalence() {
  // The joint objective has no minimizer (D -> sD, Z -> Z/s shrinks the pair
  // term), so the comparison is made with D fixed at the alternating result,
  // where the objective is strictly convex in Z.
  std::mt19937_64 rng(505);
  const auto classes = oracle::contiguous_classes({4, 4, 4});
  const Matrix z0 = oracle::random_matrix(8, 12, rng);
  const double alpha = 0.1;
  const Matrix init = qr_orthonormal_init(z0, 5, 0);
  const auto layer = train_layer(z0, alpha, 20, classes, init);

  Matrix z = layer.codes;
  for (int sweep = 0; sweep < 5000; ++sweep) update_representations(layer.dictionary, z0, z, alpha, classes);
  const double ours = layer_objective(z0, layer.dictionary, z, alpha, classes);

  const Matrix& d = layer.dictionary;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(d.transpose() * d);
  const double lipschitz = 2.0 * eig.eigenvalues().maxCoeff() + 4.0 * alpha * 4.0;
  const Matrix gd = oracle::gradient_descent_codes(z0, d, layer.codes, alpha, classes, 1.0 / lipschitz, 100000);
  const double reference = oracle::objective(z0, d, gd, alpha, classes);
  const double rel = std::abs(ours - reference) / reference;
  const double code_rel = (z - gd).norm() / gd.norm();

  // The alternating sequence must stay above the infimum (rank-5 truncation
  // error of Z_0) and approach it.
  const Eigen::JacobiSVD<Matrix> svd(z0);
  const double infimum = svd.singularValues().tail(3).squaredNorm();
  const double longer = train_layer(z0, alpha, 2000, classes, init).trace.back();
  const bool approaches = layer.trace.back() >= infimum && longer >= infimum &&
                          longer - infimum < layer.trace.back() - infimum;
  return {rel <= 1e-4 && approaches, "fixed-D rel diff " + sci(rel) + " (codes " + sci(code_rel) + "); F@20 " + sci(layer.trace.back()) +
                                         ", F@2000 " + sci(longer) + ", infimum " + sci(infimum)};
}

Outcome ista_correctness() {
  double exact = 0.0;
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(5, 3, rng);
    const double lambda = 0.5;
    const Matrix z = ista_sparse_code(Matrix::Identity(5, 5), x, lambda);
    const Matrix expected = x.unaryExpr([&](double v) {
      return std::copysign(std::max(std::abs(v) - lambda / 2.0, 0.0), v);
    });
    exact = std::max(exact, (z - expected).cwiseAbs().maxCoeff());
  }
  double ls = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix d = oracle::random_matrix(30, 4, rng);
    const Matrix x = oracle::random_matrix(30, 5, rng);
    ls = std::max(ls, (ista_sparse_code(d, x, 0.0) - oracle::pinv(d) * x).cwiseAbs().maxCoeff());
  }
  IstaConfig record;
  record.record_objective = true;
  std::uniform_int_distribution<Index> size(1, 12);
  std::uniform_real_distribution<double> lam(0.0, 2.0);
  int monotone = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix d = oracle::random_matrix(size(rng), size(rng), rng);
    const Matrix x = oracle::random_matrix(d.rows(), size(rng), rng);
    const auto result = ista_solve(d, x, lam(rng), record);
    bool ok = true;
    for (std::size_t i = 1; i < result.objective.size(); ++i)
      ok = ok && result.objective[i] <= result.objective[i - 1] + 1e-12;
    monotone += ok;
  }
  return {exact <= 1e-10 && ls <= 1e-5 && monotone == 50,
          "soft-threshold err " + sci(exact) + ", lambda=0 err " + sci(ls) + ", monotone " +
              std::to_string(monotone) + "/50"};
}

Outcome knn_oracle() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<Index> classes(2, 6), dim(1, 12);
  std::uniform_real_distribution<double> sep(0.0, 4.0);
  long long compared = 0, mismatched = 0;
  for (int set = 0; set < 10; ++set) {
    const Index c = classes(rng);
    std::uniform_int_distribution<Index> per(5, 300 / c);
    const auto data = make_synthetic_clusters(c, per(rng), dim(rng), sep(rng), static_cast<std::uint64_t>(set));
    const Index h = std::max<Index>(1, data.size() / c / 2);
    const auto split = split_per_class(data, {h, static_cast<std::uint64_t>(set), 0});
    for (int k : {1, 2, 3, 5, 8, 13}) {
      if (k > split.train.size()) continue;
      const auto ours = knn_predict(split.train.features(), split.train.labels(), split.test.features(), k);
      const auto brute = oracle::knn(split.train.features(), split.train.labels(), split.test.features(), k);
      for (std::size_t i = 0; i < ours.size(); ++i) mismatched += ours[i] != brute[i];
      compared += static_cast<long long>(ours.size());
    }
  }
  return {mismatched == 0, std::to_string(compared) + " predictions, " + std::to_string(mismatched) + " mismatches"};
}

struct Directional {
  EvalReport ddl;
  GridResult ddlic;
};

const Directional& directional_runs() {
  static const Directional result = [] {
    Directional d;
    auto cfg = synthetic_setup();
    const LabeledMatrix data = load_data(cfg.data);
    cfg.method = Method::ddl;
    d.ddl = run_experiment(cfg, data);
    cfg.method = Method::ddlic;
    d.ddlic = grid_search_alpha(cfg, data);
    return d;
  }();
  return result;
}

Outcome ddlic_beats_ddl() {
  const auto& runs = directional_runs();
  const auto& best = runs.ddlic.best_report;
  const bool ok = best.failures == 0 && runs.ddl.failures == 0 && best.mean >= runs.ddl.mean;
  return {ok, "DDLIC " + sci(best.mean) + " (alpha " + sci(runs.ddlic.best_alphas().front()) + ") vs DDL " +
                  sci(runs.ddl.mean)};
}

Outcome scatter_contracts() {
  const auto& s = directional_runs().ddlic.best_report.mean_scatter;
  if (s.size() != 4) return {false, "missing scatter ratios"};
  return {s[2] <= s[1] && s[3] <= s[2], "mean scatter Z_1..Z_3: " + sci(s[1]) + ", " + sci(s[2]) + ", " + sci(s[3])};
}

Outcome deeper_layers_no_worse() {
  const auto& a = directional_runs().ddlic.best_report.mean_layer_accuracy;
  if (a.size() != 3) return {false, "missing layer accuracies"};
  return {a[2] >= a[0], "mean accuracy layer 1/2/3: " + sci(a[0]) + ", " + sci(a[1]) + ", " + sci(a[2])};
}

Outcome cli_determinism(const std::string& cli) {
  TempDir dir("acceptance_cli");
  std::string cmd_base = "\"" + cli + "\" experiment --method ddlic --layer-sizes 16,12,8 --alphas 0.01 --h 20 "
                         "--replicates 3 --knn-max 10 --seed 7 --out ";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = cmd_base + "\"" + (dir / run).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "experiment command failed: " + cmd};
  }
  int compared = 0;
  for (const char* name : {"replicates.csv", "curves.csv"}) {
    const auto a = read_text(dir / "a" / name);
    if (a.empty() || a != read_text(dir / "b" / name)) return {false, std::string(name) + " differs or is empty"};
    ++compared;
  }
  return {true, std::to_string(compared) + " CSV reports byte-identical"};
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-deepdict-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  run(1, "stationarity", 10, stationarity);
  run(2, "finite-difference gradient", 10, finite_differences);
  run(3, "monotone objective traces", 60, monotonicity);
  run(4, "alpha=0 reduction", 0, alpha_zero_reduction);
  run(5, "oracle equivalence", 30, oracle_equivalence);
  run(6, "ISTA correctness", 0, ista_correctness);
  run(7, "KNN oracle", 0, knn_oracle);
  run(8, "DDLIC >= DDL (synthetic)", 300, ddlic_beats_ddl);
  run(9, "scatter non-increasing", 0, scatter_contracts);
  run(10, "layer 3 >= layer 1 accuracy", 0, deeper_layers_no_worse);
  run(11, "CLI determinism", 0, [&] { return cli_determinism(cli); });
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
