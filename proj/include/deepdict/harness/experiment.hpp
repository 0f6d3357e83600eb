#pragma once

// Repeated-split experiments, alpha grid search and their report files.

#include <deepdict/harness/config.hpp>
#include <deepdict/harness/diagnostics.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

namespace deepdict {

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  int k = 0;
  AccuracyCurve curve;
  /// Intra-class scatter ratio of the training Z_0 .. Z_L.
  std::vector<double> scatter;
  /// KNN accuracy of the test codes at layers 1..L.
  std::vector<double> layer_accuracy;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

struct EvalReport {
  Method method = Method::ddlic;
  std::vector<double> alphas;
  std::vector<ReplicateResult> replicates;
  int failures = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> mean_scatter;
  std::vector<double> mean_layer_accuracy;
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots; the first exception is rethrown.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline AnyModel train_model(const ExperimentConfig& cfg, const LabeledMatrix& train, std::uint64_t run_seed) {
  if (cfg.method == Method::ddl) return train_ddl(train, cfg.train_config(run_seed));
  return train_ddlic(train, cfg.ddlic_config(run_seed));
}

/// One split/train/code/evaluate cycle. Replicate r (1-based) uses seed base_seed + r.
inline ReplicateResult run_replicate(const ExperimentConfig& cfg, const LabeledMatrix& data, int replicate) {
  using clock = std::chrono::steady_clock;
  ReplicateResult result;
  result.replicate = replicate;
  result.seed = cfg.seed + static_cast<std::uint64_t>(replicate);
  try {
    const Split split = split_per_class(data, {cfg.h, result.seed, static_cast<std::uint64_t>(replicate)});
    const auto t0 = clock::now();
    const AnyModel model = train_model(cfg, split.train, result.seed);
    const auto t1 = clock::now();
    const auto& stack = stack_of(model);
    const auto test_codes = code_test_all_layers(model, split.test.features(), {}, cfg.ista_config());
    result.curve = evaluate_accuracy(stack.layer_codes.back(), split.train.labels(), test_codes.back(),
                                     split.test.labels(), cfg.knn);
    result.accuracy = result.curve.chosen_accuracy;
    result.k = result.curve.chosen_k;
    result.layer_accuracy = per_layer_accuracy(model, test_codes, split.test.labels(), cfg.knn);
    result.scatter.push_back(intra_class_scatter_ratio(split.train.features(), split.train.class_index()));
    for (const auto& z : stack.layer_codes) result.scatter.push_back(intra_class_scatter_ratio(z, split.train.class_index()));
    const auto t2 = clock::now();
    result.train_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.eval_seconds = std::chrono::duration<double>(t2 - t1).count();
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

inline void summarize(EvalReport& report) {
  std::vector<double> acc;
  std::vector<const ReplicateResult*> good;
  for (const auto& r : report.replicates)
    if (r.ok) {
      acc.push_back(r.accuracy);
      good.push_back(&r);
    }
  report.failures = static_cast<int>(report.replicates.size() - acc.size());
  if (acc.empty()) return;
  const double n = static_cast<double>(acc.size());
  report.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : acc) ss += (a - report.mean) * (a - report.mean);
  report.stddev = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  report.min = *std::min_element(acc.begin(), acc.end());
  report.max = *std::max_element(acc.begin(), acc.end());
  // The running sum can land an ulp outside [min, max] when all values are equal.
  report.mean = std::clamp(report.mean, report.min, report.max);

  report.mean_scatter.assign(good.front()->scatter.size(), 0.0);
  report.mean_layer_accuracy.assign(good.front()->layer_accuracy.size(), 0.0);
  for (const auto* r : good) {
    for (std::size_t i = 0; i < r->scatter.size(); ++i) report.mean_scatter[i] += r->scatter[i] / n;
    for (std::size_t i = 0; i < r->layer_accuracy.size(); ++i) report.mean_layer_accuracy[i] += r->layer_accuracy[i] / n;
  }
}

inline EvalReport run_experiment(const ExperimentConfig& cfg, const LabeledMatrix& data) {
  cfg.validate();
  EvalReport report;
  report.method = cfg.method;
  if (cfg.method == Method::ddlic) report.alphas = cfg.layer_alphas();
  report.replicates.resize(static_cast<std::size_t>(cfg.replicates));
  parallel_for(report.replicates.size(), cfg.workers, [&](std::size_t i) {
    report.replicates[i] = run_replicate(cfg, data, static_cast<int>(i) + 1);
  });
  summarize(report);
  return report;
}

inline EvalReport run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_data(cfg.data)); }

struct GridRow {
  std::vector<double> alphas;
  double mean = 0.0;
  double stddev = 0.0;
  int failures = 0;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;
  EvalReport best_report;

  const std::vector<double>& best_alphas() const { return rows[best].alphas; }
};

/// Alpha combinations to evaluate: one shared value per grid entry, or the
/// full per-layer Cartesian product.
inline std::vector<std::vector<double>> alpha_combinations(const std::vector<double>& grid, std::size_t depth,
                                                           GridMode mode) {
  require(!grid.empty(), "alpha grid is empty");
  std::vector<std::vector<double>> combos;
  if (mode == GridMode::shared) {
    for (double a : grid) combos.emplace_back(depth, a);
    return combos;
  }
  std::vector<std::size_t> digits(depth, 0);
  while (true) {
    std::vector<double> combo;
    for (auto d : digits) combo.push_back(grid[d]);
    combos.push_back(std::move(combo));
    std::size_t pos = depth;
    while (pos > 0 && ++digits[pos - 1] == grid.size()) digits[--pos] = 0;
    if (pos == 0) break;
  }
  return combos;
}

/// Evaluates every alpha combination with the full replicate protocol and
/// keeps the one with the highest mean accuracy (first on ties).
inline GridResult grid_search_alpha(const ExperimentConfig& cfg, const LabeledMatrix& data) {
  require(cfg.method == Method::ddlic, "alpha grid search requires method ddlic");
  cfg.validate();
  GridResult result;
  for (const auto& combo : alpha_combinations(cfg.alpha_grid, cfg.depth(), cfg.grid_mode)) {
    ExperimentConfig cell = cfg;
    cell.alphas = combo;
    EvalReport report = run_experiment(cell, data);
    const bool better = result.rows.empty() || report.mean > result.rows[result.best].mean;
    result.rows.push_back({combo, report.mean, report.stddev, report.failures});
    if (better) {
      result.best = result.rows.size() - 1;
      result.best_report = std::move(report);
    }
  }
  return result;
}

inline GridResult grid_search_alpha(const ExperimentConfig& cfg) { return grid_search_alpha(cfg, load_data(cfg.data)); }

// ---------------------------------------------------------------------------
// Report files

inline void write_replicates_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = io::open_output(path);
  std::size_t depth = 0;
  for (const auto& r : report.replicates)
    if (r.ok) depth = r.layer_accuracy.size();
  out << "replicate,seed,status,accuracy,k";
  for (std::size_t l = 0; l <= depth; ++l) out << ",scatter_" << l;
  for (std::size_t l = 1; l <= depth; ++l) out << ",layer_accuracy_" << l;
  out << '\n';
  for (const auto& r : report.replicates) {
    out << r.replicate << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
    if (r.ok) {
      out << ',' << io::format_double(r.accuracy) << ',' << r.k;
      for (double s : r.scatter) out << ',' << io::format_double(s);
      for (double a : r.layer_accuracy) out << ',' << io::format_double(a);
    } else {
      out << ",,";
      for (std::size_t i = 0; i < 2 * depth + 1; ++i) out << ',';
    }
    out << '\n';
  }
}

inline void write_curves_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = io::open_output(path);
  out << "replicate,k,accuracy\n";
  for (const auto& r : report.replicates) {
    if (!r.ok) continue;
    for (std::size_t i = 0; i < r.curve.ks.size(); ++i)
      out << r.replicate << ',' << r.curve.ks[i] << ',' << io::format_double(r.curve.accuracy[i]) << '\n';
  }
}

inline void write_summary(const std::filesystem::path& path, const EvalReport& report, bool timings) {
  auto out = io::open_output(path);
  out << "method: " << to_string(report.method) << '\n';
  if (!report.alphas.empty()) out << "alphas: " << kv::join_doubles(report.alphas) << '\n';
  const auto ok = report.replicates.size() - static_cast<std::size_t>(report.failures);
  out << "replicates: " << ok << " ok, " << report.failures << " failed\n";
  out << "accuracy mean: " << io::format_double(report.mean) << '\n';
  out << "accuracy std: " << io::format_double(report.stddev) << '\n';
  out << "accuracy min/max: " << io::format_double(report.min) << " / " << io::format_double(report.max) << '\n';
  if (!report.mean_scatter.empty()) out << "mean scatter ratio Z_0..Z_L: " << kv::join_doubles(report.mean_scatter) << '\n';
  if (!report.mean_layer_accuracy.empty())
    out << "mean accuracy per layer: " << kv::join_doubles(report.mean_layer_accuracy) << '\n';
  for (const auto& r : report.replicates) {
    if (!r.ok) out << "replicate " << r.replicate << " failed: " << r.error << '\n';
    if (timings && r.ok)
      out << "replicate " << r.replicate << " train " << r.train_seconds << " s, eval " << r.eval_seconds << " s\n";
  }
}

/// Writes config.txt, replicates.csv, curves.csv and summary.txt to `dir`.
inline void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg, const EvalReport& report) {
  std::filesystem::create_directories(dir);
  kv::write(dir / "config.txt", cfg.entries());
  write_replicates_csv(dir / "replicates.csv", report);
  write_curves_csv(dir / "curves.csv", report);
  write_summary(dir / "summary.txt", report, cfg.timings);
}

/// Writes grid.csv and the replicate report of the best combination.
inline void write_grid_report(const std::filesystem::path& dir, const ExperimentConfig& cfg, const GridResult& grid) {
  std::filesystem::create_directories(dir);
  ExperimentConfig best = cfg;
  best.alphas = grid.best_alphas();
  write_report(dir, best, grid.best_report);
  auto out = io::open_output(dir / "grid.csv");
  out << "row";
  for (std::size_t l = 1; l <= cfg.depth(); ++l) out << ",alpha_" << l;
  out << ",mean,std,failures,best\n";
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& row = grid.rows[i];
    out << i;
    for (double a : row.alphas) out << ',' << io::format_double(a);
    out << ',' << io::format_double(row.mean) << ',' << io::format_double(row.stddev) << ',' << row.failures << ','
        << (i == grid.best ? 1 : 0) << '\n';
  }
}

} // namespace deepdict
