#pragma once

// Experiment configuration. Every field has a `key = value` spelling shared
// by config files and CLI flags (`--key value`); later sources override
// earlier ones, so flags applied after the file win.

#include <deepdict/classify.hpp>
#include <deepdict/dataset.hpp>
#include <deepdict/keyvalue.hpp>
#include <deepdict/model_io.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deepdict {

enum class Method { ddl, ddlic };
enum class GridMode { shared, per_layer };

inline const char* to_string(Method m) { return m == Method::ddl ? "ddl" : "ddlic"; }
inline const char* to_string(GridMode m) { return m == GridMode::shared ? "shared" : "per-layer"; }
inline const char* to_string(KSelection s) { return s == KSelection::best_over_range ? "best" : "loo"; }
inline const char* to_string(DataFormat f) { return f == DataFormat::dense_csv ? "csv" : "matrix"; }

struct SyntheticSpec {
  Index classes = 3;
  Index per_class = 40;
  Index dim = 20;
  double separation = 6.0;
  std::uint64_t seed = 0;
};

struct DataSource {
  /// Empty path selects the synthetic generator.
  std::string path;
  std::string labels_path;
  DataFormat format = DataFormat::dense_csv;
  bool normalize = false;
  SyntheticSpec synthetic;
};

struct ExperimentConfig {
  DataSource data;
  Method method = Method::ddlic;
  std::vector<Index> layer_sizes{400, 200, 100};
  std::vector<double> alphas{1e-3};
  double lambda = 0.1;
  int iters = 20;
  std::uint64_t seed = 0;
  InitMode init = InitMode::qr_first_random_rest;
  Index h = 10;
  int replicates = 10;
  KnnConfig knn;
  std::vector<double> alpha_grid{1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2};
  GridMode grid_mode = GridMode::shared;
  int ista_iters = 500;
  double ista_tol = 1e-6;
  int workers = 1;
  bool timings = false;
  std::string out;

  std::size_t depth() const { return layer_sizes.size(); }

  /// Per-layer alphas; a single value is broadcast to every layer.
  std::vector<double> layer_alphas() const {
    if (alphas.size() == 1) return std::vector<double>(depth(), alphas.front());
    return alphas;
  }

  TrainConfig train_config(std::uint64_t run_seed) const {
    TrainConfig cfg;
    cfg.layer_sizes = layer_sizes;
    cfg.lambda = lambda;
    cfg.iters = iters;
    cfg.seed = run_seed;
    cfg.init = init;
    cfg.ista = ista_config();
    return cfg;
  }

  DdlicConfig ddlic_config(std::uint64_t run_seed) const {
    DdlicConfig cfg;
    cfg.layer_sizes = layer_sizes;
    cfg.alphas = layer_alphas();
    cfg.iters = iters;
    cfg.seed = run_seed;
    cfg.init = init;
    return cfg;
  }

  IstaConfig ista_config() const {
    IstaConfig cfg;
    cfg.max_iters = ista_iters;
    cfg.rel_tol = ista_tol;
    return cfg;
  }

  void validate() const {
    require(!layer_sizes.empty(), "layer-sizes must not be empty");
    for (auto k : layer_sizes) require(k >= 1, "layer sizes must be >= 1");
    require(alphas.size() == 1 || alphas.size() == depth(),
            "alphas: need 1 or " + std::to_string(depth()) + " values, got " + std::to_string(alphas.size()));
    for (auto a : alphas) require(a >= 0.0, "alphas must be >= 0");
    require(lambda >= 0.0, "lambda must be >= 0");
    require(iters >= 1, "iters must be >= 1");
    require(h >= 1, "h must be >= 1");
    require(replicates >= 1, "replicates must be >= 1");
    require(workers >= 1, "workers must be >= 1");
    require(ista_iters >= 1 && ista_tol > 0.0, "invalid ISTA settings");
    (void)knn.ks();
  }

  /// Applies `key = value` settings. Unknown keys are an error.
  void apply(const std::map<std::string, std::string>& values) {
    std::optional<Index> depth_check;
    for (const auto& [key, value] : values) {
      if (key == "data") data.path = value;
      else if (key == "labels") data.labels_path = value;
      else if (key == "format") data.format = parse_format(value);
      else if (key == "normalize") data.normalize = kv::parse_bool(key, value);
      else if (key == "synth-classes") data.synthetic.classes = positive(key, value);
      else if (key == "synth-per-class") data.synthetic.per_class = positive(key, value);
      else if (key == "synth-dim") data.synthetic.dim = positive(key, value);
      else if (key == "synth-separation") data.synthetic.separation = kv::parse_double(key, value);
      else if (key == "synth-seed") data.synthetic.seed = seed_value(key, value);
      else if (key == "method") method = parse_method(value);
      else if (key == "depth") depth_check = positive(key, value);
      else if (key == "layer-sizes") layer_sizes = kv::parse_ints(key, value);
      else if (key == "alphas") alphas = kv::parse_doubles(key, value);
      else if (key == "lambda") lambda = kv::parse_double(key, value);
      else if (key == "iters") iters = static_cast<int>(positive(key, value));
      else if (key == "seed") seed = seed_value(key, value);
      else if (key == "init") init = parse_init_mode(value);
      else if (key == "h") h = positive(key, value);
      else if (key == "replicates") replicates = static_cast<int>(positive(key, value));
      else if (key == "knn-min") knn.k_min = static_cast<int>(positive(key, value));
      else if (key == "knn-max") knn.k_max = static_cast<int>(positive(key, value));
      else if (key == "knn-step") knn.k_step = static_cast<int>(positive(key, value));
      else if (key == "k-select") knn.selection = parse_selection(value);
      else if (key == "grid") alpha_grid = kv::parse_doubles(key, value);
      else if (key == "grid-mode") grid_mode = parse_grid_mode(value);
      else if (key == "ista-iters") ista_iters = static_cast<int>(positive(key, value));
      else if (key == "ista-tol") ista_tol = kv::parse_double(key, value);
      else if (key == "workers") workers = static_cast<int>(positive(key, value));
      else if (key == "timings") timings = kv::parse_bool(key, value);
      else if (key == "out") out = value;
      else throw DataError("unknown setting '" + key + "'");
    }
    if (depth_check && static_cast<std::size_t>(*depth_check) != layer_sizes.size()) {
      // A bare depth truncates the default 400/200/100 stack; anything else must agree.
      require(!values.count("layer-sizes") && static_cast<std::size_t>(*depth_check) <= layer_sizes.size(),
              "depth " + std::to_string(*depth_check) + " does not match " + std::to_string(layer_sizes.size()) +
                  " layer sizes");
      layer_sizes.resize(static_cast<std::size_t>(*depth_check));
      if (alphas.size() > layer_sizes.size()) alphas.resize(layer_sizes.size());
    }
  }

  /// Fully resolved settings, in a stable order.
  kv::Entries entries() const {
    kv::Entries e;
    if (!data.path.empty()) {
      e.emplace_back("data", data.path);
      if (!data.labels_path.empty()) e.emplace_back("labels", data.labels_path);
      e.emplace_back("format", to_string(data.format));
    } else {
      e.emplace_back("synth-classes", std::to_string(data.synthetic.classes));
      e.emplace_back("synth-per-class", std::to_string(data.synthetic.per_class));
      e.emplace_back("synth-dim", std::to_string(data.synthetic.dim));
      e.emplace_back("synth-separation", io::format_double(data.synthetic.separation));
      e.emplace_back("synth-seed", std::to_string(data.synthetic.seed));
    }
    e.emplace_back("normalize", data.normalize ? "true" : "false");
    e.emplace_back("method", to_string(method));
    e.emplace_back("layer-sizes", kv::join_ints(layer_sizes));
    e.emplace_back("alphas", kv::join_doubles(layer_alphas()));
    e.emplace_back("lambda", io::format_double(lambda));
    e.emplace_back("iters", std::to_string(iters));
    e.emplace_back("seed", std::to_string(seed));
    e.emplace_back("init", to_string(init));
    e.emplace_back("h", std::to_string(h));
    e.emplace_back("replicates", std::to_string(replicates));
    e.emplace_back("knn-min", std::to_string(knn.k_min));
    e.emplace_back("knn-max", std::to_string(knn.k_max));
    e.emplace_back("knn-step", std::to_string(knn.k_step));
    e.emplace_back("k-select", to_string(knn.selection));
    e.emplace_back("grid", kv::join_doubles(alpha_grid));
    e.emplace_back("grid-mode", to_string(grid_mode));
    e.emplace_back("ista-iters", std::to_string(ista_iters));
    e.emplace_back("ista-tol", io::format_double(ista_tol));
    return e;
  }

  static Method parse_method(const std::string& v) {
    if (v == "ddl") return Method::ddl;
    if (v == "ddlic") return Method::ddlic;
    throw DataError("method must be ddl or ddlic, got '" + v + "'");
  }

  static GridMode parse_grid_mode(const std::string& v) {
    if (v == "shared") return GridMode::shared;
    if (v == "per-layer") return GridMode::per_layer;
    throw DataError("grid-mode must be shared or per-layer, got '" + v + "'");
  }

  static KSelection parse_selection(const std::string& v) {
    if (v == "best") return KSelection::best_over_range;
    if (v == "loo") return KSelection::leave_one_out;
    throw DataError("k-select must be best or loo, got '" + v + "'");
  }

  static DataFormat parse_format(const std::string& v) {
    if (v == "csv") return DataFormat::dense_csv;
    if (v == "matrix") return DataFormat::matrix_and_labels;
    throw DataError("format must be csv or matrix, got '" + v + "'");
  }

private:
  static Index positive(const std::string& key, const std::string& value) {
    const auto v = kv::parse_int(key, value);
    require(v >= 1, key + " must be >= 1");
    return static_cast<Index>(v);
  }

  static std::uint64_t seed_value(const std::string& key, const std::string& value) {
    const auto v = kv::parse_int(key, value);
    require(v >= 0, key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  }
};

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  cfg.apply(kv::read(path));
  return cfg;
}

inline LabeledMatrix load_data(const DataSource& source) {
  if (source.path.empty()) {
    const auto& s = source.synthetic;
    LabeledMatrix data = make_synthetic_clusters(s.classes, s.per_class, s.dim, s.separation, s.seed);
    if (!source.normalize) return data;
    Matrix features = data.features();
    normalize_columns(features);
    return LabeledMatrix(std::move(features), data.labels());
  }
  LoadOptions opts;
  opts.normalize_columns = source.normalize;
  return load_labeled_matrix(source.path, source.format, source.labels_path, opts);
}

} // namespace deepdict
