// deepdict: command-line front end for training, evaluation and experiments.
//
//   deepdict synth      --out data.csv [--classes 3 --per-class 40 --dim 20 --separation 6 --seed 0]
//   deepdict train      --data train.csv --method ddlic --layer-sizes 16,12,8 --alphas 1e-3 --out model/
//   deepdict eval       --model model/ --data test.csv [--out eval/]
//   deepdict experiment [--config run.cfg] [overrides...] --out results/
//   deepdict grid       [--config run.cfg] [overrides...] --out grid/
//   deepdict export     --model model/ --data train.csv --out embeddings/

#include <deepdict/deepdict.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace deepdict;

// Settings shared by train/experiment/grid; each maps 1:1 to a config key.
const std::vector<std::pair<std::string, std::string>> kSettings{
    {"data", "dataset file (empty: synthetic clusters)"},
    {"labels", "label file for --format matrix"},
    {"format", "csv | matrix"},
    {"normalize", "scale sample columns to unit norm (true/false)"},
    {"synth-classes", "synthetic class count"},
    {"synth-per-class", "synthetic samples per class"},
    {"synth-dim", "synthetic feature dimension"},
    {"synth-separation", "synthetic distance between class means"},
    {"synth-seed", "synthetic data seed"},
    {"method", "ddl | ddlic"},
    {"depth", "number of layers"},
    {"layer-sizes", "atoms per layer, e.g. 400,200,100"},
    {"alphas", "intra-class weights per layer (one value is broadcast)"},
    {"lambda", "L1 weight of the DDL final layer"},
    {"iters", "alternating iterations per layer"},
    {"seed", "base seed"},
    {"init", "qr-first-random-rest | random"},
    {"h", "training samples per class"},
    {"replicates", "number of random splits"},
    {"knn-min", "smallest KNN k"},
    {"knn-max", "largest KNN k"},
    {"knn-step", "KNN k step"},
    {"k-select", "best | loo"},
    {"grid", "alpha grid values"},
    {"grid-mode", "shared | per-layer"},
    {"ista-iters", "ISTA iteration cap"},
    {"ista-tol", "ISTA relative tolerance"},
    {"workers", "parallel replicates"},
    {"timings", "include timings in summary.txt (true/false)"},
};

struct SettingFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, const std::vector<std::string>& keys) {
    cmd->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    for (const auto& [key, help] : kSettings)
      if (keys.empty() || std::find(keys.begin(), keys.end(), key) != keys.end())
        cmd->add_option("--" + key, values[key], help);
  }

  ExperimentConfig resolve(CLI::App* cmd) const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg.apply(kv::read(config_path));
    std::map<std::string, std::string> given;
    for (const auto& [key, value] : values)
      if (cmd->count("--" + key) > 0) given[key] = value;
    cfg.apply(given);
    cfg.validate();
    return cfg;
  }
};

void print_report(const EvalReport& report) {
  std::printf("method %s", to_string(report.method));
  if (!report.alphas.empty()) std::printf(" alphas %s", kv::join_doubles(report.alphas).c_str());
  std::printf("\naccuracy %.4f +- %.4f over %zu replicates (%d failed)\n", report.mean, report.stddev,
              report.replicates.size(), report.failures);
  for (std::size_t l = 0; l < report.mean_layer_accuracy.size(); ++l)
    std::printf("layer %zu: accuracy %.4f scatter ratio %.4f\n", l + 1, report.mean_layer_accuracy[l],
                report.mean_scatter[l + 1]);
}

LabeledMatrix load_cli_data(const std::string& path, const std::string& labels, const std::string& format) {
  DataSource source;
  source.path = path;
  source.labels_path = labels;
  source.format = ExperimentConfig::parse_format(format);
  return load_data(source);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep dictionary learning with an intra-class constraint"};
  app.require_subcommand(1);
  // --h is the per-class training count, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic Gaussian cluster dataset (dense CSV)");
  SyntheticSpec synth_spec;
  std::string synth_out;
  synth->add_option("--classes", synth_spec.classes)->check(CLI::PositiveNumber);
  synth->add_option("--per-class", synth_spec.per_class)->check(CLI::PositiveNumber);
  synth->add_option("--dim", synth_spec.dim)->check(CLI::PositiveNumber);
  synth->add_option("--separation", synth_spec.separation)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("--out", synth_out, "output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "fit a model on a whole dataset and save it");
  SettingFlags train_flags;
  train_flags.attach(train, {"data", "labels", "format", "normalize", "synth-classes", "synth-per-class", "synth-dim",
                             "synth-separation", "synth-seed", "method", "depth", "layer-sizes", "alphas", "lambda",
                             "iters", "seed", "init", "ista-iters", "ista-tol"});
  std::string train_out;
  train->add_option("--out", train_out, "model directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "classify a labelled dataset with a saved model");
  std::string eval_model, eval_data, eval_labels, eval_format = "csv", eval_out;
  KnnConfig eval_knn;
  std::string eval_select = "best";
  eval->add_option("--model", eval_model, "model directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--data", eval_data, "test data")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_labels, "label file for --format matrix");
  eval->add_option("--format", eval_format, "csv | matrix");
  eval->add_option("--knn-min", eval_knn.k_min)->check(CLI::PositiveNumber);
  eval->add_option("--knn-max", eval_knn.k_max)->check(CLI::PositiveNumber);
  eval->add_option("--knn-step", eval_knn.k_step)->check(CLI::PositiveNumber);
  eval->add_option("--k-select", eval_select, "best | loo");
  eval->add_option("--out", eval_out, "directory for eval.csv");

  // experiment / grid
  auto* experiment = app.add_subcommand("experiment", "repeated random splits: train, code, classify");
  SettingFlags experiment_flags;
  experiment_flags.attach(experiment, {});
  std::string experiment_out = "results";
  experiment->add_option("--out", experiment_out, "report directory");

  auto* grid = app.add_subcommand("grid", "alpha grid search over the experiment protocol");
  SettingFlags grid_flags;
  grid_flags.attach(grid, {});
  std::string grid_out = "grid";
  grid->add_option("--out", grid_out, "report directory");

  // export
  auto* exporter = app.add_subcommand("export", "write per-layer training embeddings as CSV");
  std::string export_model, export_data, export_labels, export_format = "csv", export_out;
  exporter->add_option("--model", export_model, "model directory")->required()->check(CLI::ExistingDirectory);
  exporter->add_option("--data", export_data, "the training data the model was fitted on")
      ->required()
      ->check(CLI::ExistingFile);
  exporter->add_option("--labels", export_labels, "label file for --format matrix");
  exporter->add_option("--format", export_format, "csv | matrix");
  exporter->add_option("--out", export_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*synth) {
      const auto data = make_synthetic_clusters(synth_spec.classes, synth_spec.per_class, synth_spec.dim,
                                                synth_spec.separation, synth_spec.seed);
      save_dense_csv(synth_out, data);
      std::printf("wrote %ld samples (%ld classes, dim %ld) to %s\n", static_cast<long>(data.size()),
                  static_cast<long>(data.num_classes()), static_cast<long>(data.dim()), synth_out.c_str());
    } else if (*train) {
      const auto cfg = train_flags.resolve(train);
      const auto data = load_data(cfg.data);
      const AnyModel model = train_model(cfg, data, cfg.seed);
      save_model(train_out, model);
      const auto& stack = stack_of(model);
      for (std::size_t l = 0; l < stack.traces.size(); ++l)
        std::printf("layer %zu: objective %.6g -> %.6g\n", l + 1, stack.initial_objectives[l], stack.traces[l].back());
      std::printf("saved %s model to %s\n", to_string(cfg.method), train_out.c_str());
    } else if (*eval) {
      const auto model = load_model(eval_model);
      const auto test = load_cli_data(eval_data, eval_labels, eval_format);
      eval_knn.selection = ExperimentConfig::parse_selection(eval_select);
      const auto codes = code_test_all_layers(model, test.features());
      const auto curve =
          evaluate_accuracy(stack_of(model).layer_codes.back(), train_labels_of(model), codes.back(), test.labels(), eval_knn);
      const auto layers = per_layer_accuracy(model, codes, test.labels(), eval_knn);
      std::printf("accuracy %.4f at k=%d\n", curve.chosen_accuracy, curve.chosen_k);
      for (std::size_t l = 0; l < layers.size(); ++l) std::printf("layer %zu: accuracy %.4f\n", l + 1, layers[l]);
      if (!eval_out.empty()) {
        auto out = io::open_output(std::filesystem::path(eval_out) / "eval.csv");
        out << "k,accuracy\n";
        for (std::size_t i = 0; i < curve.ks.size(); ++i)
          out << curve.ks[i] << ',' << io::format_double(curve.accuracy[i]) << '\n';
      }
    } else if (*experiment) {
      const auto cfg = experiment_flags.resolve(experiment);
      const auto report = run_experiment(cfg);
      write_report(experiment_out, cfg, report);
      print_report(report);
      if (report.failures == static_cast<int>(report.replicates.size()))
        throw std::runtime_error("every replicate failed: " + report.replicates.front().error);
    } else if (*grid) {
      const auto cfg = grid_flags.resolve(grid);
      const auto result = grid_search_alpha(cfg);
      write_grid_report(grid_out, cfg, result);
      for (const auto& row : result.rows)
        std::printf("alphas %-24s mean %.4f std %.4f\n", kv::join_doubles(row.alphas).c_str(), row.mean, row.stddev);
      std::printf("best alphas %s\n", kv::join_doubles(result.best_alphas()).c_str());
    } else if (*exporter) {
      const auto model = load_model(export_model);
      const auto data = load_cli_data(export_data, export_labels, export_format);
      const auto files = export_embeddings(stack_of(model), data.features(), data.labels(), export_out);
      std::printf("wrote %zu files to %s\n", files.size(), export_out.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
