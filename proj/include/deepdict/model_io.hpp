#pragma once

// Model directories: one plain matrix file per dictionary (D_<l>.txt) and
// per training code matrix (Z_<l>.txt), the training labels (labels.txt) and
// a key = value metadata file (model.txt).

#include <deepdict/baseline.hpp>
#include <deepdict/ddlic.hpp>
#include <deepdict/keyvalue.hpp>
#include <deepdict/matrix_io.hpp>

#include <filesystem>
#include <variant>

namespace deepdict {

inline constexpr const char* kModelFormat = "deepdict-model-1";

using AnyModel = std::variant<DdlModel, DdlicModel>;

inline const DictionaryStack& stack_of(const AnyModel& model) {
  return std::visit([](const auto& m) -> const DictionaryStack& { return m.stack; }, model);
}

inline const std::vector<long long>& train_labels_of(const AnyModel& model) {
  return std::visit([](const auto& m) -> const std::vector<long long>& { return m.train_labels; }, model);
}

inline InitMode parse_init_mode(const std::string& text) {
  if (text == "qr-first-random-rest" || text == "qr") return InitMode::qr_first_random_rest;
  if (text == "random") return InitMode::random_all;
  throw DataError("unknown init mode '" + text + "'");
}

namespace detail {

inline void save_stack(const std::filesystem::path& dir, const DictionaryStack& stack,
                       const std::vector<long long>& labels, kv::Entries& meta) {
  stack.validate();
  std::filesystem::create_directories(dir);
  meta.emplace_back("depth", std::to_string(stack.depth()));
  meta.emplace_back("input_dim", std::to_string(stack.input_dim()));
  meta.emplace_back("layer_sizes", kv::join_ints(stack.layer_sizes()));
  for (std::size_t l = 0; l < stack.dictionaries.size(); ++l) {
    const auto tag = std::to_string(l + 1);
    io::write_matrix(dir / ("D_" + tag + ".txt"), stack.dictionaries[l]);
    io::write_matrix(dir / ("Z_" + tag + ".txt"), stack.layer_codes[l]);
    meta.emplace_back("initial_objective_" + tag, io::format_double(stack.initial_objectives[l]));
    meta.emplace_back("trace_" + tag, kv::join_doubles(stack.traces[l]));
  }
  auto out = io::open_output(dir / "labels.txt");
  for (auto l : labels) out << l << '\n';
  kv::write(dir / "model.txt", meta);
}

inline Matrix read_shaped(const std::filesystem::path& path, Index rows, Index cols) {
  Matrix m = io::read_matrix(path);
  if (cols == 0) return Matrix(rows, 0);
  if (m.rows() != rows || m.cols() != cols)
    throw DataError(path.string() + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                    shape_str(m));
  return m;
}

inline DictionaryStack load_stack(const std::filesystem::path& dir, const std::map<std::string, std::string>& meta,
                                  std::vector<long long>& labels) {
  labels.clear();
  {
    auto in = io::open_input(dir / "labels.txt");
    std::string line;
    while (std::getline(in, line)) {
      const auto body = io::trim(line);
      if (!body.empty()) labels.push_back(kv::parse_int("labels.txt", body));
    }
  }
  const auto n = static_cast<Index>(labels.size());
  const auto sizes = kv::parse_ints("layer_sizes", kv::at(meta, "layer_sizes"));
  const auto depth = kv::parse_int("depth", kv::at(meta, "depth"));
  require(static_cast<long long>(sizes.size()) == depth, "layer_sizes does not match depth");
  Index rows = static_cast<Index>(kv::parse_int("input_dim", kv::at(meta, "input_dim")));
  DictionaryStack stack;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const auto tag = std::to_string(l + 1);
    LayerResult layer;
    layer.dictionary = read_shaped(dir / ("D_" + tag + ".txt"), rows, sizes[l]);
    layer.codes = read_shaped(dir / ("Z_" + tag + ".txt"), sizes[l], n);
    layer.initial_objective = kv::parse_double("initial_objective_" + tag, kv::at(meta, "initial_objective_" + tag));
    layer.trace = kv::parse_doubles("trace_" + tag, kv::at(meta, "trace_" + tag));
    stack.push(std::move(layer));
    rows = sizes[l];
  }
  stack.validate();
  return stack;
}

} // namespace detail

inline void save_model(const std::filesystem::path& dir, const DdlModel& model) {
  kv::Entries meta{{"format", kModelFormat},
                   {"method", "ddl"},
                   {"lambda", io::format_double(model.lambda)},
                   {"iters", std::to_string(model.iters)},
                   {"seed", std::to_string(model.seed)},
                   {"init", to_string(model.init)}};
  detail::save_stack(dir, model.stack, model.train_labels, meta);
}

inline void save_model(const std::filesystem::path& dir, const DdlicModel& model) {
  kv::Entries meta{{"format", kModelFormat},
                   {"method", "ddlic"},
                   {"alphas", kv::join_doubles(model.alphas)},
                   {"iters", std::to_string(model.iters)},
                   {"seed", std::to_string(model.seed)},
                   {"init", to_string(model.init)}};
  detail::save_stack(dir, model.stack, model.train_labels, meta);
}

inline void save_model(const std::filesystem::path& dir, const AnyModel& model) {
  std::visit([&](const auto& m) { save_model(dir, m); }, model);
}

inline AnyModel load_model(const std::filesystem::path& dir) {
  const auto meta = kv::read(dir / "model.txt");
  if (kv::at(meta, "format") != kModelFormat)
    throw DataError("unsupported model format '" + kv::at(meta, "format") + "'");
  const auto& method = kv::at(meta, "method");
  const auto iters = static_cast<int>(kv::parse_int("iters", kv::at(meta, "iters")));
  const auto seed = static_cast<std::uint64_t>(kv::parse_int("seed", kv::at(meta, "seed")));
  const auto init = parse_init_mode(kv::at(meta, "init"));
  if (method == "ddl") {
    DdlModel model;
    model.stack = detail::load_stack(dir, meta, model.train_labels);
    model.lambda = kv::parse_double("lambda", kv::at(meta, "lambda"));
    model.iters = iters;
    model.seed = seed;
    model.init = init;
    return model;
  }
  if (method == "ddlic") {
    DdlicModel model;
    model.stack = detail::load_stack(dir, meta, model.train_labels);
    model.alphas = kv::parse_doubles("alphas", kv::at(meta, "alphas"));
    require(model.alphas.size() == static_cast<std::size_t>(model.stack.depth()), "alphas do not match depth");
    model.iters = iters;
    model.seed = seed;
    model.init = init;
    model.class_index = LabeledMatrix(Matrix::Zero(1, static_cast<Index>(model.train_labels.size())),
                                      model.train_labels)
                            .class_index();
    return model;
  }
  throw DataError("unknown model method '" + method + "'");
}

} // namespace deepdict
