#pragma once

#include <deepdict/linalg.hpp>
#include <deepdict/types.hpp>

#include <string>
#include <vector>

namespace deepdict {

/// Outcome of training one layer: the dictionary, the training codes and the
/// per-iteration objective (one entry per outer iteration).
struct LayerResult {
  Matrix dictionary;
  Matrix codes;
  double initial_objective = 0.0;
  std::vector<double> trace;
};

/// Dictionaries D_1..D_L (D_l is k_{l-1} x k_l) with the training codes of
/// every layer and their objective traces.
struct DictionaryStack {
  std::vector<Matrix> dictionaries;
  std::vector<Matrix> layer_codes;
  std::vector<double> initial_objectives;
  std::vector<std::vector<double>> traces;

  Index depth() const { return static_cast<Index>(dictionaries.size()); }
  Index input_dim() const { return dictionaries.empty() ? 0 : dictionaries.front().rows(); }
  Index output_dim() const { return dictionaries.empty() ? 0 : dictionaries.back().cols(); }

  std::vector<Index> layer_sizes() const {
    std::vector<Index> sizes;
    for (const auto& d : dictionaries) sizes.push_back(d.cols());
    return sizes;
  }

  void push(LayerResult layer) {
    dictionaries.push_back(std::move(layer.dictionary));
    layer_codes.push_back(std::move(layer.codes));
    initial_objectives.push_back(layer.initial_objective);
    traces.push_back(std::move(layer.trace));
  }

  /// Throws unless adjacent dictionary shapes chain and codes match them.
  void validate() const {
    require(!dictionaries.empty(), "model has no layers");
    for (std::size_t l = 0; l < dictionaries.size(); ++l) {
      require(dictionaries[l].cols() >= 1, "layer " + std::to_string(l + 1) + " has no atoms");
      if (l > 0)
        require(dictionaries[l].rows() == dictionaries[l - 1].cols(),
                "dictionary " + std::to_string(l + 1) + " (" + shape_str(dictionaries[l]) +
                    ") does not chain with dictionary " + std::to_string(l) + " (" +
                    shape_str(dictionaries[l - 1]) + ")");
    }
    require(layer_codes.size() == dictionaries.size(), "layer code count does not match depth");
    for (std::size_t l = 0; l < layer_codes.size(); ++l) {
      require(layer_codes[l].rows() == dictionaries[l].cols(),
              "codes of layer " + std::to_string(l + 1) + " have " + std::to_string(layer_codes[l].rows()) +
                  " rows, expected " + std::to_string(dictionaries[l].cols()));
      require(layer_codes[l].cols() == layer_codes.front().cols(), "layer codes disagree on sample count");
    }
  }

  /// D_1 D_2 ... D_upto (upto in 1..L).
  Matrix product(Index upto) const {
    require(upto >= 1 && upto <= depth(), "layer " + std::to_string(upto) + " out of range");
    Matrix p = dictionaries.front();
    for (Index l = 1; l < upto; ++l) p = p * dictionaries[static_cast<std::size_t>(l)];
    return p;
  }
};

enum class InitMode { qr_first_random_rest, random_all };

inline const char* to_string(InitMode mode) {
  return mode == InitMode::qr_first_random_rest ? "qr-first-random-rest" : "random";
}

/// Layer l (0-based) initial dictionary: orthonormal basis from the training
/// matrix for the first layer under qr_first_random_rest, otherwise
/// normalized Gaussian atoms. Each layer draws from its own RNG stream.
inline Matrix initial_dictionary(std::size_t layer, const Matrix& input, Index atoms, InitMode mode,
                                 std::uint64_t seed) {
  if (layer == 0 && mode == InitMode::qr_first_random_rest)
    return qr_orthonormal_init(input, atoms, derive_seed(seed, 0));
  return random_dictionary_init(input.rows(), atoms, derive_seed(seed, layer + 1));
}

} // namespace deepdict
