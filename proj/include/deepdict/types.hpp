#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepdict {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// For each class c in 0..C-1, the column indices (in order) belonging to c.
using ClassIndex = std::vector<std::vector<Index>>;

/// Malformed input data, inconsistent shapes or invalid configuration.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A factorization or solve that could not produce a finite result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used to derive independent RNG streams from one seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DataError(message);
}

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace deepdict
