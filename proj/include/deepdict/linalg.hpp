#pragma once

// Numerical kernels shared by both training algorithms: Gram-matrix solves
// with ridge fallback, dictionary initializations and an ISTA sparse coder.

#include <deepdict/types.hpp>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace deepdict {

struct RidgePolicy {
  /// Ridge added as epsilon_scale * mean(diag(G)) * I when G is numerically singular.
  double epsilon_scale = 1e-10;
  /// A Cholesky factor whose squared diagonal spread (min/max) falls below
  /// this is treated as singular. Any Gram matrix with condition number
  /// below 1/singular_ratio is solved without ridge.
  double singular_ratio = 1e-14;
};

/// Solves G X = B for a symmetric positive semi-definite Gram matrix G.
///
/// Plain Cholesky on the well-posed path; ridge-stabilized Cholesky when G is
/// numerically singular; complete orthogonal decomposition (pseudo-inverse)
/// when even the ridged factorization fails.
class GramSolver {
public:
  enum class Path { cholesky, ridge_cholesky, pseudo_inverse };

  GramSolver() = default;

  GramSolver(const Matrix& gram, const RidgePolicy& policy = {}) {
    require(gram.rows() == gram.cols(), "Gram matrix must be square, got " + shape_str(gram));
    require(policy.epsilon_scale >= 0.0, "ridge epsilon_scale must be >= 0");
    llt_.compute(gram);
    if (llt_.info() == Eigen::Success && well_conditioned(policy.singular_ratio)) {
      path_ = Path::cholesky;
      return;
    }
    const double mean_diag = gram.rows() > 0 ? gram.diagonal().mean() : 0.0;
    const double ridge = policy.epsilon_scale * mean_diag;
    if (ridge > 0.0 && std::isfinite(ridge)) {
      Matrix ridged = gram;
      ridged.diagonal().array() += ridge;
      llt_.compute(ridged);
      if (llt_.info() == Eigen::Success) {
        path_ = Path::ridge_cholesky;
        return;
      }
    }
    cod_.compute(gram);
    path_ = Path::pseudo_inverse;
  }

  Path path() const { return path_; }
  Index size() const { return path_ == Path::pseudo_inverse ? cod_.cols() : llt_.rows(); }

  template <typename Rhs>
  Matrix solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    Matrix x = path_ == Path::pseudo_inverse ? Matrix(cod_.solve(rhs)) : Matrix(llt_.solve(rhs));
    if (!x.allFinite()) throw NumericalError("Gram solve produced non-finite values (degenerate input)");
    return x;
  }

  template <typename Rhs>
  void solve_in_place(Eigen::MatrixBase<Rhs>& rhs) const {
    if (path_ == Path::pseudo_inverse) {
      rhs = cod_.solve(rhs);
    } else {
      llt_.solveInPlace(rhs);
    }
    if (!rhs.allFinite()) throw NumericalError("Gram solve produced non-finite values (degenerate input)");
  }

private:
  bool well_conditioned(double ratio) const {
    if (llt_.rows() == 0) return true;
    const auto d = llt_.matrixLLT().diagonal().array().abs();
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    return hi > 0.0 && std::isfinite(hi) && lo * lo >= ratio * hi * hi;
  }

  Eigen::LLT<Matrix> llt_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
  Path path_ = Path::cholesky;
};

/// Least-squares dictionary for fixed codes: argmin_D ||Z_prev - D Z||_F^2,
/// i.e. D = Z_prev Z^T (Z Z^T)^{-1}.
inline Matrix solve_least_squares_dictionary(const Matrix& z_prev, const Matrix& z,
                                             const RidgePolicy& policy = {}) {
  require(z_prev.cols() == z.cols(), "sample count mismatch: " + shape_str(z_prev) + " vs " + shape_str(z));
  require(z.rows() >= 1, "code dimension must be >= 1");
  const GramSolver solver(z * z.transpose(), policy);
  return solver.solve(z * z_prev.transpose()).transpose();
}

/// Least-squares codes for a fixed dictionary: argmin_Z ||X - D Z||_F^2.
inline Matrix ridge_code(const Matrix& dict, const Matrix& x, const RidgePolicy& policy = {}) {
  require(dict.rows() == x.rows(),
          "dictionary " + shape_str(dict) + " incompatible with data " + shape_str(x));
  require(dict.cols() >= 1, "dictionary must have at least one atom");
  if (x.cols() == 0) return Matrix(dict.cols(), 0);
  const GramSolver solver(dict.transpose() * dict, policy);
  return solver.solve(dict.transpose() * x);
}

/// First k1 vectors of an orthonormal basis built from the columns of z0 in
/// order (classical Gram-Schmidt with re-orthogonalization), padded with
/// seeded random directions when rank(z0) < k1.
inline Matrix qr_orthonormal_init(const Matrix& z0, Index k1, std::uint64_t seed) {
  const Index k0 = z0.rows();
  require(k1 >= 1, "number of atoms must be >= 1");
  require(k1 <= k0, "orthonormal init needs k1 <= k0, got k1=" + std::to_string(k1) +
                        " k0=" + std::to_string(k0));
  Matrix q(k0, k1);
  Index found = 0;
  auto try_add = [&](Vector v) {
    const double original = v.norm();
    if (!(original > 0.0)) return;
    for (int pass = 0; pass < 2; ++pass) {
      if (found > 0) v -= q.leftCols(found) * (q.leftCols(found).transpose() * v);
      if (pass == 0 && v.norm() <= 1e-8 * original) return;
    }
    q.col(found++) = v / v.norm();
  };
  for (Index j = 0; j < z0.cols() && found < k1; ++j) try_add(z0.col(j));

  std::mt19937_64 rng(derive_seed(seed, 0x51));
  std::normal_distribution<double> normal(0.0, 1.0);
  while (found < k1) {
    Vector v(k0);
    for (Index i = 0; i < k0; ++i) v(i) = normal(rng);
    try_add(std::move(v));
  }
  return q;
}

/// Standard-normal entries under `seed`, each column scaled to unit norm.
inline Matrix random_dictionary_init(Index rows, Index cols, std::uint64_t seed) {
  require(rows >= 1 && cols >= 1, "dictionary shape must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix d(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    double norm = 0.0;
    while (!(norm > 0.0)) {
      for (Index i = 0; i < rows; ++i) d(i, j) = normal(rng);
      norm = d.col(j).norm();
    }
    d.col(j) /= norm;
  }
  return d;
}

/// Largest eigenvalue of D^T D by power iteration (Rayleigh quotient).
inline double largest_gram_eigenvalue(const Matrix& dict, int max_iters = 50, double tol = 1e-8) {
  const Index k = dict.cols();
  if (k == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(k);
  for (Index i = 0; i < k; ++i) v(i) = normal(rng);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector w = dict.transpose() * (dict * v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (!(wn > 0.0)) return 0.0;
    v = w / wn;
    const bool done = std::abs(next - estimate) <= tol * std::abs(next);
    estimate = next;
    if (done) break;
  }
  return estimate;
}

struct IstaConfig {
  int max_iters = 500;
  /// Stop once ||Z_new - Z||_F <= rel_tol * ||Z_new||_F.
  double rel_tol = 1e-6;
  /// Fixed step size; when unset the step is 1 / lambda_max(D^T D).
  std::optional<double> fixed_step;
  /// Record the objective after every iteration (costs one extra product).
  bool record_objective = false;
};

struct IstaResult {
  Matrix codes;
  int iterations = 0;
  double step = 0.0;
  /// objective[0] is the starting point, objective[i] the value after iteration i.
  std::vector<double> objective;
};

/// ||X - D Z||_F^2 + lambda ||Z||_1
inline double sparse_coding_objective(const Matrix& dict, const Matrix& x, const Matrix& z, double lambda) {
  return (x - dict * z).squaredNorm() + lambda * z.lpNorm<1>();
}

/// Iterative soft-thresholding for min_Z ||X - D Z||_F^2 + lambda ||Z||_1.
///
/// Each iteration is a proximal gradient step on half the objective with
/// step t: Z <- soft(Z - t D^T (D Z - X), t lambda / 2). With the default
/// t = 1 / lambda_max(D^T D) the objective never increases.
inline IstaResult ista_solve(const Matrix& dict, const Matrix& x, double lambda, const IstaConfig& cfg = {},
                             const Matrix* warm_start = nullptr) {
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  require(cfg.max_iters >= 1, "ISTA max_iters must be >= 1");
  require(cfg.rel_tol > 0.0, "ISTA rel_tol must be > 0");
  require(!cfg.fixed_step || *cfg.fixed_step > 0.0, "ISTA fixed step must be > 0");
  require(dict.rows() == x.rows(), "dictionary " + shape_str(dict) + " incompatible with data " + shape_str(x));
  const Index k = dict.cols();
  IstaResult result;
  if (warm_start) {
    require(warm_start->rows() == k && warm_start->cols() == x.cols(),
            "warm start has shape " + shape_str(*warm_start));
    result.codes = *warm_start;
  } else {
    result.codes = Matrix::Zero(k, x.cols());
  }
  if (x.cols() == 0) return result;

  if (cfg.fixed_step) {
    result.step = *cfg.fixed_step;
  } else {
    const double top = largest_gram_eigenvalue(dict);
    if (!(top > 0.0)) throw NumericalError("ISTA: dictionary has zero spectral norm");
    result.step = 1.0 / top;
  }
  const double t = result.step;
  const double threshold = t * lambda / 2.0;
  const Matrix gram = dict.transpose() * dict;
  const Matrix target = dict.transpose() * x;

  Matrix& z = result.codes;
  if (cfg.record_objective) result.objective.push_back(sparse_coding_objective(dict, x, z, lambda));
  Matrix next(k, x.cols());
  for (int it = 0; it < cfg.max_iters; ++it) {
    next.noalias() = z - t * (gram * z - target);
    next = next.unaryExpr([threshold](double v) {
      return v > threshold ? v - threshold : (v < -threshold ? v + threshold : 0.0);
    });
    const double change = (next - z).norm();
    z.swap(next);
    result.iterations = it + 1;
    if (cfg.record_objective) result.objective.push_back(sparse_coding_objective(dict, x, z, lambda));
    if (change <= cfg.rel_tol * z.norm()) break;
  }
  if (!z.allFinite()) throw NumericalError("ISTA diverged (step too large?)");
  return result;
}

inline Matrix ista_sparse_code(const Matrix& dict, const Matrix& x, double lambda, const IstaConfig& cfg = {},
                               const Matrix* warm_start = nullptr) {
  return ista_solve(dict, x, lambda, cfg, warm_start).codes;
}

} // namespace deepdict
