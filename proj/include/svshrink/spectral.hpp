#pragma once

// Thin SVD, spectral synthesis and Eckart-Young truncation.

#include <Eigen/Dense>

namespace svshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default tolerances. Every consumer takes these by value so callers (and the
/// CLI config) can override them.
struct Tolerances {
  double reconstruction = 1e-10;  // relative Frobenius, U diag(S) V^T vs Y
  double io_roundtrip = 1e-15;    // relative, CSV write/read
  double gap = 1e-10;             // |y_i^2 - y_j^2| > gap * y_1^2
  double ridge_condition = 1e12;  // SVLET Gram matrix condition that triggers ridge
  double ridge_scale = 1e-10;     // ridge delta = ridge_scale * trace(M) / K
};

class MatrixShape {
 public:
  MatrixShape(Index rows, Index cols);
  static MatrixShape of(const Matrix& m) { return {m.rows(), m.cols()}; }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index min_dim() const noexcept { return rows_ < cols_ ? rows_ : cols_; }
  Index max_dim() const noexcept { return rows_ < cols_ ? cols_ : rows_; }
  Index abs_diff() const noexcept { return rows_ > cols_ ? rows_ - cols_ : cols_ - rows_; }
  double size() const noexcept { return static_cast<double>(rows_) * static_cast<double>(cols_); }

  friend bool operator==(const MatrixShape&, const MatrixShape&) = default;

 private:
  Index rows_;
  Index cols_;
};

// Thin factors: U is n x L, V is m x L, S has length L = min(n, m), descending.
struct SvdFactors {
  Matrix U;
  Vector S;
  Matrix V;

  MatrixShape shape() const { return {U.rows(), V.rows()}; }
};

// Observation Y = X + W with W_ij ~ N(0, sigma^2), sigma known.
class DenoiseProblem {
 public:
  DenoiseProblem(Matrix observed, double sigma);

  const Matrix& observed() const noexcept { return observed_; }
  double sigma() const noexcept { return sigma_; }
  MatrixShape shape() const { return MatrixShape::of(observed_); }

 private:
  Matrix observed_;
  double sigma_;
};

/// Thin SVD with a canonical sign: the largest-magnitude entry of every left
/// singular vector (lowest row on ties) is non-negative. Throws
/// FactorizationError if the decomposition fails or yields non-finite values.
SvdFactors svd(const Matrix& Y);

/// Singular values only, descending.
Vector singular_values(const Matrix& Y);

/// sum_i s_new[i] U[:,i] V[:,i]^T
Matrix reconstruct(const SvdFactors& f, const Vector& s_new);

Matrix eym_truncate(const Matrix& Y, Index rank);
Matrix eym_truncate(const SvdFactors& f, Index rank);

struct FactorErrors {
  double left_orthonormality;   // ||U^T U - I||_F
  double right_orthonormality;  // ||V^T V - I||_F
  double reconstruction;        // ||U diag(S) V^T - Y||_F / ||Y||_F (absolute when Y = 0)
  bool descending;
};

FactorErrors factor_errors(const SvdFactors& f, const Matrix& Y);

bool is_finite(const Matrix& m);

}  // namespace svshrink
