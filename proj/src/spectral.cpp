#include "svshrink/spectral.hpp"

#include <cmath>
#include <string>

#include "svshrink/errors.hpp"

namespace svshrink {

MatrixShape::MatrixShape(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("matrix shape must be at least 1x1, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

DenoiseProblem::DenoiseProblem(Matrix observed, double sigma)
    : observed_(std::move(observed)), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ContractError("sigma must be > 0");
  }
  if (observed_.size() == 0) {
    throw DimensionError("observed matrix is empty");
  }
  if (!is_finite(observed_)) {
    throw ContractError("observed matrix contains non-finite entries");
  }
}

bool is_finite(const Matrix& m) { return m.allFinite(); }

namespace {

void require_finite_input(const Matrix& Y) {
  if (Y.size() == 0) {
    throw DimensionError("cannot factor an empty matrix");
  }
  if (!Y.allFinite()) {
    throw ContractError("cannot factor a matrix with non-finite entries");
  }
}

void canonicalize_signs(SvdFactors& f) {
  for (Index j = 0; j < f.U.cols(); ++j) {
    // Entries within a few ulps of the largest magnitude count as ties; the
    // lowest row among them decides.
    const double best = f.U.col(j).cwiseAbs().maxCoeff();
    Index pivot = 0;
    while (std::abs(f.U(pivot, j)) < best * (1.0 - 1e-12)) ++pivot;
    if (f.U(pivot, j) < 0.0) {
      f.U.col(j) = -f.U.col(j);
      f.V.col(j) = -f.V.col(j);
    }
  }
}

}  // namespace

SvdFactors svd(const Matrix& Y) {
  require_finite_input(Y);
  Eigen::BDCSVD<Matrix> dec(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw FactorizationError("SVD did not converge");
  }
  SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  if (!f.U.allFinite() || !f.S.allFinite() || !f.V.allFinite()) {
    throw FactorizationError("SVD produced non-finite factors");
  }
  canonicalize_signs(f);
  return f;
}

Vector singular_values(const Matrix& Y) {
  require_finite_input(Y);
  Eigen::BDCSVD<Matrix> dec(Y);
  if (dec.info() != Eigen::Success || !dec.singularValues().allFinite()) {
    throw FactorizationError("SVD did not converge");
  }
  return dec.singularValues();
}

Matrix reconstruct(const SvdFactors& f, const Vector& s_new) {
  if (s_new.size() != f.S.size()) {
    throw DimensionError("reconstruct: expected " + std::to_string(f.S.size()) +
                         " singular values, got " + std::to_string(s_new.size()));
  }
  for (Index i = 0; i < s_new.size(); ++i) {
    if (!std::isfinite(s_new[i]) || s_new[i] < 0.0) {
      throw ContractError("reconstruct: shrunken value " + std::to_string(i) +
                          " must be finite and non-negative");
    }
  }
  return f.U * s_new.asDiagonal() * f.V.transpose();
}

Matrix eym_truncate(const SvdFactors& f, Index rank) {
  const Index L = f.S.size();
  if (rank < 0 || rank > L) {
    throw RangeError("truncation rank " + std::to_string(rank) + " outside [0, " +
                     std::to_string(L) + "]");
  }
  const Index n = f.U.rows();
  const Index m = f.V.rows();
  if (rank == 0) return Matrix::Zero(n, m);
  return f.U.leftCols(rank) * f.S.head(rank).asDiagonal() * f.V.leftCols(rank).transpose();
}

Matrix eym_truncate(const Matrix& Y, Index rank) {
  const Index L = std::min(Y.rows(), Y.cols());
  if (rank < 0 || rank > L) {
    throw RangeError("truncation rank " + std::to_string(rank) + " outside [0, " +
                     std::to_string(L) + "]");
  }
  return eym_truncate(svd(Y), rank);
}

FactorErrors factor_errors(const SvdFactors& f, const Matrix& Y) {
  const Index L = f.S.size();
  FactorErrors e{};
  e.left_orthonormality = (f.U.transpose() * f.U - Matrix::Identity(L, L)).norm();
  e.right_orthonormality = (f.V.transpose() * f.V - Matrix::Identity(L, L)).norm();
  const double diff = (f.U * f.S.asDiagonal() * f.V.transpose() - Y).norm();
  const double scale = Y.norm();
  e.reconstruction = scale > 0.0 ? diff / scale : diff;
  e.descending = true;
  for (Index i = 0; i < L; ++i) {
    if (f.S[i] < 0.0 || (i > 0 && f.S[i] > f.S[i - 1])) e.descending = false;
  }
  return e;
}

}  // namespace svshrink
