#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopcut/tensor.hpp"

namespace loopcut {

// A = u * diag(s) * vh, s non-increasing. rank_used counts the kept triplets.
template <typename T>
struct SvdResult {
  Matrix<T> u;
  Vector<double> s;
  Matrix<T> vh;
  Eigen::Index rank_used = 0;

  Matrix<T> reconstruct() const { return u * s.cast<T>().asDiagonal() * vh; }
};

struct SvdOptions {
  std::optional<Eigen::Index> max_rank;
  std::optional<double> rel_cutoff;  // drop s_k < rel_cutoff * s_1
};

template <typename T>
SvdResult<T> svd(const Matrix<T>& m, const SvdOptions& opts = {});

template <typename T>
SvdResult<T> svd(const Tensor<T>& t, const std::vector<std::string>& row_legs,
                 const std::vector<std::string>& col_legs, const SvdOptions& opts = {}) {
  return svd<T>(t.matrix(row_legs, col_legs), opts);
}

// Hermitian eigendecomposition: real values ascending, orthonormal columns.
template <typename T>
struct HermitianEig {
  Vector<double> values;
  Matrix<T> vectors;
};

// General eigendecomposition. cond_vectors is the 2-norm condition number of
// the eigenvector matrix; near_defective is set above 1e12 and such
// decompositions must not be used to build a truncation.
struct GeneralEig {
  Vector<cplx> values;
  Matrix<cplx> vectors;
  double cond_vectors = 1.0;
  bool near_defective = false;
};

inline constexpr double kDefectiveCond = 1e12;

template <typename T>
HermitianEig<T> eig_hermitian(const Matrix<T>& m);

template <typename T>
GeneralEig eig_general(const Matrix<T>& m);

template <typename T>
Matrix<T> pinv(const Matrix<T>& m, double rcond = 1e-12);

// Hermitian PSD square root and inverse square root with a relative spectral floor.
template <typename T>
Matrix<T> psd_sqrt(const Matrix<T>& m);

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(std::abs(m(i, j)))) return false;
  return true;
}

template <typename T>
Matrix<T> hermitian_part(const Matrix<T>& m) {
  return (m + m.adjoint()) / 2.0;
}

}  // namespace loopcut
