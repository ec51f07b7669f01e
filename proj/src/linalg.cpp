#include "loopcut/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace loopcut {

template <typename T>
SvdResult<T> svd(const Matrix<T>& m, const SvdOptions& opts) {
  if (!all_finite(m)) throw NumericalError("svd: non-finite matrix entries");
  SvdResult<T> out;
  const Eigen::Index k = std::min(m.rows(), m.cols());
  if (k == 0) {
    out.u = Matrix<T>(m.rows(), 0);
    out.vh = Matrix<T>(0, m.cols());
    out.s = Vector<double>(0);
    return out;
  }
  Matrix<T> u, v;
  Vector<double> s;
  Eigen::BDCSVD<Matrix<T>> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() == Eigen::Success) {
    s = dec.singularValues();
    u = dec.matrixU();
    v = dec.matrixV();
  }
  if (dec.info() != Eigen::Success || !all_finite(s) || !all_finite(u) || !all_finite(v)) {
    Eigen::JacobiSVD<Matrix<T>> jac(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (jac.info() != Eigen::Success) throw NumericalError("svd: decomposition failed");
    s = jac.singularValues();
    u = jac.matrixU();
    v = jac.matrixV();
  }
  Eigen::Index keep = k;
  if (opts.max_rank) keep = std::min(keep, std::max<Eigen::Index>(*opts.max_rank, 0));
  if (opts.rel_cutoff && s.size() > 0) {
    Eigen::Index n = 0;
    while (n < keep && s(n) >= *opts.rel_cutoff * s(0)) ++n;
    keep = n;
  }
  out.u = u.leftCols(keep);
  out.s = s.head(keep);
  out.vh = v.leftCols(keep).adjoint();
  out.rank_used = keep;
  return out;
}

template <typename T>
HermitianEig<T> eig_hermitian(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eig_hermitian: matrix is not square");
  if (!all_finite(m)) throw NumericalError("eig_hermitian: non-finite matrix entries");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-10 * std::max(scale, 1e-300))
    throw InvalidArgument("eig_hermitian: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix<T>> dec(hermitian_part(m));
  if (dec.info() != Eigen::Success) throw NumericalError("eig_hermitian: no convergence");
  return {dec.eigenvalues(), dec.eigenvectors()};
}

template <typename T>
GeneralEig eig_general(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eig_general: matrix is not square");
  if (!all_finite(m)) throw NumericalError("eig_general: non-finite matrix entries");
  GeneralEig out;
  if constexpr (is_complex_v<T>) {
    Eigen::ComplexEigenSolver<Matrix<cplx>> dec(m, true);
    if (dec.info() != Eigen::Success) throw NumericalError("eig_general: no convergence");
    out.values = dec.eigenvalues();
    out.vectors = dec.eigenvectors();
  } else {
    Eigen::EigenSolver<Matrix<double>> dec(m, true);
    if (dec.info() != Eigen::Success) throw NumericalError("eig_general: no convergence");
    out.values = dec.eigenvalues();
    out.vectors = dec.eigenvectors();
  }
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    const double n = out.vectors.col(j).norm();
    if (n > 0) out.vectors.col(j) /= n;
  }
  if (m.rows() > 0) {
    Eigen::JacobiSVD<Matrix<cplx>> sv(out.vectors);
    const auto& s = sv.singularValues();
    const double smin = s(s.size() - 1);
    out.cond_vectors = smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  }
  out.near_defective = !(out.cond_vectors <= kDefectiveCond);
  return out;
}

template <typename T>
Matrix<T> pinv(const Matrix<T>& m, double rcond) {
  if (!all_finite(m)) throw NumericalError("pinv: non-finite matrix entries");
  if (m.size() == 0) return Matrix<T>(m.cols(), m.rows());
  SvdResult<T> d = svd<T>(m);
  Matrix<T> out = Matrix<T>::Zero(m.cols(), m.rows());
  const double cut = d.s.size() ? rcond * d.s(0) : 0.0;
  for (Eigen::Index k = 0; k < d.s.size(); ++k) {
    if (d.s(k) <= cut || d.s(k) == 0.0) break;
    out += d.vh.row(k).adjoint() * (1.0 / d.s(k)) * d.u.col(k).adjoint();
  }
  return out;
}

template <typename T>
Matrix<T> psd_sqrt(const Matrix<T>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<T>> dec(hermitian_part(m));
  Vector<double> w = dec.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return dec.eigenvectors() * w.cast<T>().asDiagonal() * dec.eigenvectors().adjoint();
}

#define LOOPCUT_INSTANTIATE(T)                                                  \
  template SvdResult<T> svd<T>(const Matrix<T>&, const SvdOptions&);            \
  template HermitianEig<T> eig_hermitian<T>(const Matrix<T>&);                  \
  template GeneralEig eig_general<T>(const Matrix<T>&);                         \
  template Matrix<T> pinv<T>(const Matrix<T>&, double);                         \
  template Matrix<T> psd_sqrt<T>(const Matrix<T>&);

LOOPCUT_INSTANTIATE(double)
LOOPCUT_INSTANTIATE(cplx)

}  // namespace loopcut
