#include "loopcut/eat_gauge.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace loopcut {

namespace {

template <typename T>
struct FlooredEig {
  Matrix<T> v;
  Vector<double> n;
};

template <typename T>
FlooredEig<T> floored_eig(const Matrix<T>& g, const char* side) {
  Eigen::SelfAdjointEigenSolver<Matrix<T>> dec(hermitian_part(g));
  if (dec.info() != Eigen::Success) throw NumericalError(std::string("eat gauge: ") + side + " eigensolver failed");
  const double top = dec.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0)) throw NumericalError(std::string("eat gauge: ") + side + " metric is numerically zero");
  return {dec.eigenvectors(), dec.eigenvalues().cwiseMax(kSpectralFloor * top)};
}

}  // namespace

template <typename T>
GaugePair<T> eat_gauge_fix(const BondEnvironment<T>& env) {
  const EatSplit<T> split = eat_split(env);
  const double root = std::sqrt(split.lambda1);
  const auto l = floored_eig<T>(split.g_left * root, "left");
  const auto r = floored_eig<T>(split.g_right * root, "right");
  const Vector<T> sl = l.n.cwiseSqrt().template cast<T>(), sr = r.n.cwiseSqrt().template cast<T>();
  const Vector<T> isl = l.n.cwiseSqrt().cwiseInverse().template cast<T>();
  const Vector<T> isr = r.n.cwiseSqrt().cwiseInverse().template cast<T>();
  const Matrix<T> x = sl.asDiagonal() * (l.v.adjoint() * r.v.conjugate()) * sr.asDiagonal();
  Eigen::BDCSVD<Matrix<T>> dec(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  GaugePair<T> out;
  out.lambda = dec.singularValues();
  const Vector<T> root_lambda = out.lambda.cwiseSqrt().template cast<T>();
  const Matrix<T> a = l.v * isl.asDiagonal() * dec.matrixU() * root_lambda.asDiagonal();
  const Matrix<T> b = r.v * isr.asDiagonal() * dec.matrixV().conjugate() * root_lambda.asDiagonal();
  out.left_factor = a;
  out.right_factor = b.transpose();
  return out;
}

template <typename T>
BondEnvironment<T> gauge_transformed(const BondEnvironment<T>& env, const GaugePair<T>& pair) {
  return env.congruence(pair.left_absorb(), pair.right_absorb());
}

template <typename T>
EatTruncation<T> eat_truncate(const BondEnvironment<T>& env, Eigen::Index target_dim) {
  LOOPCUT_REQUIRE(target_dim >= 1, "target bond dimension must be at least 1");
  LOOPCUT_REQUIRE(target_dim <= env.dim(), "target bond dimension exceeds the bond dimension");
  EatTruncation<T> out;
  out.gauge = eat_gauge_fix(env);
  out.left_absorb = out.gauge.left_absorb().leftCols(target_dim);
  out.right_absorb = out.gauge.right_absorb().leftCols(target_dim);
  out.error = measure_error<T>(env, out.left_absorb * out.right_absorb.transpose());
  out.env = env.congruence(out.left_absorb, out.right_absorb);
  return out;
}

template <typename T>
EatTruncation<T> eat_truncate(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim) {
  EatTruncation<T> out = eat_truncate(env, target_dim);
  out.tensors = absorb_factors(tensors, out.left_absorb, out.right_absorb);
  return out;
}

template <typename T>
LocalTruncation<T> local_truncate(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim) {
  LOOPCUT_REQUIRE(target_dim >= 1, "target bond dimension must be at least 1");
  LOOPCUT_REQUIRE(target_dim <= env.dim(), "target bond dimension exceeds the bond dimension");
  auto r_factor = [](const Tensor<T>& t, const std::string& leg) {
    std::vector<std::string> rows;
    for (const auto& l : t.legs())
      if (l != leg) rows.push_back(l);
    const Matrix<T> x = t.matrix(rows, {leg});
    Eigen::HouseholderQR<Matrix<T>> qr(x);
    const Eigen::Index r = std::min(x.rows(), x.cols());
    return Matrix<T>(qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>());
  };
  const Matrix<T> rx = r_factor(tensors.left, tensors.left_leg);
  const Matrix<T> ry = r_factor(tensors.right, tensors.right_leg);
  LOOPCUT_REQUIRE(rx.cols() == env.dim() && ry.cols() == env.dim(), "bond tensors do not match the environment");
  Eigen::JacobiSVD<Matrix<T>> dec(rx * ry.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector<double> s = dec.singularValues();
  const Eigen::Index k = std::min<Eigen::Index>(target_dim, s.size());
  if (k == 0 || !(s(0) > 0)) throw NumericalError("local truncation: bond state is zero");
  Vector<double> w = Vector<double>::Zero(target_dim);
  for (Eigen::Index i = 0; i < k; ++i)
    if (s(i) > kSpectralFloor * s(0)) w(i) = 1.0 / std::sqrt(s(i));
  LocalTruncation<T> out;
  out.spectrum = s;
  Matrix<T> u = Matrix<T>::Zero(dec.matrixU().rows(), target_dim);
  Matrix<T> v = Matrix<T>::Zero(dec.matrixV().rows(), target_dim);
  u.leftCols(k) = dec.matrixU().leftCols(k);
  v.leftCols(k) = dec.matrixV().leftCols(k);
  out.left_absorb = ry.transpose() * v * w.asDiagonal();
  out.right_absorb = rx.transpose() * u.conjugate() * w.asDiagonal();
  out.error = measure_error<T>(env, out.left_absorb * out.right_absorb.transpose());
  out.env = env.congruence(out.left_absorb, out.right_absorb);
  out.tensors = absorb_factors(tensors, out.left_absorb, out.right_absorb);
  return out;
}

#define LOOPCUT_INSTANTIATE(T)                                                                             \
  template GaugePair<T> eat_gauge_fix<T>(const BondEnvironment<T>&);                                       \
  template BondEnvironment<T> gauge_transformed<T>(const BondEnvironment<T>&, const GaugePair<T>&);        \
  template EatTruncation<T> eat_truncate<T>(const BondEnvironment<T>&, Eigen::Index);                      \
  template EatTruncation<T> eat_truncate<T>(const BondEnvironment<T>&, const BondTensors<T>&, Eigen::Index); \
  template LocalTruncation<T> local_truncate<T>(const BondEnvironment<T>&, const BondTensors<T>&, Eigen::Index);

LOOPCUT_INSTANTIATE(double)
LOOPCUT_INSTANTIATE(cplx)

}  // namespace loopcut
