#include "loopcut/bond_metric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <set>

namespace loopcut {

namespace {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (i,j),(i',j') <-> (i,i'),(j,j'); the map is its own inverse.
template <typename T>
Matrix<T> swap_layout(const Matrix<T>& m, Eigen::Index d) {
  Matrix<T> out(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index ip = 0; ip < d; ++ip)
        for (Eigen::Index jp = 0; jp < d; ++jp) out(i * d + ip, j * d + jp) = m(i * d + j, ip * d + jp);
  return out;
}

// Each column of m is a D x D matrix X (row-major over (i,i')); returns a^dag X a per column.
template <typename T>
Matrix<T> congruence_columns(const Matrix<T>& m, const Matrix<T>& a, Eigen::Index d) {
  const Eigen::Index dn = a.cols();
  Matrix<T> out(dn * dn, m.cols());
  const Matrix<T> ah = a.adjoint();
  RowMajor<T> x(d, d), y(dn, dn);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    x = Eigen::Map<const RowMajor<T>>(m.col(c).data(), d, d);
    y.noalias() = ah * x * a;
    out.col(c) = Eigen::Map<const Vector<T>>(y.data(), dn * dn);
  }
  return out;
}

template <typename T>
Matrix<T> clip_psd(const Matrix<T>& m, double* min_ratio = nullptr) {
  if (!all_finite(m)) throw NumericalError("metric has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix<T>> dec(hermitian_part(m));
  if (dec.info() != Eigen::Success) throw NumericalError("metric eigendecomposition failed");
  const auto& w = dec.eigenvalues();
  const double wmax = w.cwiseAbs().maxCoeff();
  if (min_ratio) *min_ratio = wmax > 0 ? w(0) / wmax : 0.0;
  if (w(0) >= 0) return hermitian_part(m);
  Vector<double> clipped = w.cwiseMax(0.0);
  return dec.eigenvectors() * clipped.template cast<T>().asDiagonal() * dec.eigenvectors().adjoint();
}

template <typename T>
bool is_diagonal(const Matrix<T>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != T(0)) return false;
  return true;
}

// Singular triplets of the split-layout metric, using the factorization when it is thinner.
template <typename T>
void split_svd(const BondEnvironment<T>& env, Vector<double>& s, Vector<T>* u1, Vector<T>* v1) {
  const Eigen::Index d2 = env.dim() * env.dim();
  Matrix<T> core;
  Matrix<T> ql, qr;
  const bool thin = env.factored() && env.inner_dim() < d2;
  if (thin) {
    Eigen::HouseholderQR<Matrix<T>> fl(env.left());
    Eigen::HouseholderQR<Matrix<T>> fr(env.right().adjoint());
    const Eigen::Index r = env.inner_dim();
    ql = fl.householderQ() * Matrix<T>::Identity(d2, r);
    qr = fr.householderQ() * Matrix<T>::Identity(d2, r);
    Matrix<T> rl = fl.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    Matrix<T> rr = fr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    core = rl * rr.adjoint();
  } else {
    core = env.split_matrix();
  }
  const bool vectors = u1 || v1;
  const unsigned flags = vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0;
  Vector<T> u, v;
  Eigen::BDCSVD<Matrix<T>> dec(core, flags);
  bool ok = dec.info() == Eigen::Success && all_finite(dec.singularValues());
  if (ok) {
    s = dec.singularValues();
    if (vectors) {
      u = dec.matrixU().col(0);
      v = dec.matrixV().col(0);
      ok = all_finite(u) && all_finite(v);
    }
  }
  if (!ok) {
    Eigen::JacobiSVD<Matrix<T>> jac(core, flags);
    if (jac.info() != Eigen::Success) throw NumericalError("metric split svd failed");
    s = jac.singularValues();
    if (vectors) {
      u = jac.matrixU().col(0);
      v = jac.matrixV().col(0);
    }
  }
  if (u1) *u1 = thin ? Vector<T>(ql * u) : u;
  if (v1) *v1 = thin ? Vector<T>(qr * v) : v;
}

}  // namespace

template <typename T>
BondEnvironment<T> BondEnvironment<T>::from_full(const Matrix<T>& g_full, Eigen::Index d) {
  LOOPCUT_REQUIRE(d >= 1, "bond dimension must be positive");
  LOOPCUT_REQUIRE(g_full.rows() == d * d && g_full.cols() == d * d, "metric must be D^2 x D^2");
  if (!all_finite(g_full)) throw NumericalError("metric has non-finite entries");
  const double scale = g_full.norm();
  if ((g_full - g_full.adjoint()).norm() > 1e-8 * std::max(scale, 1e-300))
    throw InvalidArgument("metric is not Hermitian");
  double min_ratio = 0;
  Matrix<T> g = clip_psd(g_full, &min_ratio);
  if (min_ratio < -1e-10) throw NumericalError("metric is not positive semidefinite");
  BondEnvironment env;
  env.d_ = d;
  env.factored_ = false;
  env.left_ = swap_layout(g, d);
  return env;
}

template <typename T>
BondEnvironment<T> BondEnvironment<T>::from_factors(Matrix<T> left, Matrix<T> right, Eigen::Index d) {
  LOOPCUT_REQUIRE(d >= 1, "bond dimension must be positive");
  LOOPCUT_REQUIRE(left.rows() == d * d && right.cols() == d * d && left.cols() == right.rows(),
                  "metric factors have inconsistent shapes");
  if (!all_finite(left) || !all_finite(right)) throw NumericalError("metric factors have non-finite entries");
  BondEnvironment env;
  env.d_ = d;
  env.factored_ = true;
  env.left_ = std::move(left);
  env.right_ = std::move(right);
  return env;
}

template <typename T>
Matrix<T> BondEnvironment<T>::split_matrix() const {
  return factored_ ? Matrix<T>(left_ * right_) : left_;
}

template <typename T>
Matrix<T> BondEnvironment<T>::full() const {
  return swap_layout(split_matrix(), d_);
}

template <typename T>
double BondEnvironment<T>::norm_target() const {
  return std::real(diag_metric(*this).sum());
}

template <typename T>
BondEnvironment<T> BondEnvironment<T>::congruence(const Matrix<T>& a, const Matrix<T>& b) const {
  LOOPCUT_REQUIRE(a.rows() == d_ && b.rows() == d_ && a.cols() == b.cols(), "bond transformation shape mismatch");
  BondEnvironment out;
  out.d_ = a.cols();
  out.factored_ = factored_;
  if (factored_) {
    out.left_ = congruence_columns(left_, a, d_);
    Matrix<T> rt = right_.transpose();
    out.right_ = congruence_columns(rt, b, d_).transpose();
  } else {
    Matrix<T> half = congruence_columns(left_, a, d_);
    Matrix<T> ht = half.transpose();
    out.left_ = congruence_columns(ht, b, d_).transpose();
  }
  return out;
}

template <typename T>
MetricNetwork<T> make_double_layer(const std::vector<Tensor<T>>& kets, const std::vector<NetworkLink>& ket_links,
                                   const Stub& left, const Stub& right) {
  const std::size_t n = kets.size();
  LOOPCUT_REQUIRE(left.tensor < n && right.tensor < n, "stub tensor index out of range");
  MetricNetwork<T> net;
  for (const auto& k : kets) net.tensors.push_back(k);
  for (const auto& k : kets) net.tensors.push_back(k.conj());
  std::set<std::pair<std::size_t, std::string>> linked;
  for (const auto& l : ket_links) {
    net.links.push_back(l);
    net.links.push_back({l.a + n, l.leg_a, l.b + n, l.leg_b});
    linked.insert({l.a, l.leg_a});
    linked.insert({l.b, l.leg_b});
  }
  linked.insert({left.tensor, left.leg});
  linked.insert({right.tensor, right.leg});
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& leg : kets[k].legs())
      if (!linked.count({k, leg})) net.links.push_back({k, leg, k + n, leg});
  net.ket_left = left;
  net.ket_right = right;
  net.bra_left = {left.tensor + n, left.leg};
  net.bra_right = {right.tensor + n, right.leg};
  return net;
}

template <typename T>
BondEnvironment<T> build_metric(const MetricNetwork<T>& net) {
  const std::size_t n = net.tensors.size();
  LOOPCUT_REQUIRE(n >= 1, "metric network is empty");
  auto uid = [](std::size_t t, const std::string& leg) { return "n" + std::to_string(t) + "." + leg; };
  std::vector<Tensor<T>> ts;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::pair<std::string, std::string>> map;
    for (const auto& leg : net.tensors[k].legs()) map.emplace_back(leg, uid(k, leg));
    ts.push_back(net.tensors[k].relabeled(map));
  }
  for (const auto& l : net.links) {
    LOOPCUT_REQUIRE(l.a < n && l.b < n, "link tensor index out of range");
    LOOPCUT_REQUIRE(l.a != l.b, "self-links are not supported");
    LOOPCUT_REQUIRE(ts[l.a].has_leg(uid(l.a, l.leg_a)) && ts[l.b].has_leg(uid(l.b, l.leg_b)), "link names an unknown leg");
  }
  std::vector<bool> done(n, false);
  Tensor<T> blob = ts[0];
  done[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    std::size_t best_links = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k]) continue;
      std::size_t count = 0;
      for (const auto& l : net.links)
        if ((l.a == k && done[l.b]) || (l.b == k && done[l.a])) ++count;
      if (best == n || count > best_links) {
        best = k;
        best_links = count;
      }
    }
    std::vector<LegPair> pairs;
    for (const auto& l : net.links) {
      if (l.a == best && done[l.b]) pairs.emplace_back(uid(l.b, l.leg_b), uid(l.a, l.leg_a));
      if (l.b == best && done[l.a]) pairs.emplace_back(uid(l.a, l.leg_a), uid(l.b, l.leg_b));
    }
    blob = contract(blob, ts[best], pairs);
    done[best] = true;
  }
  const std::vector<std::string> rows = {uid(net.bra_left.tensor, net.bra_left.leg), uid(net.bra_right.tensor, net.bra_right.leg)};
  const std::vector<std::string> cols = {uid(net.ket_left.tensor, net.ket_left.leg), uid(net.ket_right.tensor, net.ket_right.leg)};
  if (blob.rank() != 4) throw InvalidArgument("metric network leaves " + std::to_string(blob.rank()) + " open legs, expected the four stubs");
  for (const auto& s : rows) LOOPCUT_REQUIRE(blob.has_leg(s), "stub leg was contracted away: " + s);
  for (const auto& s : cols) LOOPCUT_REQUIRE(blob.has_leg(s), "stub leg was contracted away: " + s);
  const std::size_t d = blob.dim(rows[0]);
  for (const auto& s : rows) LOOPCUT_REQUIRE(blob.dim(s) == d, "cut-bond stubs have unequal dims");
  for (const auto& s : cols) LOOPCUT_REQUIRE(blob.dim(s) == d, "cut-bond stubs have unequal dims");
  return BondEnvironment<T>::from_full(blob.matrix(rows, cols), static_cast<Eigen::Index>(d));
}

template <typename T>
Matrix<T> diag_metric(const BondEnvironment<T>& env) {
  const Eigen::Index d = env.dim();
  Matrix<T> g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip) {
      const Eigen::Index p = i * d + ip;
      g(i, ip) = env.factored() ? T((env.left().row(p) * env.right().col(p))(0, 0)) : env.left()(p, p);
    }
  return hermitian_part(g);
}

template <typename T>
EatSplit<T> eat_split(const BondEnvironment<T>& env) {
  const Eigen::Index d = env.dim();
  EatSplit<T> out;
  Vector<T> u1, v1;
  split_svd(env, out.spectrum, &u1, &v1);
  if (out.spectrum.size() == 0 || out.spectrum(0) <= 0) throw NumericalError("eat_split: zero metric");
  out.lambda1 = out.spectrum(0);
  Matrix<T> gl(d, d), gr(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip) {
      gl(i, ip) = u1(i * d + ip);
      gr(i, ip) = conj_of(v1(i * d + ip));
    }
  const T tr = gl.trace();
  if (std::abs(tr) > 0) {
    const T phase = tr / std::abs(tr);
    gl *= conj_of(phase);
    gr *= phase;
  }
  gl = clip_psd(gl);
  gr = clip_psd(gr);
  const double nl = gl.norm(), nr = gr.norm();
  if (nl == 0 || nr == 0) throw NumericalError("eat_split: leading factor is not positive");
  out.g_left = gl / nl;
  out.g_right = gr / nr;
  return out;
}

template <typename T>
double loopiness(const BondEnvironment<T>& env) {
  Vector<double> s;
  split_svd<T>(env, s, nullptr, nullptr);
  if (s.size() == 0 || s(0) <= 0) throw NumericalError("loopiness: zero metric");
  if (s.size() < 2 || s(1) <= 1e-14 * s(0)) return 0.0;
  return s(1) / s(0);
}

template <typename T>
T coefficient_overlap(const BondEnvironment<T>& env, const Matrix<T>& m1, const Matrix<T>& m2) {
  const Eigen::Index d = env.dim();
  LOOPCUT_REQUIRE(m1.rows() == d && m1.cols() == d && m2.rows() == d && m2.cols() == d, "bond coefficient must be D x D");
  if (is_diagonal(m1) && is_diagonal(m2)) {
    const Matrix<T> g = diag_metric(env);
    return (m1.diagonal().adjoint() * g * m2.diagonal())(0, 0);
  }
  if (env.factored()) {
    T acc(0);
    for (Eigen::Index a = 0; a < env.inner_dim(); ++a) {
      Eigen::Map<const RowMajor<T>> la(env.left().col(a).data(), d, d);
      RowMajor<T> ra(d, d);
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index jp = 0; jp < d; ++jp) ra(j, jp) = env.right()(a, j * d + jp);
      const Matrix<T> t = la * m2 * ra.transpose();
      acc += (m1.conjugate().cwiseProduct(t)).sum();
    }
    return acc;
  }
  const Matrix<T>& g = env.left();  // split layout
  T acc(0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip)
      for (Eigen::Index j = 0; j < d; ++j) {
        const T c = conj_of(m1(i, j));
        if (c == T(0)) continue;
        for (Eigen::Index jp = 0; jp < d; ++jp) acc += c * g(i * d + ip, j * d + jp) * m2(ip, jp);
      }
  return acc;
}

template <typename T>
ErrorMeasure measure_error(const BondEnvironment<T>& env, const Matrix<T>& coeff) {
  const Eigen::Index d = env.dim();
  LOOPCUT_REQUIRE(coeff.rows() == d && coeff.cols() == d, "bond coefficient must be D x D");
  const Matrix<T> x = Matrix<T>::Identity(d, d) - coeff;
  ErrorMeasure e;
  e.absolute = std::max(0.0, std::real(coefficient_overlap(env, x, x)));
  const double norm = env.norm_target();
  e.relative = norm > 0 ? e.absolute / norm : 0.0;
  return e;
}

template <typename T>
double fidelity_mismatch(const BondEnvironment<T>& env, const Matrix<T>& m1, const Matrix<T>& m2) {
  const double n1 = std::real(coefficient_overlap(env, m1, m1));
  const double n2 = std::real(coefficient_overlap(env, m2, m2));
  const double o = std::norm(coefficient_overlap(env, m1, m2));
  if (n1 <= 0 || n2 <= 0) throw NumericalError("fidelity of a zero state");
  return std::max(0.0, 1.0 - o / (n1 * n2));
}

#define LOOPCUT_INSTANTIATE(T)                                                                                 \
  template class BondEnvironment<T>;                                                                           \
  template MetricNetwork<T> make_double_layer<T>(const std::vector<Tensor<T>>&, const std::vector<NetworkLink>&, \
                                                 const Stub&, const Stub&);                                     \
  template BondEnvironment<T> build_metric<T>(const MetricNetwork<T>&);                                        \
  template Matrix<T> diag_metric<T>(const BondEnvironment<T>&);                                                \
  template EatSplit<T> eat_split<T>(const BondEnvironment<T>&);                                                \
  template double loopiness<T>(const BondEnvironment<T>&);                                                     \
  template T coefficient_overlap<T>(const BondEnvironment<T>&, const Matrix<T>&, const Matrix<T>&);            \
  template ErrorMeasure measure_error<T>(const BondEnvironment<T>&, const Matrix<T>&);                         \
  template double fidelity_mismatch<T>(const BondEnvironment<T>&, const Matrix<T>&, const Matrix<T>&);

LOOPCUT_INSTANTIATE(double)
LOOPCUT_INSTANTIATE(cplx)

}  // namespace loopcut
