#include "loopcut/pmps.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace loopcut {

Eigen::Index left_dim(const Site& s) { return s.front().rows(); }
Eigen::Index right_dim(const Site& s) { return s.front().cols(); }

Matrix<double> transfer(const Site& ket, const Site& bra) {
  LOOPCUT_REQUIRE(!ket.empty() && ket.size() == bra.size(), "transfer needs matching physical dimensions");
  const Eigen::Index dl = left_dim(ket), dr = right_dim(ket), el = left_dim(bra), er = right_dim(bra);
  const auto np = static_cast<Eigen::Index>(ket.size());
  Matrix<double> xm(dl * dr, np), ym(el * er, np);
  for (Eigen::Index p = 0; p < np; ++p) {
    xm.col(p) = Eigen::Map<const Vector<double>>(ket[p].data(), dl * dr);
    ym.col(p) = Eigen::Map<const Vector<double>>(bra[p].data(), el * er);
  }
  const Matrix<double> c = xm * ym.transpose();  // (l + r dl) x (l' + r' el)
  Matrix<double> e(dl * el, dr * er);
  for (Eigen::Index rp = 0; rp < er; ++rp)
    for (Eigen::Index lp = 0; lp < el; ++lp)
      for (Eigen::Index r = 0; r < dr; ++r)
        for (Eigen::Index l = 0; l < dl; ++l) e(l * el + lp, r * er + rp) = c(l + r * dl, lp + rp * el);
  return e;
}

namespace {

Matrix<double> ring_product(const std::vector<Matrix<double>>& e, std::size_t start, std::size_t count) {
  const std::size_t n = e.size();
  Matrix<double> m = e[start % n];
  for (std::size_t t = 1; t < count; ++t) m = m * e[(start + t) % n];
  return m;
}

Vector<double> dominant_vector(const Matrix<double>& m, const Vector<double>& previous) {
  Eigen::EigenSolver<Matrix<double>> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("transfer eigendecomposition failed");
  const Vector<cplx> vals = es.eigenvalues();
  const double top = vals.cwiseAbs().maxCoeff();
  if (!(top > 0)) throw NumericalError("zero transfer operator");
  Eigen::Index best = -1;
  double best_overlap = -1;
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (std::abs(vals(k)) < (1 - 1e-10) * top) continue;
    Vector<cplx> v = es.eigenvectors().col(k);
    const double ov = std::abs(v.dot(previous.cast<cplx>())) / v.norm();
    if (ov > best_overlap) best_overlap = ov, best = k;
  }
  Vector<cplx> v = es.eigenvectors().col(best);
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::abs(v(imax)) / v(imax);
  return v.real();
}

Matrix<double> pair_matrix(const Vector<double>& v, Eigen::Index d) {
  Matrix<double> r(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) r(i, j) = v(i * d + j);
  r = 0.5 * (r + r.transpose()).eval();
  if (r.trace() < 0) r = -r;
  return r;
}

// R = X X^T with the round-off negative and null directions removed.
Matrix<double> psd_factor(const Matrix<double>& r) {
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(r);
  const Vector<double> w = es.eigenvalues();
  const double floor = 1e-14 * w.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w(k) > floor) keep.push_back(k);
  Matrix<double> x(r.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    x.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(w(keep[c]));
  return x;
}

Vector<double> identity_vector(Eigen::Index d) {
  Vector<double> v = Vector<double>::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = 1;
  return v;
}

}  // namespace

double ring_overlap(const std::vector<Site>& ket, const std::vector<Site>& bra) {
  LOOPCUT_REQUIRE(!ket.empty() && ket.size() == bra.size(), "ring overlap needs rings of equal length");
  Matrix<double> m = transfer(ket[0], bra[0]);
  for (std::size_t k = 1; k < ket.size(); ++k) m = m * transfer(ket[k], bra[k]);
  return m.trace();
}

Site merge_sites(const Site& a, const Site& b) {
  LOOPCUT_REQUIRE(right_dim(a) == left_dim(b), "merged sites must share a bond");
  Site out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return out;
}

std::vector<Site> ring_sites(const PeriodicMPS& m) {
  if (!m.vidal()) return m.sites;
  std::vector<Site> out = m.sites;
  for (std::size_t k = 0; k < out.size(); ++k)
    for (auto& g : out[k]) g = g * m.bonds[k].asDiagonal();
  return out;
}

double probe_value(const PeriodicMPS& m, const std::vector<Vector<double>>& probes) {
  const auto sites = ring_sites(m);
  LOOPCUT_REQUIRE(probes.size() == sites.size(), "one probe per site required");
  Matrix<double> acc;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    LOOPCUT_REQUIRE(static_cast<std::size_t>(probes[k].size()) == sites[k].size(), "probe dimension mismatch");
    Matrix<double> s = Matrix<double>::Zero(left_dim(sites[k]), right_dim(sites[k]));
    for (std::size_t p = 0; p < sites[k].size(); ++p) s += probes[k](static_cast<Eigen::Index>(p)) * sites[k][p];
    acc = k == 0 ? s : Matrix<double>(acc * s);
  }
  return std::exp(m.log_scale) * acc.trace();
}

double vidal_residual(const PeriodicMPS& m) {
  LOOPCUT_REQUIRE(m.vidal(), "chain is not in Vidal form");
  const std::size_t n = m.size();
  double worst = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector<double>& lr = m.bonds[k];
    const Vector<double>& ll = m.bonds[(k + n - 1) % n];
    const Eigen::Index dl = left_dim(m.sites[k]), dr = right_dim(m.sites[k]);
    Matrix<double> right = Matrix<double>::Zero(dl, dl), left = Matrix<double>::Zero(dr, dr);
    for (const auto& g : m.sites[k]) {
      const Matrix<double> theta = ll.asDiagonal() * g * lr.asDiagonal();
      right += theta * theta.transpose();
      left += theta.transpose() * theta;
    }
    right.diagonal() -= ll.cwiseAbs2();
    left.diagonal() -= lr.cwiseAbs2();
    worst = std::max({worst, right.cwiseAbs().maxCoeff(), left.cwiseAbs().maxCoeff()});
  }
  return worst;
}

PeriodicMPS vidal_gauge(const PeriodicMPS& in, const VidalOptions& opts) {
  LOOPCUT_REQUIRE(in.size() >= 1, "empty chain");
  std::vector<Site> a = ring_sites(in);
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k)
    LOOPCUT_REQUIRE(right_dim(a[k]) == left_dim(a[(k + 1) % n]), "adjacent bond dimensions differ");
  double log_scale = in.log_scale;
  std::vector<Vector<double>> prev_r(n), prev_l(n);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    std::vector<Matrix<double>> e(n);
    for (std::size_t k = 0; k < n; ++k) e[k] = transfer(a[k], a[k]);
    std::vector<Matrix<double>> p(n), q(n);
    std::vector<Vector<double>> lam(n);
    for (std::size_t b = 0; b < n; ++b) {
      const Eigen::Index d = right_dim(a[b]);
      const Matrix<double> m = ring_product(e, b + 1, n);
      if (prev_r[b].size() != d * d) prev_r[b] = identity_vector(d);
      if (prev_l[b].size() != d * d) prev_l[b] = identity_vector(d);
      prev_r[b] = dominant_vector(m, prev_r[b]);
      prev_l[b] = dominant_vector(m.transpose(), prev_l[b]);
      const Matrix<double> x = psd_factor(pair_matrix(prev_r[b], d));
      const Matrix<double> y = psd_factor(pair_matrix(prev_l[b], d)).transpose();
      Eigen::BDCSVD<Matrix<double>> sv(y * x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector<double> s = sv.singularValues();
      Eigen::Index keep = 0;
      while (keep < s.size() && s(keep) > opts.drop * s(0)) ++keep;
      if (keep == 0) throw NumericalError("zero transfer operator");
      const Vector<double> sk = s.head(keep);
      p[b] = x * sv.matrixV().leftCols(keep) * sk.cwiseInverse().asDiagonal();
      q[b] = sk.cwiseInverse().asDiagonal() * sv.matrixU().leftCols(keep).transpose() * y;
      const double kappa = sk.norm();
      lam[b] = sk / kappa;
      log_scale += std::log(kappa);
    }
    PeriodicMPS out;
    out.bonds = lam;
    out.sites.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Matrix<double>& ql = q[(k + n - 1) % n];
      Site g;
      for (const auto& x : a[k]) g.push_back(ql * x * p[k]);
      Matrix<double> right = Matrix<double>::Zero(ql.rows(), ql.rows());
      for (const auto& x : g) right += x * lam[k].cwiseAbs2().asDiagonal() * x.transpose();
      const double c = right.trace() / static_cast<double>(right.rows());
      for (auto& x : g) x /= std::sqrt(c);
      log_scale += 0.5 * std::log(c);
      out.sites[k] = std::move(g);
    }
    out.log_scale = log_scale;
    out.gauge_residual = vidal_residual(out);
    if (out.gauge_residual <= opts.tol) return out;
    a = ring_sites(out);
    log_scale = out.log_scale;
  }
  throw NumericalError("Vidal gauge did not converge");
}

SplitChain split_sites(const PeriodicMPS& m, const std::vector<std::size_t>& p1_dims) {
  LOOPCUT_REQUIRE(m.vidal(), "split_sites needs a chain in Vidal form");
  const std::size_t n = m.size();
  LOOPCUT_REQUIRE(p1_dims.size() == n, "one physical split per site required");
  const double scale = std::exp(m.log_scale / static_cast<double>(2 * n));
  SplitChain out;
  for (std::size_t k = 0; k < n; ++k) {
    const Site& g = m.sites[k];
    const std::size_t p1_dim = p1_dims[k];
    LOOPCUT_REQUIRE(p1_dim >= 1 && g.size() % p1_dim == 0, "physical split does not divide the site dimension");
    const auto p1 = static_cast<Eigen::Index>(p1_dim);
    const auto p2 = static_cast<Eigen::Index>(g.size() / p1_dim);
    const Vector<double>& ll = m.bonds[(k + n - 1) % n];
    const Vector<double>& lr = m.bonds[k];
    const Eigen::Index dl = left_dim(g), dr = right_dim(g);
    Matrix<double> mm(dl * p1, p2 * dr);
    for (Eigen::Index q1 = 0; q1 < p1; ++q1)
      for (Eigen::Index q2 = 0; q2 < p2; ++q2) {
        const Matrix<double> blk = ll.asDiagonal() * g[static_cast<std::size_t>(q1 * p2 + q2)] * lr.asDiagonal();
        for (Eigen::Index a = 0; a < dl; ++a)
          for (Eigen::Index b = 0; b < dr; ++b) mm(a * p1 + q1, q2 * dr + b) = blk(a, b);
      }
    Eigen::BDCSVD<Matrix<double>> sv(mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector<double> s = sv.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > 1e-14 * s(0)) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    const Vector<double> rs = s.head(keep).cwiseSqrt();
    const Matrix<double> u = sv.matrixU().leftCols(keep) * rs.asDiagonal();
    const Matrix<double> vt = rs.asDiagonal() * sv.matrixV().leftCols(keep).transpose();
    const Vector<double> il = ll.cwiseSqrt().cwiseInverse() * scale, ir = lr.cwiseSqrt().cwiseInverse() * scale;
    Site h1(static_cast<std::size_t>(p1), Matrix<double>(dl, keep));
    Site h2(static_cast<std::size_t>(p2), Matrix<double>(keep, dr));
    for (Eigen::Index q1 = 0; q1 < p1; ++q1)
      for (Eigen::Index a = 0; a < dl; ++a) h1[static_cast<std::size_t>(q1)].row(a) = il(a) * u.row(a * p1 + q1);
    for (Eigen::Index q2 = 0; q2 < p2; ++q2)
      h2[static_cast<std::size_t>(q2)] = vt.middleCols(q2 * dr, dr) * ir.asDiagonal();
    out.sites.push_back(std::move(h1));
    out.sites.push_back(std::move(h2));
    out.spectra.push_back(s.head(keep));
  }
  return out;
}

std::vector<Site> pair_ring(const std::vector<Site>& chain) {
  LOOPCUT_REQUIRE(chain.size() % 2 == 0 && !chain.empty(), "chain length must be even");
  std::vector<Site> out;
  for (std::size_t k = 0; k + 1 < chain.size(); k += 2) out.push_back(merge_sites(chain[k], chain[k + 1]));
  return out;
}

BondEnvironment<double> bond_metric_pmps(const std::vector<Site>& chain, std::size_t k) {
  const std::size_t n = chain.size() / 2;
  LOOPCUT_REQUIRE(chain.size() % 2 == 0 && k < n, "bond index out of range");
  const Site& h1 = chain[2 * k];
  const Site& h2 = chain[2 * k + 1];
  const Eigen::Index d = right_dim(h1);
  Matrix<double> o;
  if (n == 1) {
    o = Matrix<double>::Identity(right_dim(h2) * right_dim(h2), right_dim(h2) * right_dim(h2));
  } else {
    std::vector<Matrix<double>> e(n);
    for (std::size_t t = 1; t < n; ++t) {
      const std::size_t m = (k + t) % n;
      const Site w = merge_sites(chain[2 * m], chain[2 * m + 1]);
      e[m] = transfer(w, w);
    }
    o = e[(k + 1) % n];
    for (std::size_t t = 2; t < n; ++t) o = o * e[(k + t) % n];
  }
  Matrix<double> left = transfer(h1, h1).transpose() * o.transpose();
  Matrix<double> right = transfer(h2, h2).transpose();
  return BondEnvironment<double>::from_factors(std::move(left), std::move(right), d);
}

void absorb_bond(std::vector<Site>& chain, std::size_t k, const Matrix<double>& a, const Matrix<double>& b) {
  LOOPCUT_REQUIRE(2 * k + 1 < chain.size(), "bond index out of range");
  for (auto& x : chain[2 * k]) x = x * a;
  for (auto& x : chain[2 * k + 1]) x = b.transpose() * x;
}

ChainCost chain_cost(const std::vector<Site>& target, const std::vector<Site>& chain) {
  const auto v = pair_ring(chain);
  const double tt = ring_overlap(target, target);
  const double tv = ring_overlap(target, v);
  const double vv = ring_overlap(v, v);
  ChainCost c;
  c.absolute = std::max(0.0, tt - 2 * tv + vv);
  c.relative = c.absolute / tt;
  return c;
}

namespace {

Matrix<double> pinv_psd(const Matrix<double>& n, double rcond) {
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(0.5 * (n + n.transpose()));
  const Vector<double> w = es.eigenvalues();
  const double top = w.cwiseAbs().maxCoeff();
  Vector<double> inv = Vector<double>::Zero(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w(k) > rcond * top) inv(k) = 1.0 / w(k);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

struct LocalSolve {
  double vv = 0;
  double tv = 0;
};

// Optimal first half of pair k; o_vv / o_tv are the rest of the ring from
// the pair's right bond around to its left bond.
LocalSolve solve_first(Site& h1, const Site& h2, const Site& w, const Matrix<double>& o_vv, const Matrix<double>& o_tv,
                       double rcond) {
  const Eigen::Index da = left_dim(h1), d = right_dim(h1), db = right_dim(h2);
  const Eigen::Index dtl = left_dim(w), dtr = right_dim(w);
  const auto p1 = static_cast<Eigen::Index>(h1.size()), p2 = static_cast<Eigen::Index>(h2.size());
  // N[(a,i),(a',i')] from Eh2[(i,i'),(b,b')] o_vv[(b,b'),(a,a')].
  const Matrix<double> nt = transfer(h2, h2) * o_vv;  // (i,i') x (a,a')
  Matrix<double> nmat(da * d, da * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip)
      for (Eigen::Index a = 0; a < da; ++a)
        for (Eigen::Index ap = 0; ap < da; ++ap) nmat(a * d + i, ap * d + ip) = nt(i * d + ip, a * da + ap);
  Matrix<double> y = Matrix<double>::Zero(da * d, p1);
  for (Eigen::Index q2 = 0; q2 < p2; ++q2) {
    // f[(rt,i),(lt,a)] = sum_b h2(i,b) o_tv[(rt,b),(lt,a)]
    Matrix<double> f(dtr * d, dtl * da);
    for (Eigen::Index rt = 0; rt < dtr; ++rt)
      f.middleRows(rt * d, d) = h2[static_cast<std::size_t>(q2)] * o_tv.middleRows(rt * db, db);
    for (Eigen::Index q1 = 0; q1 < p1; ++q1) {
      const Matrix<double>& wm = w[static_cast<std::size_t>(q1 * p2 + q2)];
      Matrix<double> acc = Matrix<double>::Zero(d, da);
      for (Eigen::Index rt = 0; rt < dtr; ++rt)
        for (Eigen::Index lt = 0; lt < dtl; ++lt) {
          const double c = wm(lt, rt);
          if (c != 0) acc += c * f.block(rt * d, lt * da, d, da);
        }
      y.col(q1) += Eigen::Map<const Vector<double>>(Matrix<double>(acc).data(), d * da);
    }
  }
  // acc is (i x a) column-major, i.e. index i + a d, the same as a*d + i.
  const Matrix<double> x = pinv_psd(nmat, rcond) * y;
  for (Eigen::Index q1 = 0; q1 < p1; ++q1)
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index i = 0; i < d; ++i) h1[static_cast<std::size_t>(q1)](a, i) = x(a * d + i, q1);
  LocalSolve r;
  r.vv = (x.transpose() * nmat * x).trace();
  r.tv = (x.transpose() * y).trace();
  return r;
}

LocalSolve solve_second(const Site& h1, Site& h2, const Site& w, const Matrix<double>& o_vv,
                        const Matrix<double>& o_tv, double rcond) {
  const Eigen::Index da = left_dim(h1), d = right_dim(h1), db = right_dim(h2);
  const Eigen::Index dtl = left_dim(w), dtr = right_dim(w);
  const auto p1 = static_cast<Eigen::Index>(h1.size()), p2 = static_cast<Eigen::Index>(h2.size());
  const Matrix<double> nt = o_vv * transfer(h1, h1);  // (b,b') x (i,i')
  Matrix<double> nmat(d * db, d * db);
  for (Eigen::Index b = 0; b < db; ++b)
    for (Eigen::Index bp = 0; bp < db; ++bp)
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index ip = 0; ip < d; ++ip) nmat(i * db + b, ip * db + bp) = nt(b * db + bp, i * d + ip);
  Matrix<double> y = Matrix<double>::Zero(d * db, p2);
  for (Eigen::Index q1 = 0; q1 < p1; ++q1) {
    // g[(rt,b),(lt,i)] = sum_a o_tv[(rt,b),(lt,a)] h1(a,i)
    Matrix<double> g(dtr * db, dtl * d);
    for (Eigen::Index lt = 0; lt < dtl; ++lt)
      g.middleCols(lt * d, d) = o_tv.middleCols(lt * da, da) * h1[static_cast<std::size_t>(q1)];
    for (Eigen::Index q2 = 0; q2 < p2; ++q2) {
      const Matrix<double>& wm = w[static_cast<std::size_t>(q1 * p2 + q2)];
      Matrix<double> acc = Matrix<double>::Zero(db, d);
      for (Eigen::Index rt = 0; rt < dtr; ++rt)
        for (Eigen::Index lt = 0; lt < dtl; ++lt) {
          const double c = wm(lt, rt);
          if (c != 0) acc += c * g.block(rt * db, lt * d, db, d);
        }
      y.col(q2) += Eigen::Map<const Vector<double>>(Matrix<double>(acc).data(), db * d);
    }
  }
  // acc is (b x i) column-major: index b + i db.
  const Matrix<double> x = pinv_psd(nmat, rcond) * y;
  for (Eigen::Index q2 = 0; q2 < p2; ++q2)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index b = 0; b < db; ++b) h2[static_cast<std::size_t>(q2)](i, b) = x(i * db + b, q2);
  LocalSolve r;
  r.vv = (x.transpose() * nmat * x).trace();
  r.tv = (x.transpose() * y).trace();
  return r;
}

}  // namespace

AlsResult als_optimize(const std::vector<Site>& target, const std::vector<Site>& chain, const AlsOptions& opts) {
  const std::size_t n = target.size();
  LOOPCUT_REQUIRE(chain.size() == 2 * n && n >= 2, "ALS needs a target ring and a chain twice as long");
  AlsResult res;
  res.chain = chain;
  const double tt = ring_overlap(target, target);
  double cost = chain_cost(target, chain).relative;
  res.cost_trace.push_back(cost);
  if (cost <= 1e-14) return res;

  std::vector<Site> pairs = pair_ring(res.chain);
  std::vector<Matrix<double>> evv(n), etv(n);
  for (std::size_t m = 0; m < n; ++m) {
    evv[m] = transfer(pairs[m], pairs[m]);
    etv[m] = transfer(target[m], pairs[m]);
  }
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double start = cost;
    for (std::size_t k = 0; k < n; ++k) {
      const Matrix<double> o_vv = ring_product(evv, k + 1, n - 1);
      const Matrix<double> o_tv = ring_product(etv, k + 1, n - 1);
      Site& h1 = res.chain[2 * k];
      Site& h2 = res.chain[2 * k + 1];
      auto r1 = solve_first(h1, h2, target[k], o_vv, o_tv, opts.rcond);
      res.cost_trace.push_back(std::max(0.0, tt - 2 * r1.tv + r1.vv) / tt);
      auto r2 = solve_second(h1, h2, target[k], o_vv, o_tv, opts.rcond);
      cost = std::max(0.0, tt - 2 * r2.tv + r2.vv) / tt;
      res.cost_trace.push_back(cost);
      const Site w = merge_sites(h1, h2);
      evv[k] = transfer(w, w);
      etv[k] = transfer(target[k], w);
    }
    res.sweeps = sweep + 1;
    if (cost <= 1e-14 || std::abs(start - cost) < opts.tol * std::max(cost, 1e-300)) break;
  }
  return res;
}

}  // namespace loopcut
