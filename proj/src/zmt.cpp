#include "loopcut/zmt.hpp"

#include <Eigen/LU>

#include <random>

#include "loopcut/eat_gauge.hpp"

namespace loopcut {

const char* subspace_name(Subspace s) {
  switch (s) {
    case Subspace::Diagonal: return "diagonal";
    case Subspace::Hermitian: return "hermitian";
    case Subspace::RealSymmetric: return "real-symmetric";
    case Subspace::Full: return "full";
    case Subspace::Product: return "product";
  }
  return "?";
}

std::optional<Subspace> parse_subspace(const std::string& name) {
  for (Subspace s : {Subspace::Diagonal, Subspace::Hermitian, Subspace::RealSymmetric, Subspace::Full, Subspace::Product})
    if (name == subspace_name(s)) return s;
  return std::nullopt;
}

const char* scheme_name(ZmtScheme s) {
  switch (s) {
    case ZmtScheme::Linear: return "linear";
    case ZmtScheme::General: return "general";
    case ZmtScheme::Switched: return "switched";
    case ZmtScheme::Product: return "product";
  }
  return "?";
}

namespace {

constexpr double kLeadFloor = 1e-14;

Eigen::Index pool_size(Eigen::Index requested, Eigen::Index dim, Eigen::Index modes) {
  const Eigen::Index k = requested > 0 ? requested : std::min<Eigen::Index>(dim, 8);
  return std::max<Eigen::Index>(1, std::min(k, modes));
}

template <typename T>
Matrix<T> from_cplx(const Matrix<cplx>& m) {
  if constexpr (is_complex_v<T>)
    return m;
  else
    return m.real();
}

template <typename T>
Matrix<T> reshape_rows(const Vector<T>& v, Eigen::Index d) {
  Matrix<T> z(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = v(i * d + j);
  return z;
}

template <typename T>
Vector<T> flatten_rows(const Matrix<T>& z) {
  const Eigen::Index d = z.rows();
  Vector<T> v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = z(i, j);
  return v;
}

// Eigen data of Z and choice of E_D; false when the candidate must be skipped.
template <typename T>
bool fill_eigen(ZeroModeCandidate<T>& c, bool real_lead, bool reject_defective = true) {
  const Eigen::Index d = c.z_matrix.rows();
  if (c.subspace == Subspace::Diagonal) {
    c.e_values = c.z_matrix.diagonal().template cast<cplx>();
    c.s_vectors = Matrix<cplx>::Identity(d, d);
    c.cond_vectors = 1.0;
  } else {
    GeneralEig e = eig_general<T>(c.z_matrix);
    if (e.near_defective && reject_defective) return false;
    c.e_values = e.values;
    c.s_vectors = e.vectors;
    c.cond_vectors = e.cond_vectors;
  }
  const double top = c.e_values.cwiseAbs().maxCoeff();
  Eigen::Index best = -1;
  for (Eigen::Index k = 0; k < d; ++k) {
    const cplx e = c.e_values(k);
    if (real_lead && std::abs(e.imag()) > 1e-10 * top) continue;
    if (best < 0 || std::abs(e) > std::abs(c.e_values(best))) best = k;
  }
  if (best < 0 || std::abs(c.e_values(best)) <= kLeadFloor) return false;
  if (real_lead) c.e_values(best) = cplx(c.e_values(best).real(), 0.0);
  c.lead = best;
  c.e_lead = c.e_values(best);
  c.f_pred = c.n_value / std::norm(c.e_lead);
  return true;
}

struct BasisEntry {
  Eigen::Index i, j;
  cplx coef;
};

// Real orthonormal basis of the Hermitian or real-symmetric matrix space.
std::vector<std::vector<BasisEntry>> subspace_basis(Eigen::Index d, bool hermitian) {
  std::vector<std::vector<BasisEntry>> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) basis.push_back({{i, i, cplx(1, 0)}});
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      basis.push_back({{i, j, cplx(r, 0)}, {j, i, cplx(r, 0)}});
      if (hermitian) basis.push_back({{i, j, cplx(0, r)}, {j, i, cplx(0, -r)}});
    }
  return basis;
}

template <typename T>
struct ModePool {
  std::vector<Matrix<T>> z;
  std::vector<double> n;
};

template <typename T>
ModePool<T> lowest_modes(const BondEnvironment<T>& env, Subspace subspace, Eigen::Index requested) {
  const Eigen::Index d = env.dim();
  ModePool<T> pool;
  const Matrix<T> g = env.split_matrix();
  auto entry = [&](Eigen::Index i, Eigen::Index j, Eigen::Index ip, Eigen::Index jp) { return g(i * d + ip, j * d + jp); };
  if (subspace == Subspace::Full) {
    auto e = eig_hermitian<T>(env.full());
    const Eigen::Index k = pool_size(requested, d, d * d);
    for (Eigen::Index m = 0; m < k; ++m) {
      pool.z.push_back(reshape_rows<T>(e.vectors.col(m), d));
      pool.n.push_back(std::max(0.0, e.values(m)));
    }
    return pool;
  }
  const bool hermitian = subspace == Subspace::Hermitian && is_complex_v<T>;
  const auto basis = subspace_basis(d, hermitian);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  Matrix<double> gc(m, m);
  for (Eigen::Index p = 0; p < m; ++p)
    for (Eigen::Index q = p; q < m; ++q) {
      cplx acc(0, 0);
      for (const auto& e : basis[p])
        for (const auto& f : basis[q]) acc += std::conj(e.coef) * f.coef * cplx(entry(e.i, e.j, f.i, f.j));
      gc(p, q) = gc(q, p) = acc.real();
    }
  auto e = eig_hermitian<double>(gc);
  const Eigen::Index k = pool_size(requested, d, m);
  for (Eigen::Index mode = 0; mode < k; ++mode) {
    Matrix<cplx> z = Matrix<cplx>::Zero(d, d);
    for (Eigen::Index p = 0; p < m; ++p)
      for (const auto& b : basis[p]) z(b.i, b.j) += e.vectors(p, mode) * b.coef;
    pool.z.push_back(from_cplx<T>(z));
    pool.n.push_back(std::max(0.0, e.values(mode)));
  }
  return pool;
}

template <typename T>
ZeroModeCandidate<T> best_of_pool(const ModePool<T>& pool, Subspace subspace, bool real_lead) {
  ZeroModeCandidate<T> best;
  bool found = false;
  for (std::size_t m = 0; m < pool.z.size(); ++m) {
    ZeroModeCandidate<T> c;
    c.z_matrix = pool.z[m];
    c.n_value = pool.n[m];
    c.subspace = subspace;
    c.eigen_index = static_cast<Eigen::Index>(m);
    if (!fill_eigen(c, real_lead)) continue;
    if (!found || c.f_pred < best.f_pred * (1 - 1e-12)) {
      best = std::move(c);
      found = true;
    }
  }
  if (!found) throw NumericalError(std::string("no admissible zero-mode candidate in the ") + subspace_name(subspace) + " subspace");
  return best;
}

// Elimination of the lead index: a(i,k) = c_i on kept i, b selects the kept columns.
template <typename T>
std::pair<Matrix<T>, Matrix<T>> linear_factors(const ZeroModeCandidate<T>& c) {
  const Eigen::Index d = c.z_matrix.rows();
  Matrix<T> a = Matrix<T>::Zero(d, d - 1), b = Matrix<T>::Zero(d, d - 1);
  const T zd = c.z_matrix(c.lead, c.lead);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i == c.lead) continue;
    a(i, k) = T(1) - c.z_matrix(i, i) / zd;
    b(i, k) = T(1);
    ++k;
  }
  return {a, b};
}

template <typename T>
TruncationStep<T> make_step(const std::string& scheme, const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c,
                            Matrix<T> a, Matrix<T> b) {
  TruncationStep<T> s;
  s.scheme = scheme;
  s.dim_before = env.dim();
  s.dim_after = a.cols();
  const ErrorMeasure e = measure_error<T>(env, a * b.transpose());
  s.left_absorb = std::move(a);
  s.right_absorb = std::move(b);
  s.f_pred = c.f_pred;
  s.f_measured = e.absolute;
  const double norm = env.norm_target();
  s.f_pred_rel = norm > 0 ? c.f_pred / norm : 0.0;
  s.f_measured_rel = e.relative;
  s.n_value = c.n_value;
  s.e_lead = c.e_lead;
  return s;
}

template <typename T>
Matrix<cplx> inverse_vectors(const ZeroModeCandidate<T>& c) {
  return Eigen::FullPivLU<Matrix<cplx>>(c.s_vectors).inverse();
}

// s_D = S_{:D} S^-1_{D:}, the spectral projector of E_D.
template <typename T>
Matrix<cplx> lead_projector(const ZeroModeCandidate<T>& c) {
  const Eigen::Index d = c.z_matrix.rows();
  if (c.subspace == Subspace::Diagonal) {
    Matrix<cplx> p = Matrix<cplx>::Zero(d, d);
    p(c.lead, c.lead) = 1.0;
    return p;
  }
  const Matrix<cplx> inv = inverse_vectors(c);
  return c.s_vectors.col(c.lead) * inv.row(c.lead);
}

template <typename T>
cplx overlap_c(const BondEnvironment<T>& env, const Matrix<cplx>& x, const Matrix<cplx>& y) {
  if constexpr (is_complex_v<T>) {
    return coefficient_overlap<cplx>(env, x, y);
  } else {
    const Matrix<double> xr = x.real(), xi = x.imag(), yr = y.real(), yi = y.imag();
    const double rr = coefficient_overlap<double>(env, xr, yr), ii = coefficient_overlap<double>(env, xi, yi);
    const double ri = coefficient_overlap<double>(env, xr, yi), ir = coefficient_overlap<double>(env, xi, yr);
    return cplx(rr + ii, ri - ir);
  }
}

// argmin over unit x of x^dag m x / |v^dag x|^2.
template <typename T>
Vector<T> rank_one_rayleigh(const Matrix<T>& m, const Vector<T>& v) {
  auto e = eig_hermitian<T>(hermitian_part(m));
  const double top = std::max(0.0, e.values.maxCoeff());
  const double cut = 1e-12 * top;
  Vector<T> proj = Vector<T>::Zero(v.size()), sol = Vector<T>::Zero(v.size());
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    const T coef = e.vectors.col(k).dot(v);
    if (e.values(k) <= cut)
      proj += coef * e.vectors.col(k);
    else
      sol += (coef / e.values(k)) * e.vectors.col(k);
  }
  Vector<T> x = proj.norm() > 1e-8 * v.norm() ? proj : sol;
  const double n = x.norm();
  if (!(n > 0)) throw NumericalError("product ansatz: degenerate update");
  return x / n;
}

}  // namespace

template <typename T>
ZeroModeCandidate<T> evaluate_mode(const BondEnvironment<T>& env, const Matrix<T>& z, Subspace subspace, bool real_lead) {
  const double norm = z.norm();
  LOOPCUT_REQUIRE(norm > 0, "zero mode must be nonzero");
  ZeroModeCandidate<T> c;
  c.z_matrix = z / norm;
  c.n_value = std::max(0.0, std::real(coefficient_overlap<T>(env, c.z_matrix, c.z_matrix)));
  c.subspace = subspace;
  if (!fill_eigen(c, real_lead || !is_complex_v<T>, false))
    throw NumericalError("zero mode has no admissible leading eigenvalue");
  return c;
}

template <typename T>
ZeroModeCandidate<T> select_linear_mode(const Matrix<T>& g_diag, Eigen::Index k_candidates) {
  const Eigen::Index d = g_diag.rows();
  auto e = eig_hermitian<T>(g_diag);
  ModePool<T> pool;
  const Eigen::Index k = pool_size(k_candidates, d, d);
  for (Eigen::Index m = 0; m < k; ++m) {
    pool.z.push_back(Matrix<T>(e.vectors.col(m).asDiagonal()));
    pool.n.push_back(std::max(0.0, e.values(m)));
  }
  return best_of_pool(pool, Subspace::Diagonal, false);
}

template <typename T>
ZeroModeCandidate<T> select_mode(const BondEnvironment<T>& env, Subspace subspace, const ModeOptions& opts) {
  LOOPCUT_REQUIRE(subspace != Subspace::Product, "use product_mode for the product ansatz");
  if (subspace == Subspace::Diagonal) return select_linear_mode<T>(diag_metric(env), opts.k_candidates);
  const bool real_lead = opts.real_lead || !is_complex_v<T>;
  return best_of_pool(lowest_modes(env, subspace, opts.k_candidates), subspace, real_lead);
}

template <typename T>
TruncationStep<T> step_linear(const Matrix<T>& g_diag, const BondEnvironment<T>& env, Eigen::Index k_candidates) {
  LOOPCUT_REQUIRE(g_diag.rows() >= 2 && g_diag.rows() == env.dim(), "linear step needs D >= 2");
  const auto c = select_linear_mode<T>(g_diag, k_candidates);
  auto [a, b] = linear_factors(c);
  return make_step<T>("linear", env, c, std::move(a), std::move(b));
}

template <typename T>
TruncationStep<T> step_from_candidate(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c) {
  const Eigen::Index d = env.dim();
  LOOPCUT_REQUIRE(d >= 2, "truncation step needs D >= 2");
  const Matrix<cplx> mc = Matrix<cplx>::Identity(d, d) - c.z_matrix.template cast<cplx>() / c.e_lead;
  const auto dec = svd<T>(from_cplx<T>(mc));
  const Vector<T> root = dec.s.head(d - 1).cwiseSqrt().template cast<T>();
  Matrix<T> a = dec.u.leftCols(d - 1) * root.asDiagonal();
  Matrix<T> b = dec.vh.topRows(d - 1).transpose() * root.asDiagonal();
  return make_step<T>(std::string("general/") + subspace_name(c.subspace), env, c, std::move(a), std::move(b));
}

template <typename T>
TruncationStep<T> step_general(const BondEnvironment<T>& env, Subspace subspace, const ModeOptions& opts) {
  LOOPCUT_REQUIRE(env.dim() >= 2, "general step needs D >= 2");
  return step_from_candidate(env, select_mode(env, subspace, opts));
}

template <typename T>
ZeroModeCandidate<T> product_mode(const BondEnvironment<T>& env, const ProductOptions& opts) {
  const Eigen::Index d = env.dim();
  LOOPCUT_REQUIRE(d >= 2, "product step needs D >= 2");
  const Matrix<T> g = env.split_matrix();
  Vector<T> r, l;
  try {
    const auto full = select_mode(env, Subspace::Full, {});
    const auto dec = svd<T>(full.z_matrix);
    r = dec.u.col(0);
    l = dec.vh.row(0).transpose();
  } catch (const NumericalError&) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> n;
    r.resize(d);
    l.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      r(i) = T(n(rng));
      l(i) = T(n(rng));
    }
    r.normalize();
    l.normalize();
  }
  auto objective = [&](const Vector<T>& rr, const Vector<T>& ll) {
    const Matrix<T> z = rr * ll.transpose();
    const double nn = std::max(0.0, std::real(coefficient_overlap<T>(env, z, z)));
    const double e = std::norm(ll.cwiseProduct(rr).sum());
    return e > 0 ? nn / e : std::numeric_limits<double>::infinity();
  };
  std::vector<double> trace{objective(r, l)};
  Vector<T> best_r = r, best_l = l;
  for (int it = 0; it < opts.max_iters; ++it) {
    Vector<T> w(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index jp = 0; jp < d; ++jp) w(j * d + jp) = conj_of(l(j)) * l(jp);
    const Matrix<T> ml = reshape_rows<T>(g * w, d);
    r = rank_one_rayleigh<T>(ml, l.conjugate());
    Vector<T> u(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index ip = 0; ip < d; ++ip) u(i * d + ip) = conj_of(r(i)) * r(ip);
    const Matrix<T> mr = reshape_rows<T>(g.transpose() * u, d);
    l = rank_one_rayleigh<T>(mr, r.conjugate());
    const double f = objective(r, l);
    const double prev = trace.back();
    if (!(f < prev)) break;
    trace.push_back(f);
    best_r = r;
    best_l = l;
    if (prev - f <= opts.tol * prev) break;
  }
  const T e = best_l.cwiseProduct(best_r).sum();
  if (std::abs(e) <= kLeadFloor) throw NumericalError("product ansatz converged to a vanishing leading eigenvalue");
  ZeroModeCandidate<T> c;
  c.z_matrix = best_r * best_l.transpose();
  c.n_value = std::max(0.0, std::real(coefficient_overlap<T>(env, c.z_matrix, c.z_matrix)));
  c.subspace = Subspace::Product;
  c.e_lead = cplx(e);
  c.f_pred = c.n_value / std::norm(c.e_lead);
  c.objective_trace = std::move(trace);
  GeneralEig eg = eig_general<T>(c.z_matrix);
  c.e_values = eg.values;
  c.s_vectors = eg.vectors;
  c.cond_vectors = eg.cond_vectors;
  Eigen::Index lead = 0;
  eg.values.cwiseAbs().maxCoeff(&lead);
  c.lead = lead;
  return c;
}

template <typename T>
TruncationStep<T> step_product(const BondEnvironment<T>& env, const ProductOptions& opts) {
  auto step = step_from_candidate(env, product_mode(env, opts));
  step.scheme = "product";
  return step;
}

template <typename T>
Matrix<cplx> coefficient_at_w(const ZeroModeCandidate<T>& c, cplx w) {
  const Eigen::Index d = c.z_matrix.rows();
  Vector<cplx> coef(d);
  for (Eigen::Index k = 0; k < d; ++k) coef(k) = k == c.lead ? cplx(0) : 1.0 + w * c.e_values(k) / c.e_lead;
  if (c.subspace == Subspace::Diagonal) return coef.asDiagonal();
  return c.s_vectors * coef.asDiagonal() * inverse_vectors(c);
}

template <typename T>
Refinement refine_w(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c) {
  const Matrix<cplx> phi = lead_projector(c);
  const Matrix<cplx> z = c.z_matrix.template cast<cplx>();
  Refinement r;
  const double n = std::max(0.0, std::real(overlap_c(env, z, z)));
  r.a = 1.0 / std::norm(c.e_lead);
  r.c = std::real(overlap_c(env, phi, phi));
  const cplx kappa = overlap_c(env, phi, z) / c.e_lead;
  r.b = n > 0 ? std::conj(kappa) / n : (z.conjugate().cwiseProduct(phi)).sum() / std::conj(c.e_lead);
  r.f0 = n * r.a;
  const double alpha = n * r.a + r.c - 2.0 * kappa.real();
  const cplx gamma = r.c - kappa;
  if (!(std::abs(alpha) > 1e-14 * (n * r.a + r.c))) throw NumericalError("refine_w: vanishing curvature");
  r.w_min = -std::conj(gamma) / alpha;
  r.f_min = std::min(r.f0, r.c - std::norm(gamma) / alpha);
  return r;
}

template <typename T>
ImprovedMode<T> improve_mode(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c) {
  LOOPCUT_REQUIRE(c.cond_vectors <= kDefectiveCond, "improve_mode needs a diagonalizable zero mode");
  const Eigen::Index d = env.dim();
  const Matrix<cplx> z = c.z_matrix.template cast<cplx>();
  const Matrix<cplx> rhs = c.e_lead * lead_projector(c).adjoint() - std::norm(c.e_lead) * z;
  const Matrix<cplx> op = env.full().template cast<cplx>() - c.n_value * Matrix<cplx>::Identity(d * d, d * d);
  const Vector<cplx> b = flatten_rows<cplx>(rhs);
  Vector<cplx> eps = pinv<cplx>(op) * b;
  ImprovedMode<T> out;
  const double bn = b.norm();
  out.residual = bn > 0 ? (op * eps - b).norm() / bn : 0.0;
  if (out.residual > 1e-8) throw NumericalError("improve_mode: pseudoinverse solve residual too large");
  const Vector<cplx> zv = flatten_rows<cplx>(z);
  eps -= zv * zv.dot(eps);
  out.epsilon = from_cplx<T>(reshape_rows<cplx>(eps, d));
  const bool real_lead = std::abs(c.e_lead.imag()) == 0.0 && !is_complex_v<T>;
  out.mode = evaluate_mode<T>(env, Matrix<T>(c.z_matrix + c.f_pred * out.epsilon), c.subspace, real_lead);
  return out;
}

template <typename T>
ZmtTruncation<T> truncate_to(const BondEnvironment<T>& env, Eigen::Index target_dim, const ZmtOptions& opts) {
  const Eigen::Index d0 = env.dim();
  LOOPCUT_REQUIRE(target_dim >= 1, "target bond dimension must be at least 1");
  LOOPCUT_REQUIRE(target_dim <= d0, "target bond dimension exceeds the bond dimension");
  ZmtTruncation<T> out;
  const double norm0 = env.norm_target();
  Matrix<T> total_a = Matrix<T>::Identity(d0, d0), total_b = total_a;
  BondEnvironment<T> cur = env;
  if (opts.eat_gauge_init) {
    const auto pair = eat_gauge_fix(env);
    total_a = pair.left_absorb();
    total_b = pair.right_absorb();
    cur = env.congruence(total_a, total_b);
  }
  // Linear steps only touch the diagonal metric; the full metric catches up lazily.
  Matrix<T> pend_a = Matrix<T>::Identity(d0, d0), pend_b = pend_a;
  bool pending = false;
  Matrix<T> gd = diag_metric(cur);
  Eigen::Index dim = d0;
  bool linear_phase = opts.scheme == ZmtScheme::Linear || opts.scheme == ZmtScheme::Switched;
  auto materialize = [&] {
    if (!pending) return;
    cur = cur.congruence(pend_a, pend_b);
    pend_a = Matrix<T>::Identity(dim, dim);
    pend_b = pend_a;
    pending = false;
  };
  const ModeOptions mode_opts{opts.k_candidates, opts.real_lead};
  while (dim > target_dim) {
    bool take_linear = linear_phase;
    ZeroModeCandidate<T> lin;
    if (take_linear || (opts.general_dim_cap > 0 && dim > opts.general_dim_cap)) {
      lin = select_linear_mode<T>(gd, opts.k_candidates);
      if (opts.scheme == ZmtScheme::Switched && linear_phase && !(lin.f_pred / norm0 < opts.switch_threshold)) {
        linear_phase = false;
        take_linear = false;
      }
      if (opts.general_dim_cap > 0 && dim > opts.general_dim_cap) take_linear = true;
    }
    TruncationStep<T> step;
    if (take_linear) {
      auto [a, b] = linear_factors(lin);
      step.scheme = "linear";
      step.dim_before = dim;
      step.dim_after = dim - 1;
      const Vector<T> m = (a * b.transpose()).diagonal();
      const Vector<T> x = Vector<T>::Ones(dim) - m;
      step.f_measured = std::max(0.0, std::real((x.adjoint() * gd * x)(0, 0)));
      step.f_pred = lin.f_pred;
      step.n_value = lin.n_value;
      step.e_lead = lin.e_lead;
      Matrix<T> next(dim - 1, dim - 1);
      for (Eigen::Index k = 0, p = 0; p < dim; ++p) {
        if (p == lin.lead) continue;
        for (Eigen::Index l = 0, q = 0; q < dim; ++q) {
          if (q == lin.lead) continue;
          next(k, l) = conj_of(a(p, k)) * gd(p, q) * a(q, l);
          ++l;
        }
        ++k;
      }
      gd = hermitian_part(next);
      pend_a = pend_a * a;
      pend_b = pend_b * b;
      pending = true;
      step.left_absorb = std::move(a);
      step.right_absorb = std::move(b);
    } else {
      materialize();
      if (out.switch_dim < 0) out.switch_dim = dim;
      if (opts.scheme == ZmtScheme::Product) {
        step = step_product(cur, opts.product);
      } else {
        step = step_from_candidate(cur, select_mode(cur, opts.subspace, mode_opts));
      }
      cur = cur.congruence(step.left_absorb, step.right_absorb);
      gd = diag_metric(cur);
      pend_a = Matrix<T>::Identity(dim - 1, dim - 1);
      pend_b = pend_a;
    }
    step.f_pred_rel = norm0 > 0 ? step.f_pred / norm0 : 0.0;
    step.f_measured_rel = norm0 > 0 ? step.f_measured / norm0 : 0.0;
    total_a = total_a * step.left_absorb;
    total_b = total_b * step.right_absorb;
    out.steps.push_back(std::move(step));
    --dim;
  }
  materialize();
  out.env = cur;
  out.left_absorb = total_a;
  out.right_absorb = total_b;
  out.error = measure_error<T>(env, total_a * total_b.transpose());
  return out;
}

template <typename T>
ZmtTruncation<T> truncate_to(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim,
                             const ZmtOptions& opts) {
  auto out = truncate_to(env, target_dim, opts);
  out.tensors = absorb_factors(tensors, out.left_absorb, out.right_absorb);
  return out;
}

#define LOOPCUT_INSTANTIATE(T)                                                                                       \
  template ZeroModeCandidate<T> select_mode<T>(const BondEnvironment<T>&, Subspace, const ModeOptions&);             \
  template ZeroModeCandidate<T> select_linear_mode<T>(const Matrix<T>&, Eigen::Index);                              \
  template TruncationStep<T> step_linear<T>(const Matrix<T>&, const BondEnvironment<T>&, Eigen::Index);             \
  template TruncationStep<T> step_general<T>(const BondEnvironment<T>&, Subspace, const ModeOptions&);              \
  template TruncationStep<T> step_from_candidate<T>(const BondEnvironment<T>&, const ZeroModeCandidate<T>&);        \
  template ZeroModeCandidate<T> product_mode<T>(const BondEnvironment<T>&, const ProductOptions&);                   \
  template TruncationStep<T> step_product<T>(const BondEnvironment<T>&, const ProductOptions&);                     \
  template Refinement refine_w<T>(const BondEnvironment<T>&, const ZeroModeCandidate<T>&);                          \
  template Matrix<cplx> coefficient_at_w<T>(const ZeroModeCandidate<T>&, cplx);                                     \
  template ImprovedMode<T> improve_mode<T>(const BondEnvironment<T>&, const ZeroModeCandidate<T>&);                 \
  template ZeroModeCandidate<T> evaluate_mode<T>(const BondEnvironment<T>&, const Matrix<T>&, Subspace, bool);      \
  template ZmtTruncation<T> truncate_to<T>(const BondEnvironment<T>&, Eigen::Index, const ZmtOptions&);             \
  template ZmtTruncation<T> truncate_to<T>(const BondEnvironment<T>&, const BondTensors<T>&, Eigen::Index,          \
                                           const ZmtOptions&);

LOOPCUT_INSTANTIATE(double)
LOOPCUT_INSTANTIATE(cplx)

}  // namespace loopcut
