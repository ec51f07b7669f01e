#include "loopcut/trg.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "loopcut/eat_gauge.hpp"
#include "loopcut/ising.hpp"
#include "loopcut/zmt.hpp"

namespace loopcut {

const char* trg_scheme_name(TrgScheme s) {
  switch (s) {
    case TrgScheme::Tebd: return "tebd";
    case TrgScheme::Eat: return "eat";
    case TrgScheme::Zmt1: return "zmt1";
    case TrgScheme::Zmt2: return "zmt2";
    case TrgScheme::Zmt3: return "zmt3";
  }
  return "?";
}

std::optional<TrgScheme> parse_trg_scheme(const std::string& name) {
  for (auto s : {TrgScheme::Tebd, TrgScheme::Eat, TrgScheme::Zmt1, TrgScheme::Zmt2, TrgScheme::Zmt3})
    if (name == trg_scheme_name(s)) return s;
  return std::nullopt;
}

namespace {

using Dims4 = std::array<std::size_t, 4>;

Dims4 dims4(const Tensor<double>& t) {
  LOOPCUT_REQUIRE(t.rank() == 4, "TRG tensors must have rank 4");
  return {t.dim("l"), t.dim("u"), t.dim("r"), t.dim("d")};
}

// Entry accessor on a (l,u,r,d)-ordered copy.
struct Lurd {
  Tensor<double> t;
  Dims4 n;
  explicit Lurd(const Tensor<double>& x) : t(x.permuted({"l", "u", "r", "d"})), n(dims4(x)) {}
  double operator()(std::size_t l, std::size_t u, std::size_t r, std::size_t d) const {
    return t.data()[((l * n[1] + u) * n[2] + r) * n[3] + d];
  }
};

// Leg order (vl, p1, p2, vr) given as indices into (l,u,r,d).
Site ring_site(const Lurd& x, const std::array<int, 4>& order) {
  const std::size_t dvl = x.n[order[0]], dp1 = x.n[order[1]], dp2 = x.n[order[2]], dvr = x.n[order[3]];
  Site s(dp1 * dp2, Matrix<double>(static_cast<Eigen::Index>(dvl), static_cast<Eigen::Index>(dvr)));
  std::array<std::size_t, 4> idx{};
  for (std::size_t a = 0; a < dvl; ++a)
    for (std::size_t p = 0; p < dp1; ++p)
      for (std::size_t q = 0; q < dp2; ++q)
        for (std::size_t b = 0; b < dvr; ++b) {
          idx[order[0]] = a;
          idx[order[1]] = p;
          idx[order[2]] = q;
          idx[order[3]] = b;
          s[p * dp2 + q](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = x(idx[0], idx[1], idx[2], idx[3]);
        }
  return s;
}

// T(a,b,c,d) = sum_{x,y} X[x,y](a,b) Y[y,x](c,d) with X[x,y] = s1[x] s2[y], Y[y,x] = s3[y] s4[x].
std::vector<double> corner_contract(const Site& s1, const Site& s2, const Site& s3, const Site& s4, Dims4& out_dims) {
  const auto nx = static_cast<Eigen::Index>(s1.size()), ny = static_cast<Eigen::Index>(s2.size());
  LOOPCUT_REQUIRE(static_cast<Eigen::Index>(s4.size()) == nx && static_cast<Eigen::Index>(s3.size()) == ny,
                  "coarse-graining physical legs do not match");
  const Eigen::Index da = left_dim(s1), db = right_dim(s2), dc = left_dim(s3), dd = right_dim(s4);
  Matrix<double> m1(da * db, nx * ny), m2(nx * ny, dc * dd);
  for (Eigen::Index x = 0; x < nx; ++x)
    for (Eigen::Index y = 0; y < ny; ++y) {
      const Matrix<double> xm = s1[static_cast<std::size_t>(x)] * s2[static_cast<std::size_t>(y)];
      const Matrix<double> ym = s3[static_cast<std::size_t>(y)] * s4[static_cast<std::size_t>(x)];
      for (Eigen::Index a = 0; a < da; ++a)
        for (Eigen::Index b = 0; b < db; ++b) m1(a * db + b, x * ny + y) = xm(a, b);
      for (Eigen::Index c = 0; c < dc; ++c)
        for (Eigen::Index d = 0; d < dd; ++d) m2(x * ny + y, c * dd + d) = ym(c, d);
    }
  const Matrix<double> t = m1 * m2;
  out_dims = {static_cast<std::size_t>(da), static_cast<std::size_t>(db), static_cast<std::size_t>(dc),
              static_cast<std::size_t>(dd)};
  std::vector<double> data(static_cast<std::size_t>(t.size()));
  for (Eigen::Index r = 0; r < da * db; ++r)
    for (Eigen::Index c = 0; c < dc * dd; ++c) data[static_cast<std::size_t>(r * dc * dd + c)] = t(r, c);
  return data;
}

double normalize_max(Tensor<double>& t) {
  double c = 0;
  for (double v : t.data()) c = std::max(c, std::abs(v));
  if (!(c > 0) || !std::isfinite(c)) throw NumericalError("coarse tensor vanished or overflowed");
  for (double& v : t.data()) v /= c;
  return std::log(c);
}

}  // namespace

TrgState trg_init(double beta) {
  TrgState s;
  Tensor<double> t = ising_tensor(beta);
  s.log_z_acc = normalize_max(t);
  s.a = t;
  s.b = t;
  return s;
}

std::vector<std::size_t> plaquette_p1_dims(const Tensor<double>& a, const Tensor<double>& b) {
  return {a.dim("l"), b.dim("u"), a.dim("r"), b.dim("d")};
}

PeriodicMPS plaquette_ring(const Tensor<double>& a, const Tensor<double>& b) {
  const Lurd ta(a), tb(b);
  PeriodicMPS m;
  m.sites.push_back(ring_site(ta, {3, 0, 1, 2}));  // TL: (d, l, u, r)
  m.sites.push_back(ring_site(tb, {0, 1, 2, 3}));  // TR: (l, u, r, d)
  m.sites.push_back(ring_site(ta, {1, 2, 3, 0}));  // BR: (u, r, d, l)
  m.sites.push_back(ring_site(tb, {2, 3, 0, 1}));  // BL: (r, d, l, u)
  for (std::size_t k = 0; k < 4; ++k)
    LOOPCUT_REQUIRE(right_dim(m.sites[k]) == left_dim(m.sites[(k + 1) % 4]), "plaquette bond dimensions differ");
  return m;
}

CoarsePair coarse_grain(const std::vector<Site>& h) {
  LOOPCUT_REQUIRE(h.size() == 8, "coarse graining needs the 8-site chain");
  CoarsePair out;
  Dims4 n{};
  // A: (alpha0, alpha1, alpha2, alpha3) = (d, r, u, l).
  auto da = corner_contract(h[1], h[2], h[5], h[6], n);
  Tensor<double> ta({n[0], n[1], n[2], n[3]}, {"d", "r", "u", "l"}, std::move(da));
  out.a = ta.permuted({"l", "u", "r", "d"});
  // B: (alpha1, alpha2, alpha3, alpha0) = (l, d, r, u).
  auto db = corner_contract(h[3], h[4], h[7], h[0], n);
  Tensor<double> tb({n[0], n[1], n[2], n[3]}, {"l", "d", "r", "u"}, std::move(db));
  out.b = tb.permuted({"l", "u", "r", "d"});
  out.log_c_a = normalize_max(out.a);
  out.log_c_b = normalize_max(out.b);
  return out;
}

double torus_log_trace(const Tensor<double>& a, const Tensor<double>& b) {
  const Lurd ta(a), tb(b);
  // Row with x on the left and y on the right: rows (u_x, u_y), cols (d_x, d_y).
  auto row = [](const Lurd& x, const Lurd& y) {
    LOOPCUT_REQUIRE(x.n[2] == y.n[0] && y.n[2] == x.n[0], "torus horizontal legs do not match");
    const std::size_t h1 = x.n[2], h2 = x.n[0];
    Matrix<double> r = Matrix<double>::Zero(static_cast<Eigen::Index>(x.n[1] * y.n[1]),
                                            static_cast<Eigen::Index>(x.n[3] * y.n[3]));
    for (std::size_t u0 = 0; u0 < x.n[1]; ++u0)
      for (std::size_t u1 = 0; u1 < y.n[1]; ++u1)
        for (std::size_t d0 = 0; d0 < x.n[3]; ++d0)
          for (std::size_t d1 = 0; d1 < y.n[3]; ++d1) {
            double acc = 0;
            for (std::size_t i = 0; i < h1; ++i)
              for (std::size_t j = 0; j < h2; ++j) acc += x(j, u0, i, d0) * y(i, u1, j, d1);
            r(static_cast<Eigen::Index>(u0 * y.n[1] + u1), static_cast<Eigen::Index>(d0 * y.n[3] + d1)) = acc;
          }
    return r;
  };
  const Matrix<double> r0 = row(ta, tb), r1 = row(tb, ta);
  LOOPCUT_REQUIRE(r0.cols() == r1.rows() && r1.cols() == r0.rows(), "torus vertical legs do not match");
  const double z = (r0 * r1).trace();
  if (!(z > 0)) throw NumericalError("torus trace is not positive");
  return std::log(z);
}

std::vector<Eigen::Index> truncate_chain(std::vector<Site>& chain, const TrgOptions& opts) {
  std::vector<Eigen::Index> switches;
  for (std::size_t k = 0; k < 4; ++k) {
    const Eigen::Index d = right_dim(chain[2 * k]);
    if (d <= opts.chi) {
      if (opts.scheme == TrgScheme::Zmt2 || opts.scheme == TrgScheme::Zmt3) switches.push_back(-1);
      continue;
    }
    if (opts.scheme == TrgScheme::Tebd) {
      const Matrix<double> keep = Matrix<double>::Identity(d, opts.chi);
      absorb_bond(chain, k, keep, keep);
      continue;
    }
    const auto env = bond_metric_pmps(chain, k);
    if (opts.scheme == TrgScheme::Eat) {
      const auto t = eat_truncate(env, opts.chi);
      absorb_bond(chain, k, t.left_absorb, t.right_absorb);
      continue;
    }
    ZmtOptions z;
    z.eat_gauge_init = opts.eat_gauge_init;
    z.general_dim_cap = opts.general_dim_cap;
    z.real_lead = true;
    z.switch_threshold = opts.delta;
    if (opts.scheme == TrgScheme::Zmt1) {
      z.scheme = ZmtScheme::Linear;
    } else {
      z.scheme = ZmtScheme::Switched;
      z.subspace = opts.scheme == TrgScheme::Zmt2 ? Subspace::RealSymmetric : Subspace::Full;
    }
    const auto t = truncate_to(env, opts.chi, z);
    absorb_bond(chain, k, t.left_absorb, t.right_absorb);
    if (z.scheme == ZmtScheme::Switched) switches.push_back(t.switch_dim);
  }
  return switches;
}

TrgIterationReport trg_step(TrgState& state, const TrgOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  TrgIterationReport rep;
  rep.iteration = state.iteration + 1;
  const PeriodicMPS vid = vidal_gauge(plaquette_ring(state.a, state.b), opts.vidal);
  rep.gauge_residual = vid.gauge_residual;
  for (const auto& s : vid.sites) rep.ring_dim = std::max(rep.ring_dim, right_dim(s));
  const SplitChain split = split_sites(vid, plaquette_p1_dims(state.a, state.b));
  for (const auto& s : split.sites) rep.split_dim = std::max(rep.split_dim, right_dim(s));
  const std::vector<Site> target = pair_ring(split.sites);
  std::vector<Site> chain = split.sites;
  if (opts.measure_loopiness && right_dim(chain[0]) > 1) rep.loopiness = loopiness(bond_metric_pmps(chain, 0));
  for (TrgScheme other : opts.compare) {
    TrgOptions o = opts;
    o.scheme = other;
    std::vector<Site> trial = split.sites;
    SchemeCost c;
    c.scheme = other;
    c.switch_dims = truncate_chain(trial, o);
    c.f_initial_rel = chain_cost(target, trial).relative;
    rep.compared.push_back(std::move(c));
  }
  rep.switch_dims = truncate_chain(chain, opts);
  rep.f_initial_rel = chain_cost(target, chain).relative;
  rep.f_final_rel = rep.f_initial_rel;
  if (opts.run_als && rep.split_dim > opts.chi) {
    auto als = als_optimize(target, chain, opts.als);
    chain = std::move(als.chain);
    rep.f_final_rel = als.cost_trace.back();
    rep.als_sweeps = als.sweeps;
    for (std::size_t k = 1; k < als.cost_trace.size(); ++k)
      if (als.cost_trace[k - 1] > 0)
        rep.als_max_rise = std::max(rep.als_max_rise, (als.cost_trace[k] - als.cost_trace[k - 1]) / als.cost_trace[k - 1]);
  }
  auto coarse = coarse_grain(chain);
  rep.log_c_a = coarse.log_c_a;
  rep.log_c_b = coarse.log_c_b;
  ++state.iteration;
  state.log_z_acc += std::ldexp(coarse.log_c_a + coarse.log_c_b, -(state.iteration + 1));
  state.a = std::move(coarse.a);
  state.b = std::move(coarse.b);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  state.reports.push_back(rep);
  return rep;
}

double log_z_estimate(const TrgState& state) {
  return state.log_z_acc + std::ldexp(torus_log_trace(state.a, state.b), -(state.iteration + 2));
}

TrgResult trg_run(const TrgOptions& opts) {
  LOOPCUT_REQUIRE(opts.beta > 0, "beta must be positive");
  LOOPCUT_REQUIRE(opts.chi >= 2, "chi must be at least 2");
  LOOPCUT_REQUIRE(opts.iterations >= 1, "at least one TRG iteration is required");
  TrgState state = trg_init(opts.beta);
  for (int it = 0; it < opts.iterations; ++it) trg_step(state, opts);
  TrgResult r;
  r.log_z_per_tensor = log_z_estimate(state);
  r.log_z_per_spin = 0.5 * r.log_z_per_tensor;
  r.free_energy = -r.log_z_per_spin / opts.beta;
  r.onsager = onsager_free_energy(opts.beta);
  r.relative_error = std::abs(r.free_energy - r.onsager) / std::abs(r.onsager);
  r.reports = std::move(state.reports);
  return r;
}

}  // namespace loopcut
