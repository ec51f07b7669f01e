#include "loopcut/fixtures.hpp"

#include <cmath>
#include <random>

namespace loopcut {

const char* fixture_name(FixtureKind k) {
  switch (k) {
    case FixtureKind::VirtualLoop: return "virtual-loop";
    case FixtureKind::ToyPair: return "toy-pair";
    case FixtureKind::ProductEnv: return "product-env";
    case FixtureKind::LoopyEnv: return "loopy-env";
  }
  return "?";
}

std::optional<FixtureKind> parse_fixture(const std::string& name) {
  for (auto k : {FixtureKind::VirtualLoop, FixtureKind::ToyPair, FixtureKind::ProductEnv, FixtureKind::LoopyEnv})
    if (name == fixture_name(k)) return k;
  return std::nullopt;
}

namespace {

template <typename T>
Matrix<T> gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<T> m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) {
      if constexpr (is_complex_v<T>)
        m(i, j) = cplx(n(rng), n(rng));
      else
        m(i, j) = n(rng);
    }
  return m;
}

template <typename T>
Matrix<T> wishart(Eigen::Index d, std::mt19937_64& rng) {
  Matrix<T> x = gaussian<T>(d, d, rng);
  Matrix<T> w = x * x.adjoint();
  return w / w.norm();
}

template <typename T>
Matrix<T> kron_metric(const Matrix<T>& gl, const Matrix<T>& gr) {
  const Eigen::Index d = gl.rows();
  Matrix<T> g(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index ip = 0; ip < d; ++ip)
        for (Eigen::Index jp = 0; jp < d; ++jp) g(i * d + j, ip * d + jp) = gl(i, ip) * gr(j, jp);
  return g;
}

template <typename T>
Matrix<T> orthonormal(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix<T>> qr(gaussian<T>(d, d, rng));
  return qr.householderQ() * Matrix<T>::Identity(d, d);
}

// Ring edge e joins site e ("r") to site e+1 ("l").
std::vector<Tensor<double>> ring_tensors(const std::vector<Matrix<double>>& phi, const std::vector<std::size_t>& edge,
                                         std::size_t p, std::size_t d) {
  std::vector<Tensor<double>> out;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t dl = edge[(s + 3) % 4], dr = edge[s];
    Tensor<double> t({p, dl * d, dr * d}, {"p", "l", "r"});
    for (std::size_t q = 0; q < p; ++q)
      for (std::size_t l = 0; l < dl; ++l)
        for (std::size_t r = 0; r < dr; ++r)
          for (std::size_t a = 0; a < d; ++a)
            t.at({q, l * d + a, r * d + a}) = phi[s](static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l * dr + r));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

VirtualLoop virtual_loop_network(Eigen::Index d_bond, Eigen::Index d_loop, std::uint64_t seed, bool backbone_loop,
                                 Eigen::Index d_phys) {
  LOOPCUT_REQUIRE(d_bond >= 1 && d_loop >= 1 && d_phys >= 1, "virtual loop dimensions must be positive");
  std::mt19937_64 rng(seed);
  const auto D = static_cast<std::size_t>(d_bond);
  const auto d = static_cast<std::size_t>(d_loop);
  const auto p = static_cast<std::size_t>(d_phys);
  const std::vector<std::size_t> edge{D, D, backbone_loop ? D : 1, D};

  std::vector<Matrix<double>> phi;
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t dl = edge[(s + 3) % 4], dr = edge[s];
    Matrix<double> m = gaussian<double>(d_phys, static_cast<Eigen::Index>(dl * dr), rng);
    phi.push_back(m / m.norm());
  }

  VirtualLoop v;
  v.d_bond = d_bond;
  v.d_loop = d_loop;
  v.kets = ring_tensors(phi, edge, p, d);
  v.links = {{1, "r", 2, "l"}, {2, "r", 3, "l"}, {3, "r", 0, "l"}};
  v.left = {0, "r"};
  v.right = {1, "l"};
  v.tensors = {v.kets[0], "r", v.kets[1], "l"};
  v.env = build_metric(make_double_layer(v.kets, v.links, v.left, v.right));
  v.backbone = build_metric(make_double_layer(ring_tensors(phi, edge, p, 1), v.links, v.left, v.right));
  v.exact_dim = d_bond;
  v.expected_loopiness = d_loop >= 2 ? 1.0 : loopiness(v.backbone);
  return v;
}

ToyPair toy_pair() {
  ToyPair t;
  Tensor<double> a({1, 2}, {"p", "b"}, {1.0, 1.0});
  Tensor<double> b({2, 1}, {"b", "q"}, {1.0, 1.0});
  t.tensors = {a, "b", b, "b"};
  t.env = build_metric(make_double_layer<double>({a, b}, {}, {0, "b"}, {1, "b"}));
  t.g = diag_metric(t.env);
  t.rhs = Vector<double>::Ones(2);
  t.zero_mode = Vector<double>{{1.0, -1.0}};
  t.pinv_solution = Vector<double>{{0.5, 0.5}};
  t.gauge_solution = t.pinv_solution + t.z_gauge * t.zero_mode;
  return t;
}

double toy_objective(const ToyPair& toy, const Vector<double>& c) {
  return c.dot(toy.g * c) - 2.0 * toy.rhs.dot(c) + 1.0;
}

template <typename T>
BondEnvironment<T> random_env(Eigen::Index d, EnvKind kind, double loop_target, std::uint64_t seed) {
  LOOPCUT_REQUIRE(d >= 2, "random_env requires D >= 2");
  std::mt19937_64 rng(seed);
  const Matrix<T> prod = kron_metric<T>(wishart<T>(d, rng), wishart<T>(d, rng));
  auto normalized = [d](const Matrix<T>& g) {
    return BondEnvironment<T>::from_full(g / BondEnvironment<T>::from_full(g, d).norm_target(), d);
  };
  if (kind == EnvKind::Product) return normalized(prod);

  LOOPCUT_REQUIRE(loop_target >= 0 && loop_target < 1, "loop_target must lie in [0,1)");
  const Matrix<T> ua = orthonormal<T>(d, rng), ub = orthonormal<T>(d, rng);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  Matrix<T> pert = Matrix<T>::Zero(d * d, d * d);
  for (Eigen::Index m = 0; m < d; ++m) {
    const double w = m < 2 ? 1.0 : u(rng);
    pert += w * kron_metric<T>(ua.col(m) * ua.col(m).adjoint(), ub.col(m) * ub.col(m).adjoint());
  }
  pert += 0.05 * wishart<T>(d * d, rng);
  pert /= pert.norm();

  auto blend = [&](double t) { return BondEnvironment<T>::from_full((1 - t) * prod + t * pert, d); };
  double lo = 0, hi = 1;
  const double l_hi = loopiness(blend(hi));
  if (l_hi < loop_target) throw NumericalError("random_env cannot bracket the loopiness target");
  double best_t = hi, best_err = std::abs(l_hi - loop_target);
  for (int it = 0; it < 80 && best_err > 1e-3; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double l = loopiness(blend(mid));
    if (std::abs(l - loop_target) < best_err) best_err = std::abs(l - loop_target), best_t = mid;
    (l < loop_target ? lo : hi) = mid;
  }
  if (best_err > 0.02) throw NumericalError("random_env bisection missed the loopiness target");
  return normalized((1 - best_t) * prod + best_t * pert);
}

template BondEnvironment<double> random_env<double>(Eigen::Index, EnvKind, double, std::uint64_t);
template BondEnvironment<cplx> random_env<cplx>(Eigen::Index, EnvKind, double, std::uint64_t);

}  // namespace loopcut
