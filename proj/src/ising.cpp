#include "loopcut/ising.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace loopcut {

Tensor<double> ising_tensor(double beta) {
  LOOPCUT_REQUIRE(beta > 0 && std::isfinite(beta), "beta must be positive");
  Tensor<double> t({2, 2, 2, 2}, {"l", "u", "r", "d"});
  auto s = [](std::size_t x) { return x == 0 ? 1.0 : -1.0; };
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t u = 0; u < 2; ++u)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t d = 0; d < 2; ++d)
          t.at({l, u, r, d}) = std::exp(beta * (s(l) * s(u) + s(u) * s(r) + s(r) * s(d) + s(d) * s(l)));
  return t;
}

double onsager_log_z(double beta) {
  LOOPCUT_REQUIRE(beta > 0 && std::isfinite(beta), "beta must be positive");
  const double pi = boost::math::constants::pi<double>();
  const double c = std::cosh(2 * beta);
  const double k = 2 * std::sinh(2 * beta) / (c * c);
  auto integrand = [k](double th) {
    const double s = k * std::sin(th);
    return std::log(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - s * s))));
  };
  double err = 0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi, 20, 1e-14, &err);
  if (!std::isfinite(integral) || err > 1e-10) throw NumericalError("Onsager quadrature did not converge");
  return std::log(2 * c) + integral / (2 * pi);
}

double onsager_free_energy(double beta) { return -onsager_log_z(beta) / beta; }

}  // namespace loopcut
