#pragma once

#include <array>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "loopcut/bond_metric.hpp"
#include "loopcut/linalg.hpp"

namespace testutil {

using loopcut::cplx;
using loopcut::Matrix;

template <typename T>
Matrix<T> random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<T> m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) {
      if constexpr (loopcut::is_complex_v<T>)
        m(i, j) = cplx(n(rng), n(rng));
      else
        m(i, j) = n(rng);
    }
  return m;
}

template <typename T>
Matrix<T> random_psd(Eigen::Index d, std::mt19937_64& rng, Eigen::Index rank = -1) {
  Matrix<T> x = random_matrix<T>(d, rank < 0 ? d : rank, rng);
  return x * x.adjoint();
}

template <typename T>
Matrix<T> random_unitary(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix<T>> qr(random_matrix<T>(d, d, rng));
  return qr.householderQ() * Matrix<T>::Identity(d, d);
}

// Full metric of a product environment: g[(i,j),(i',j')] = gl(i,i') gr(j,j').
template <typename T>
Matrix<T> product_metric(const Matrix<T>& gl, const Matrix<T>& gr) {
  const Eigen::Index d = gl.rows();
  Matrix<T> g(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index ip = 0; ip < d; ++ip)
        for (Eigen::Index jp = 0; jp < d; ++jp) g(i * d + j, ip * d + jp) = gl(i, ip) * gr(j, jp);
  return g;
}

// Brute-force f = sum conj(X) g X with X = delta - M.
template <typename T>
double naive_error(const Matrix<T>& g_full, const Matrix<T>& m) {
  const Eigen::Index d = m.rows();
  loopcut::Vector<T> x(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i * d + j) = (i == j ? T(1) : T(0)) - m(i, j);
  return std::real((x.adjoint() * g_full * x)(0, 0));
}

}  // namespace testutil

namespace testutil {

// psi_ij = sum_c alpha_{ic} (x) beta_{jc}: a loop cut twice, inner index (c,c').
template <typename T>
loopcut::BondEnvironment<T> loopy_env(Eigen::Index d, Eigen::Index chi, Eigen::Index p, std::mt19937_64& rng) {
  Matrix<T> alpha = random_matrix<T>(p, d * chi, rng);  // column i*chi + c
  Matrix<T> beta = random_matrix<T>(p, d * chi, rng);
  Matrix<T> ga = alpha.adjoint() * alpha, gb = beta.adjoint() * beta;
  Matrix<T> left(d * d, chi * chi), right(chi * chi, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip)
      for (Eigen::Index c = 0; c < chi; ++c)
        for (Eigen::Index cp = 0; cp < chi; ++cp) {
          left(i * d + ip, c * chi + cp) = ga(i * chi + c, ip * chi + cp);
          right(c * chi + cp, i * d + ip) = gb(i * chi + c, ip * chi + cp);
        }
  return loopcut::BondEnvironment<T>::from_factors(left, right, d);
}

}  // namespace testutil

namespace testutil {

template <typename T>
loopcut::Vector<T> flat(const Matrix<T>& z) {
  const Eigen::Index d = z.rows();
  loopcut::Vector<T> v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = z(i, j);
  return v;
}

// Full metric n |Z><Z| + Q H Q with H random PSD of O(1) spectrum on the complement of Z.
template <typename T>
Matrix<T> metric_with_mode(const Matrix<T>& z, double n, std::mt19937_64& rng, double floor = 1.0) {
  const Eigen::Index d2 = z.size();
  loopcut::Vector<T> v = flat(z);
  v.normalize();
  Matrix<T> q = Matrix<T>::Identity(d2, d2) - v * v.adjoint();
  Matrix<T> h = random_psd<T>(d2, rng) / double(d2) + floor * Matrix<T>::Identity(d2, d2);
  Matrix<T> g = q * h * q + n * v * v.adjoint();
  return (g + g.adjoint()) / 2.0;
}

}  // namespace testutil

namespace testutil {

struct ScanResult {
  cplx w;
  double f;
};

// Zooming 2-D grid over complex w, then a least-squares quadratic fit on a patch around the grid minimum.
template <typename F>
ScanResult scan_w_min(F&& f, cplx center = cplx(-1, 0), double half_width = 4.0) {
  const int n = 41;
  cplx best = center;
  double fbest = f(center);
  double h = half_width;
  for (int level = 0; level < 6; ++level) {
    const cplx c = best;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cplx w = c + cplx(h * (2.0 * a / (n - 1) - 1.0), h * (2.0 * b / (n - 1) - 1.0));
        const double v = f(w);
        if (v < fbest) {
          fbest = v;
          best = w;
        }
      }
    h *= 0.15;
  }
  // f(w) = p0 + p1 x + p2 y + p3 (x^2 + y^2) about the grid minimum, with x + iy = w - best.
  const double r = std::max(h * 50, 1e-3);
  Eigen::MatrixXd design(0, 4);
  Eigen::VectorXd rhs(0);
  std::vector<std::array<double, 5>> rows;
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) {
      const double x = r * a / 6.0, y = r * b / 6.0;
      rows.push_back({1.0, x, y, x * x + y * y, f(best + cplx(x, y))});
    }
  design.resize(rows.size(), 4);
  rhs.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int j = 0; j < 4; ++j) design(k, j) = rows[k][j];
    rhs(k) = rows[k][4];
  }
  Eigen::Vector4d p = design.colPivHouseholderQr().solve(rhs);
  const double x0 = -p(1) / (2 * p(3)), y0 = -p(2) / (2 * p(3));
  return {best + cplx(x0, y0), p(0) - (p(1) * p(1) + p(2) * p(2)) / (4 * p(3))};
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testutil
