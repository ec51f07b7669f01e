#pragma once

#include <optional>

#include "loopcut/bond.hpp"
#include "loopcut/bond_metric.hpp"

namespace loopcut {

// Bond insertion I = left_factor * right_factor. The left tensor absorbs
// left_factor (a) and the right tensor absorbs right_factor^T (b), so both
// transformed split metrics a^dag g_L a and b^dag g_R b equal diag(lambda).
template <typename T>
struct GaugePair {
  Matrix<T> left_factor;
  Matrix<T> right_factor;
  Vector<double> lambda;  // non-increasing

  Matrix<T> left_absorb() const { return left_factor; }
  Matrix<T> right_absorb() const { return right_factor.transpose(); }
};

inline constexpr double kSpectralFloor = 1e-14;

template <typename T>
GaugePair<T> eat_gauge_fix(const BondEnvironment<T>& env);

template <typename T>
BondEnvironment<T> gauge_transformed(const BondEnvironment<T>& env, const GaugePair<T>& pair);

template <typename T>
struct EatTruncation {
  GaugePair<T> gauge;
  Matrix<T> left_absorb;   // D x D'
  Matrix<T> right_absorb;  // D x D'
  BondEnvironment<T> env;  // metric seen by the truncated bond
  ErrorMeasure error;
  std::optional<BondTensors<T>> tensors;
};

template <typename T>
EatTruncation<T> eat_truncate(const BondEnvironment<T>& env, Eigen::Index target_dim);

template <typename T>
EatTruncation<T> eat_truncate(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim);

// Environment-free truncation: keeps the leading singular values of the bond
// state formed by the two tensors alone.
template <typename T>
struct LocalTruncation {
  Matrix<T> left_absorb;   // D x D'
  Matrix<T> right_absorb;  // D x D'
  Vector<double> spectrum;
  BondEnvironment<T> env;
  ErrorMeasure error;
  BondTensors<T> tensors;
};

template <typename T>
LocalTruncation<T> local_truncate(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim);

}  // namespace loopcut
