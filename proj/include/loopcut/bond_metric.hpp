#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "loopcut/linalg.hpp"
#include "loopcut/tensor.hpp"

namespace loopcut {

// Metric of a cut bond, g[(i,j),(i',j')] = <psi_ij|psi_i'j'>, where i is the
// index on the left tensor's stub and j on the right tensor's stub.
//
// The metric is stored in its left-right split layout
//     G[(i,i'),(j,j')] = g[(i,j),(i',j')]
// either densely or factored as G = left * right through an inner index of
// size r. A loop cut a second time (e.g. a periodic MPS) has r equal to the
// square of the second cut's dimension, which keeps large bonds affordable.
// Bond transformations act on the left factor through (i,i') and on the
// right factor through (j,j') only, so they preserve the factorization.
template <typename T>
class BondEnvironment {
 public:
  BondEnvironment() = default;

  // g_full rows/cols are (i,j) = i*D + j. Validates Hermiticity, enforces it,
  // and clips round-off negative eigenvalues.
  static BondEnvironment from_full(const Matrix<T>& g_full, Eigen::Index d);

  // Split-layout factors; left is D^2 x r indexed (i*D+i'), right is r x D^2 indexed (j*D+j').
  static BondEnvironment from_factors(Matrix<T> left, Matrix<T> right, Eigen::Index d);

  Eigen::Index dim() const { return d_; }
  bool factored() const { return factored_; }
  Eigen::Index inner_dim() const { return factored_ ? left_.cols() : d_ * d_; }
  const Matrix<T>& left() const { return left_; }
  const Matrix<T>& right() const { return right_; }

  // D^2 x D^2 in the (i,j) x (i',j') layout.
  Matrix<T> full() const;
  // D^2 x D^2 in the (i,i') x (j,j') layout.
  Matrix<T> split_matrix() const;

  double norm_target() const;

  // New stub indices k (left) and l (right):
  //   psi'_kl = sum_ij a(i,k) b(j,l) psi_ij.
  BondEnvironment congruence(const Matrix<T>& a, const Matrix<T>& b) const;

 private:
  Eigen::Index d_ = 0;
  bool factored_ = false;
  Matrix<T> left_;   // dense G when not factored
  Matrix<T> right_;  // unused when not factored
};

template <typename T>
struct EatSplit {
  Matrix<T> g_left;    // D x D over (i,i'), Hermitian PSD, unit Frobenius norm
  Matrix<T> g_right;   // D x D over (j,j')
  double lambda1 = 0;
  Vector<double> spectrum;  // non-increasing
};

struct ErrorMeasure {
  double absolute = 0;
  double relative = 0;
};

// Network links for build_metric: tensor index + leg on each side.
struct NetworkLink {
  std::size_t a;
  std::string leg_a;
  std::size_t b;
  std::string leg_b;
};

struct Stub {
  std::size_t tensor;
  std::string leg;
};

// A closed double-layer network with the cut bond's four stubs left open.
template <typename T>
struct MetricNetwork {
  std::vector<Tensor<T>> tensors;
  std::vector<NetworkLink> links;
  Stub ket_left, ket_right, bra_left, bra_right;
};

// Build the double layer of a ket network: every leg of the kets that is not
// linked and is not one of the two stubs is treated as physical and joined
// to its conjugate copy.
template <typename T>
MetricNetwork<T> make_double_layer(const std::vector<Tensor<T>>& kets, const std::vector<NetworkLink>& ket_links,
                                   const Stub& left, const Stub& right);

template <typename T>
BondEnvironment<T> build_metric(const MetricNetwork<T>& net);

template <typename T>
Matrix<T> diag_metric(const BondEnvironment<T>& env);

template <typename T>
EatSplit<T> eat_split(const BondEnvironment<T>& env);

template <typename T>
double loopiness(const BondEnvironment<T>& env);

// f = sum (delta - M)^* g (delta - M); M is the D x D bond coefficient.
template <typename T>
ErrorMeasure measure_error(const BondEnvironment<T>& env, const Matrix<T>& coeff);

// Overlap <M1|M2> = sum M1^* g M2 of two bond coefficients.
template <typename T>
T coefficient_overlap(const BondEnvironment<T>& env, const Matrix<T>& m1, const Matrix<T>& m2);

// 1 - |<M1|M2>|^2 / (<M1|M1><M2|M2>)
template <typename T>
double fidelity_mismatch(const BondEnvironment<T>& env, const Matrix<T>& m1, const Matrix<T>& m2);

}  // namespace loopcut
