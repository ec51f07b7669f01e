#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "loopcut/error.hpp"

namespace loopcut {

using cplx = std::complex<double>;

enum class Field { Real, Complex };

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename A, typename B>
using promote_t = std::conditional_t<is_complex_v<A> || is_complex_v<B>, cplx, double>;

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& x) { return std::conj(x); }

// Dense multi-index array with one string label per dimension, row-major.
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() : dims_{}, legs_{}, data_(1, T(0)) {}

  Tensor(std::vector<std::size_t> dims, std::vector<std::string> legs)
      : dims_(std::move(dims)), legs_(std::move(legs)) {
    validate_shape();
    data_.assign(product(dims_), T(0));
  }

  Tensor(std::vector<std::size_t> dims, std::vector<std::string> legs, std::vector<T> data)
      : dims_(std::move(dims)), legs_(std::move(legs)), data_(std::move(data)) {
    validate_shape();
    LOOPCUT_REQUIRE(data_.size() == product(dims_), "tensor data length does not match dims");
  }

  static Tensor scalar(T value) {
    Tensor t;
    t.data_[0] = value;
    return t;
  }

  static Tensor identity(std::size_t n, const std::string& a, const std::string& b) {
    Tensor t({n, n}, {a, b});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = T(1);
    return t;
  }

  static constexpr Field field() { return is_complex_v<T> ? Field::Complex : Field::Real; }

  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::string>& legs() const { return legs_; }
  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool has_leg(const std::string& leg) const {
    return std::find(legs_.begin(), legs_.end(), leg) != legs_.end();
  }

  std::size_t leg_index(const std::string& leg) const {
    auto it = std::find(legs_.begin(), legs_.end(), leg);
    if (it == legs_.end()) throw InvalidArgument("unknown leg '" + leg + "'");
    return static_cast<std::size_t>(it - legs_.begin());
  }

  std::size_t dim(const std::string& leg) const { return dims_[leg_index(leg)]; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    LOOPCUT_REQUIRE(idx.size() == dims_.size(), "multi-index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      LOOPCUT_REQUIRE(idx[k] < dims_[k], "multi-index out of range");
      flat = flat * dims_[k] + idx[k];
    }
    return flat;
  }

  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      idx[k] = flat % dims_[k];
      flat /= dims_[k];
    }
    return idx;
  }

  T& at(std::initializer_list<std::size_t> idx) {
    return data_[flat_index(std::span<const std::size_t>(idx.begin(), idx.size()))];
  }
  const T& at(std::initializer_list<std::size_t> idx) const {
    return data_[flat_index(std::span<const std::size_t>(idx.begin(), idx.size()))];
  }
  T& at(std::span<const std::size_t> idx) { return data_[flat_index(idx)]; }
  const T& at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }

  Tensor permuted(const std::vector<std::string>& order) const {
    LOOPCUT_REQUIRE(order.size() == legs_.size(), "permutation must name every leg");
    std::vector<std::size_t> perm(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) perm[k] = leg_index(order[k]);
    return permuted_by_axes(perm);
  }

  // perm[k] = source axis placed at output position k.
  Tensor permuted_by_axes(const std::vector<std::size_t>& perm) const {
    const std::size_t r = rank();
    std::vector<std::size_t> new_dims(r);
    std::vector<std::string> new_legs(r);
    std::vector<bool> seen(r, false);
    for (std::size_t k = 0; k < r; ++k) {
      LOOPCUT_REQUIRE(perm[k] < r && !seen[perm[k]], "invalid permutation");
      seen[perm[k]] = true;
      new_dims[k] = dims_[perm[k]];
      new_legs[k] = legs_[perm[k]];
    }
    bool identity = true;
    for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
    if (identity) return *this;

    std::vector<std::size_t> src_stride(r, 1);
    for (std::size_t k = r; k-- > 1;) src_stride[k - 1] = src_stride[k] * dims_[k];
    std::vector<std::size_t> stride(r);
    for (std::size_t k = 0; k < r; ++k) stride[k] = src_stride[perm[k]];

    std::vector<T> out(data_.size());
    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    // Innermost output axis is walked in a tight loop.
    const std::size_t inner_dim = r ? new_dims[r - 1] : 1;
    const std::size_t inner_stride = r ? stride[r - 1] : 0;
    for (std::size_t dst = 0; dst < out.size(); dst += inner_dim) {
      for (std::size_t q = 0; q < inner_dim; ++q) out[dst + q] = data_[src + q * inner_stride];
      if (r < 2) break;
      for (std::size_t k = r - 1; k-- > 0;) {
        ++idx[k];
        src += stride[k];
        if (idx[k] < new_dims[k]) break;
        src -= stride[k] * idx[k];
        idx[k] = 0;
      }
    }
    return Tensor(std::move(new_dims), std::move(new_legs), std::move(out));
  }

  Tensor relabeled(const std::string& from, const std::string& to) const {
    Tensor t = *this;
    t.legs_[leg_index(from)] = to;
    t.validate_shape();
    return t;
  }

  Tensor relabeled(const std::vector<std::pair<std::string, std::string>>& map) const {
    Tensor t = *this;
    for (const auto& [from, to] : map) t.legs_[leg_index(from)] = to;
    t.validate_shape();
    return t;
  }

  Tensor conj() const {
    Tensor t = *this;
    if constexpr (is_complex_v<T>) {
      for (auto& x : t.data_) x = std::conj(x);
    }
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if constexpr (is_complex_v<T> && !is_complex_v<U>) {
        out[k] = data_[k].real();
      } else {
        out[k] = U(data_[k]);
      }
    }
    return Tensor<U>(dims_, legs_, std::move(out));
  }

  Tensor& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  double norm() const {
    double s = 0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0;
    for (const auto& x : data_) m = std::max(m, static_cast<double>(std::abs(x)));
    return m;
  }

  // Row legs then column legs; every leg must appear exactly once.
  Matrix<T> matrix(const std::vector<std::string>& row_legs, const std::vector<std::string>& col_legs) const {
    std::vector<std::string> order = row_legs;
    order.insert(order.end(), col_legs.begin(), col_legs.end());
    Tensor p = permuted(order);
    std::size_t rows = 1;
    for (std::size_t k = 0; k < row_legs.size(); ++k) rows *= p.dims_[k];
    const std::size_t cols = rows ? p.size() / rows : 0;
    Matrix<T> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = p.data_[i * cols + j];
    return m;
  }

  static Tensor from_matrix(const Matrix<T>& m, std::vector<std::size_t> dims, std::vector<std::string> legs) {
    std::vector<T> data(static_cast<std::size_t>(m.size()));
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] = m(i, j);
    return Tensor(std::move(dims), std::move(legs), std::move(data));
  }

 private:
  static std::size_t product(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
  }

  void validate_shape() const {
    LOOPCUT_REQUIRE(dims_.size() == legs_.size(), "one leg label per dimension required");
    for (auto d : dims_) LOOPCUT_REQUIRE(d >= 1, "tensor dims must be positive");
    std::vector<std::string> sorted = legs_;
    std::sort(sorted.begin(), sorted.end());
    LOOPCUT_REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "tensor leg labels must be unique");
  }

  std::vector<std::size_t> dims_;
  std::vector<std::string> legs_;
  std::vector<T> data_;
};

using RealTensor = Tensor<double>;
using ComplexTensor = Tensor<cplx>;

using LegPair = std::pair<std::string, std::string>;

// Sum over the paired legs. Unpaired legs of a come first, then those of b.
template <typename A, typename B>
Tensor<promote_t<A, B>> contract(const Tensor<A>& a, const Tensor<B>& b, const std::vector<LegPair>& pairs) {
  using R = promote_t<A, B>;
  std::vector<std::string> pa, pb;
  for (const auto& [la, lb] : pairs) {
    LOOPCUT_REQUIRE(std::find(pa.begin(), pa.end(), la) == pa.end(), "leg '" + la + "' repeated in contraction pairs");
    LOOPCUT_REQUIRE(std::find(pb.begin(), pb.end(), lb) == pb.end(), "leg '" + lb + "' repeated in contraction pairs");
    if (a.dim(la) != b.dim(lb)) throw InvalidArgument("dimension mismatch contracting '" + la + "' with '" + lb + "'");
    pa.push_back(la);
    pb.push_back(lb);
  }
  std::vector<std::string> free_a, free_b;
  std::vector<std::size_t> out_dims;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (std::find(pa.begin(), pa.end(), a.legs()[k]) == pa.end()) {
      free_a.push_back(a.legs()[k]);
      out_dims.push_back(a.dims()[k]);
    }
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (std::find(pb.begin(), pb.end(), b.legs()[k]) == pb.end()) {
      free_b.push_back(b.legs()[k]);
      out_dims.push_back(b.dims()[k]);
    }
  std::vector<std::string> out_legs = free_a;
  out_legs.insert(out_legs.end(), free_b.begin(), free_b.end());

  Matrix<R> ma = a.matrix(free_a, pa).template cast<R>();
  Matrix<R> mb = b.matrix(pb, free_b).template cast<R>();
  Matrix<R> mc = ma * mb;
  return Tensor<R>::from_matrix(mc, std::move(out_dims), std::move(out_legs));
}

// Merge `group` into one leg placed where the first grouped leg was; the
// merged index runs lexicographically over the group in the given order.
template <typename T>
Tensor<T> merge_legs(const Tensor<T>& t, const std::vector<std::string>& group, const std::string& new_leg) {
  LOOPCUT_REQUIRE(!group.empty(), "merge group must be nonempty");
  std::vector<std::string> order;
  std::size_t first = t.rank();
  for (const auto& g : group) first = std::min(first, t.leg_index(g));
  for (std::size_t k = 0; k < t.rank(); ++k) {
    const auto& leg = t.legs()[k];
    if (k == first) order.insert(order.end(), group.begin(), group.end());
    if (std::find(group.begin(), group.end(), leg) == group.end()) order.push_back(leg);
  }
  Tensor<T> p = t.permuted(order);
  std::vector<std::size_t> dims;
  std::vector<std::string> legs;
  std::size_t merged = 1;
  for (std::size_t k = 0; k < p.rank(); ++k) {
    const auto& leg = p.legs()[k];
    const bool grouped = std::find(group.begin(), group.end(), leg) != group.end();
    if (grouped) {
      merged *= p.dims()[k];
      if (leg == group.back()) {
        dims.push_back(merged);
        legs.push_back(new_leg);
      }
    } else {
      dims.push_back(p.dims()[k]);
      legs.push_back(leg);
    }
  }
  return Tensor<T>(std::move(dims), std::move(legs), std::move(p.data()));
}

struct LegFactor {
  std::string leg;
  std::size_t dim;
};

template <typename T>
Tensor<T> split_leg(const Tensor<T>& t, const std::string& leg, const std::vector<LegFactor>& factors) {
  const std::size_t pos = t.leg_index(leg);
  std::size_t prod = 1;
  for (const auto& f : factors) prod *= f.dim;
  if (factors.empty() || prod != t.dims()[pos])
    throw InvalidArgument("split of leg '" + leg + "' does not factor its dimension");
  std::vector<std::size_t> dims;
  std::vector<std::string> legs;
  for (std::size_t k = 0; k < t.rank(); ++k) {
    if (k == pos) {
      for (const auto& f : factors) {
        dims.push_back(f.dim);
        legs.push_back(f.leg);
      }
    } else {
      dims.push_back(t.dims()[k]);
      legs.push_back(t.legs()[k]);
    }
  }
  return Tensor<T>(std::move(dims), std::move(legs), t.data());
}

}  // namespace loopcut
