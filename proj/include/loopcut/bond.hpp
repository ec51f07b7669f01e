#pragma once

#include <string>

#include "loopcut/tensor.hpp"

namespace loopcut {

// The two tensors joined by the bond being truncated.
template <typename T>
struct BondTensors {
  Tensor<T> left;
  std::string left_leg;
  Tensor<T> right;
  std::string right_leg;
};

// left[..., i] -> sum_i left[..., i] a(i,k); right likewise with b. Leg names and order are kept.
template <typename T>
BondTensors<T> absorb_factors(const BondTensors<T>& bt, const Matrix<T>& a, const Matrix<T>& b) {
  auto absorb = [](const Tensor<T>& t, const std::string& leg, const Matrix<T>& m) {
    LOOPCUT_REQUIRE(t.dim(leg) == static_cast<std::size_t>(m.rows()), "bond factor does not match tensor leg");
    const std::string tmp = leg + "#new";
    auto f = Tensor<T>::from_matrix(m, {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                                    {leg + "#old", tmp});
    auto out = contract(t.relabeled(leg, leg + "#old"), f, {{leg + "#old", leg + "#old"}}).relabeled(tmp, leg);
    return out.permuted(t.legs());
  };
  return {absorb(bt.left, bt.left_leg, a), bt.left_leg, absorb(bt.right, bt.right_leg, b), bt.right_leg};
}

}  // namespace loopcut
