#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopcut/bond.hpp"
#include "loopcut/bond_metric.hpp"

namespace loopcut {

enum class FixtureKind { VirtualLoop, ToyPair, ProductEnv, LoopyEnv };

const char* fixture_name(FixtureKind k);
std::optional<FixtureKind> parse_fixture(const std::string& name);

struct FixtureSpec {
  FixtureKind kind = FixtureKind::VirtualLoop;
  Eigen::Index d_bond = 2;
  Eigen::Index d_loop = 2;
  double loop_target = 0.6;
  std::uint64_t seed = 1;
};

// Plaquette of four tensors on a ring, 0-1-2-3-0, each with a physical leg
// "p" and bond legs "l" (towards the previous site) and "r" (towards the
// next). A loop line of dimension d runs around the ring and is merged into
// every edge, k = i*d + a. The cut bond joins site 0 ("r") to site 1 ("l").
struct VirtualLoop {
  Eigen::Index d_bond = 0;
  Eigen::Index d_loop = 0;
  std::vector<Tensor<double>> kets;
  std::vector<NetworkLink> links;  // every ring edge except the cut one
  Stub left, right;
  BondTensors<double> tensors;
  BondEnvironment<double> env;       // merged cut bond, dim D*d
  BondEnvironment<double> backbone;  // same plaquette without the loop line, dim D
  Eigen::Index exact_dim = 0;        // exact truncation target
  double expected_loopiness = 0;
};

// backbone_loop = false sets the edge opposite the cut to dimension 1, so
// the backbone metric is an exact product.
VirtualLoop virtual_loop_network(Eigen::Index d_bond, Eigen::Index d_loop, std::uint64_t seed,
                                 bool backbone_loop = true, Eigen::Index d_phys = 2);

struct ToyPair {
  BondTensors<double> tensors;  // psi_ij identical unit states for every i, j
  BondEnvironment<double> env;
  Matrix<double> g;               // 1 + sigma^x
  Vector<double> rhs;             // (1,1)
  Vector<double> zero_mode;       // (1,-1)
  Vector<double> pinv_solution;   // (1/2, 1/2)
  double z_gauge = 0.5;
  Vector<double> gauge_solution;  // (1, 0)
};

ToyPair toy_pair();

// c^T g c - rhs^T c - c^T rhs + 1
double toy_objective(const ToyPair& toy, const Vector<double>& c);

enum class EnvKind { Product, Loopy };

// Unit norm_target. Loopy envs blend a product env with a perturbation of
// loopiness close to one and bisect the weight until within 0.02 of the target.
template <typename T>
BondEnvironment<T> random_env(Eigen::Index d, EnvKind kind, double loop_target, std::uint64_t seed);

}  // namespace loopcut
