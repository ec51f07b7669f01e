#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "loopcut/bond_metric.hpp"

namespace loopcut {

// Rank-3 ring site: one (left bond) x (right bond) matrix per physical index.
using Site = std::vector<Matrix<double>>;

// Cyclic chain; bonds[k] sits between sites k and k+1. In Vidal form the
// sites hold Gamma and bonds hold the normalized lambda vectors; otherwise
// bonds is empty. The represented state is exp(log_scale) times the ring.
struct PeriodicMPS {
  std::vector<Site> sites;
  std::vector<Vector<double>> bonds;
  double log_scale = 0;
  double gauge_residual = std::numeric_limits<double>::infinity();

  std::size_t size() const { return sites.size(); }
  bool vidal() const { return !bonds.empty(); }
};

Eigen::Index left_dim(const Site& s);
Eigen::Index right_dim(const Site& s);

// E[(l,l'),(r,r')] = sum_p ket[p](l,r) bra[p](l',r').
Matrix<double> transfer(const Site& ket, const Site& bra);

// Tr prod_k transfer(ket_k, bra_k).
double ring_overlap(const std::vector<Site>& ket, const std::vector<Site>& bra);

// Physical index p = pa * |b| + pb.
Site merge_sites(const Site& a, const Site& b);

// Plain ring with the bond weights absorbed to the right of each Gamma.
std::vector<Site> ring_sites(const PeriodicMPS& m);

// Closed network against one physical vector per site, including exp(log_scale).
double probe_value(const PeriodicMPS& m, const std::vector<Vector<double>>& probes);

struct VidalOptions {
  int max_sweeps = 200;
  double tol = 1e-10;
  double drop = 1e-8;  // relative lambda below which a bond direction is discarded
};

PeriodicMPS vidal_gauge(const PeriodicMPS& m, const VidalOptions& opts = {});

// Largest deviation of sum_p theta theta^T from lambda_left^2 (and the mirror
// relation) with theta = lambda_left Gamma lambda_right.
double vidal_residual(const PeriodicMPS& m);

// Vidal site k with physical index p = p1 * (P / p1_dims[k]) + p2 is split
// (left bond, p1) | (p2, right bond) into two rank-3 sites. Site 2k is the
// first half of old site k. The scale is spread evenly over the new sites.
struct SplitChain {
  std::vector<Site> sites;
  std::vector<Vector<double>> spectra;  // singular values on each new bond
};

SplitChain split_sites(const PeriodicMPS& vidal, const std::vector<std::size_t>& p1_dims);

// Merged pairs (2k, 2k+1) of an 8-site-style chain.
std::vector<Site> pair_ring(const std::vector<Site>& chain);

// Metric of the new bond between chain[2k] and chain[2k+1], factored
// through the old bond to the right of chain[2k+1].
BondEnvironment<double> bond_metric_pmps(const std::vector<Site>& chain, std::size_t k);

// chain[2k] <- chain[2k] a, chain[2k+1] <- b^T chain[2k+1].
void absorb_bond(std::vector<Site>& chain, std::size_t k, const Matrix<double>& a, const Matrix<double>& b);

struct ChainCost {
  double absolute = 0;
  double relative = 0;
};

// || target - pair_ring(chain) ||^2 with the target given as a ring of merged pairs.
ChainCost chain_cost(const std::vector<Site>& target, const std::vector<Site>& chain);

struct AlsOptions {
  int max_sweeps = 100;
  double tol = 1e-10;
  double rcond = 1e-12;
};

struct AlsResult {
  std::vector<Site> chain;
  std::vector<double> cost_trace;  // relative cost after every single-site solve, first entry initial
  int sweeps = 0;
};

AlsResult als_optimize(const std::vector<Site>& target, const std::vector<Site>& chain, const AlsOptions& opts = {});

}  // namespace loopcut
