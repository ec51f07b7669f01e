#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopcut/pmps.hpp"
#include "loopcut/tensor.hpp"

namespace loopcut {

enum class TrgScheme { Tebd, Eat, Zmt1, Zmt2, Zmt3 };

const char* trg_scheme_name(TrgScheme s);
std::optional<TrgScheme> parse_trg_scheme(const std::string& name);

struct TrgOptions {
  double beta = 0.4406867935097715;
  Eigen::Index chi = 16;
  int iterations = 20;
  TrgScheme scheme = TrgScheme::Tebd;
  double delta = 1e-10;  // switch threshold of zmt2/zmt3 on the relative step error
  std::uint64_t seed = 0;
  bool run_als = true;
  AlsOptions als;
  VidalOptions vidal;
  bool eat_gauge_init = false;
  Eigen::Index general_dim_cap = 0;
  bool measure_loopiness = true;
  std::vector<TrgScheme> compare;  // further schemes evaluated on the same split; they do not drive the state
};

struct SchemeCost {
  TrgScheme scheme = TrgScheme::Tebd;
  double f_initial_rel = 0;
  std::vector<Eigen::Index> switch_dims;
};

struct TrgIterationReport {
  int iteration = 0;
  Eigen::Index ring_dim = 0;   // largest old ring bond after the Vidal gauge
  Eigen::Index split_dim = 0;  // largest new bond before truncation
  double gauge_residual = 0;
  double loopiness = -1;  // first new bond, before truncation; -1 when not measured
  double f_initial_rel = 0;
  double f_final_rel = 0;
  int als_sweeps = 0;
  double als_max_rise = 0;  // largest cost increase between consecutive solves, relative to the previous cost
  std::vector<Eigen::Index> switch_dims;  // per bond, zmt2/zmt3 only
  std::vector<SchemeCost> compared;
  double log_c_a = 0;
  double log_c_b = 0;
  double seconds = 0;
};

// Two-sublattice lattice of rank-4 tensors with legs (l,u,r,d); log_z_acc is
// ln Z per original tensor accumulated from the normalizations so far.
struct TrgState {
  Tensor<double> a;
  Tensor<double> b;
  double log_z_acc = 0;
  int iteration = 0;
  std::vector<TrgIterationReport> reports;
};

TrgState trg_init(double beta);

// Ring TL(a) -> TR(b) -> BR(a) -> BL(b) around one plaquette; each site's
// physical index is (first, second) outer leg.
PeriodicMPS plaquette_ring(const Tensor<double>& a, const Tensor<double>& b);
std::vector<std::size_t> plaquette_p1_dims(const Tensor<double>& a, const Tensor<double>& b);

struct CoarsePair {
  Tensor<double> a;
  Tensor<double> b;
  double log_c_a = 0;
  double log_c_b = 0;
};

// Contracts the eight halves into the two coarse tensors, each normalized to max-abs 1.
CoarsePair coarse_grain(const std::vector<Site>& chain);

// ln of the 2x2 torus a b / b a.
double torus_log_trace(const Tensor<double>& a, const Tensor<double>& b);

// Truncates every new bond to chi with the chosen scheme, in bond order.
// Returns the zmt switch dimensions per bond (empty for other schemes).
std::vector<Eigen::Index> truncate_chain(std::vector<Site>& chain, const TrgOptions& opts);

TrgIterationReport trg_step(TrgState& state, const TrgOptions& opts);

struct TrgResult {
  double log_z_per_tensor = 0;
  double log_z_per_spin = 0;
  double free_energy = 0;
  double onsager = 0;
  double relative_error = 0;
  std::vector<TrgIterationReport> reports;
};

// ln Z per tensor after the given state's iterations, closing with the 2x2 torus.
double log_z_estimate(const TrgState& state);

TrgResult trg_run(const TrgOptions& opts);

}  // namespace loopcut
