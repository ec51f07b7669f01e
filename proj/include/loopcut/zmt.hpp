#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopcut/bond.hpp"
#include "loopcut/bond_metric.hpp"

namespace loopcut {

enum class Subspace { Diagonal, Hermitian, RealSymmetric, Full, Product };

const char* subspace_name(Subspace s);
std::optional<Subspace> parse_subspace(const std::string& name);

template <typename T>
struct ZeroModeCandidate {
  Matrix<T> z_matrix;  // unit Frobenius norm; diagonal for the diagonal subspace
  double n_value = 0;
  cplx e_lead{0, 0};
  double f_pred = 0;
  Subspace subspace = Subspace::Full;
  Eigen::Index eigen_index = 0;  // position within the lowest-N pool
  // Z = S diag(E) S^-1 (columns of S are right eigenvectors); lead indexes E_D.
  Vector<cplx> e_values;
  Matrix<cplx> s_vectors;
  Eigen::Index lead = 0;
  double cond_vectors = 1.0;
  std::vector<double> objective_trace;  // product ansatz only
};

template <typename T>
struct TruncationStep {
  std::string scheme;
  Eigen::Index dim_before = 0;
  Eigen::Index dim_after = 0;
  Matrix<T> left_absorb;   // D x (D-1)
  Matrix<T> right_absorb;  // D x (D-1)
  double f_pred = 0;
  double f_measured = 0;
  double f_pred_rel = 0;
  double f_measured_rel = 0;
  double n_value = 0;
  cplx e_lead{0, 0};
};

struct ModeOptions {
  Eigen::Index k_candidates = 0;  // 0 selects min(dim, 8)
  bool real_lead = false;         // restrict E_D to real eigenvalues
};

template <typename T>
ZeroModeCandidate<T> select_mode(const BondEnvironment<T>& env, Subspace subspace, const ModeOptions& opts = {});

template <typename T>
ZeroModeCandidate<T> select_linear_mode(const Matrix<T>& g_diag, Eigen::Index k_candidates = 0);

template <typename T>
TruncationStep<T> step_linear(const Matrix<T>& g_diag, const BondEnvironment<T>& env, Eigen::Index k_candidates = 0);

template <typename T>
TruncationStep<T> step_general(const BondEnvironment<T>& env, Subspace subspace, const ModeOptions& opts = {});

// Truncation of one dimension along an already chosen mode, z = -1/E_D.
template <typename T>
TruncationStep<T> step_from_candidate(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c);

struct ProductOptions {
  int max_iters = 200;
  double tol = 1e-12;
};

template <typename T>
ZeroModeCandidate<T> product_mode(const BondEnvironment<T>& env, const ProductOptions& opts = {});

template <typename T>
TruncationStep<T> step_product(const BondEnvironment<T>& env, const ProductOptions& opts = {});

struct Refinement {
  cplx w_min{-1, 0};
  double f_min = 0;
  double f0 = 0;
  double a = 0;
  cplx b{0, 0};
  double c = 0;
};

// Optimal rescaling of the zero-mode gauge parameter, w = E_D z.
template <typename T>
Refinement refine_w(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c);

// Bond coefficient of the variational state at w: sum_{k<D} (1 + w E_k/E_D) s_k.
template <typename T>
Matrix<cplx> coefficient_at_w(const ZeroModeCandidate<T>& c, cplx w);

template <typename T>
struct ImprovedMode {
  ZeroModeCandidate<T> mode;
  Matrix<T> epsilon;
  double residual = 0;
};

template <typename T>
ImprovedMode<T> improve_mode(const BondEnvironment<T>& env, const ZeroModeCandidate<T>& c);

// Evaluate N/|E_D|^2 for an arbitrary (normalized internally) Z.
template <typename T>
ZeroModeCandidate<T> evaluate_mode(const BondEnvironment<T>& env, const Matrix<T>& z, Subspace subspace, bool real_lead);

enum class ZmtScheme { Linear, General, Switched, Product };

const char* scheme_name(ZmtScheme s);

struct ZmtOptions {
  ZmtScheme scheme = ZmtScheme::General;
  Subspace subspace = Subspace::Full;  // for General and the general phase of Switched
  bool real_lead = false;
  double switch_threshold = 0;  // Switched: linear steps while relative step f < threshold
  Eigen::Index k_candidates = 0;
  bool eat_gauge_init = false;
  Eigen::Index general_dim_cap = 0;  // linear steps while D exceeds the cap; 0 disables
  ProductOptions product;
};

template <typename T>
struct ZmtTruncation {
  std::vector<TruncationStep<T>> steps;
  Matrix<T> left_absorb;   // D x D'
  Matrix<T> right_absorb;  // D x D'
  BondEnvironment<T> env;
  ErrorMeasure error;  // cumulative, against the original target
  Eigen::Index switch_dim = -1;  // dimension at which general steps began
  std::optional<BondTensors<T>> tensors;
};

template <typename T>
ZmtTruncation<T> truncate_to(const BondEnvironment<T>& env, Eigen::Index target_dim, const ZmtOptions& opts);

template <typename T>
ZmtTruncation<T> truncate_to(const BondEnvironment<T>& env, const BondTensors<T>& tensors, Eigen::Index target_dim,
                             const ZmtOptions& opts);

}  // namespace loopcut
