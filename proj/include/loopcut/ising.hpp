#pragma once

#include <cmath>

#include "loopcut/tensor.hpp"

namespace loopcut {

inline const double kBetaCritical = 0.5 * std::log(1.0 + std::sqrt(2.0));

// Plaquette weight with spins on the legs (l,u,r,d), each leg of dimension 2:
// T = exp(beta * (s_l s_u + s_u s_r + s_r s_d + s_d s_l)).
Tensor<double> ising_tensor(double beta);

// Exact ln Z per spin of the infinite square-lattice Ising model.
double onsager_log_z(double beta);

// Free energy per spin, -ln Z / (beta N).
double onsager_free_energy(double beta);

}  // namespace loopcut
