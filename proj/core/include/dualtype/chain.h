// Copyright 2026 The dualtype Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DUALTYPE_CHAIN_H
#define DUALTYPE_CHAIN_H

#include <span>
#include <vector>

#include "dualtype/errors.h"

namespace dualtype::chain {

struct IonChainConfig {
    /// Charge of each ion in elementary charges, in axial order.
    std::vector<int> charges;
    double trap_curvature = 1;

    void validate() const;
};

struct EquilibriumResult {
    /// Positions in units of z₀, the half-separation of two singly charged ions.
    std::vector<double> positions;
    /// Same positions in the raw units of the potential.
    std::vector<double> raw_positions;
    double z0;
    bool converged;
    /// Norm of ∇V at the solution, made dimensionless by z₀².
    double residual_force_norm;
    int iterations;
};

/// z₀ = (1/(4κ))^{1/3} for V = Σ κQᵢzᵢ²/2 + Σ QᵢQⱼ/|zᵢ − zⱼ|.
double unit_half_separation(double trap_curvature);

inline constexpr int kMaxNewtonIterations = 10000;
inline constexpr double kForceTolerance = 1e-10;

/// Minimises the axial potential by damped Newton iteration from equally
/// spaced positions. The confinement term is linear in charge.
EquilibriumResult equilibrium_positions(const IonChainConfig &config);

/// As above, starting from `initial_guess` (raw units, strictly increasing).
EquilibriumResult equilibrium_positions(const IonChainConfig &config, std::span<const double> initial_guess);

}  // namespace dualtype::chain

#endif
