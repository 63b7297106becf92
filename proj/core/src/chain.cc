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

#include "dualtype/chain.h"

#include <cmath>

#include <Eigen/Dense>

namespace dualtype::chain {

namespace {

struct Potential {
    const std::vector<int> &q;
    double kappa;

    double value(const Eigen::VectorXd &z) const {
        double v = 0;
        auto n = z.size();
        for (Eigen::Index i = 0; i < n; i++) {
            v += 0.5 * kappa * q[i] * z[i] * z[i];
            for (Eigen::Index j = i + 1; j < n; j++) {
                v += double(q[i]) * q[j] / (z[j] - z[i]);
            }
        }
        return v;
    }

    void derivatives(const Eigen::VectorXd &z, Eigen::VectorXd &grad, Eigen::MatrixXd &hess) const {
        auto n = z.size();
        grad.setZero(n);
        hess.setZero(n, n);
        for (Eigen::Index i = 0; i < n; i++) {
            grad[i] += kappa * q[i] * z[i];
            hess(i, i) += kappa * q[i];
            for (Eigen::Index j = i + 1; j < n; j++) {
                double d = z[j] - z[i];
                double qq = double(q[i]) * q[j];
                double f = qq / (d * d);
                double k = 2 * qq / (d * d * d);
                grad[i] += f;
                grad[j] -= f;
                hess(i, i) += k;
                hess(j, j) += k;
                hess(i, j) -= k;
                hess(j, i) -= k;
            }
        }
    }
};

bool ordered(const Eigen::VectorXd &z) {
    for (Eigen::Index i = 1; i < z.size(); i++) {
        if (!(z[i] > z[i - 1])) {
            return false;
        }
    }
    return true;
}

}  // namespace

void IonChainConfig::validate() const {
    if (charges.empty()) {
        throw DomainError("ion chain needs at least one ion");
    }
    for (int c : charges) {
        if (c < 1) {
            throw DomainError("ion charges must be positive integers");
        }
    }
    if (!(trap_curvature > 0) || !std::isfinite(trap_curvature)) {
        throw DomainError("trap curvature must be positive");
    }
}

double unit_half_separation(double trap_curvature) {
    if (!(trap_curvature > 0)) {
        throw DomainError("trap curvature must be positive");
    }
    return std::cbrt(1 / (4 * trap_curvature));
}

EquilibriumResult equilibrium_positions(const IonChainConfig &config) {
    config.validate();
    double z0 = unit_half_separation(config.trap_curvature);
    auto n = config.charges.size();
    std::vector<double> guess(n);
    for (std::size_t i = 0; i < n; i++) {
        guess[i] = 2 * z0 * (double(i) - 0.5 * double(n - 1));
    }
    return equilibrium_positions(config, guess);
}

EquilibriumResult equilibrium_positions(const IonChainConfig &config, std::span<const double> initial_guess) {
    config.validate();
    auto n = static_cast<Eigen::Index>(config.charges.size());
    if (static_cast<Eigen::Index>(initial_guess.size()) != n) {
        throw DomainError("initial guess length does not match the number of ions");
    }
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(initial_guess.data(), n);
    if (!ordered(z)) {
        throw DomainError("initial positions must be strictly increasing (coincident ions)");
    }

    double z0 = unit_half_separation(config.trap_curvature);
    double force_scale = z0 * z0;
    Potential pot{config.charges, config.trap_curvature};
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;

    EquilibriumResult out{};
    out.z0 = z0;
    double residual = 0;
    int it = 0;
    for (;; it++) {
        pot.derivatives(z, grad, hess);
        residual = grad.norm() * force_scale;
        if (residual < kForceTolerance || it >= kMaxNewtonIterations) {
            break;
        }
        Eigen::VectorXd step = hess.ldlt().solve(-grad);
        double v0 = pot.value(z);
        double slope = grad.dot(step);
        double g0 = grad.norm();
        // V is strictly convex on ordered configurations. Close to the
        // minimum the Armijo test on V drowns in rounding, so a step that
        // lowers |∇V| is accepted as well.
        double t = 1;
        bool accepted = false;
        Eigen::VectorXd trial, trial_grad;
        Eigen::MatrixXd trial_hess;
        for (int k = 0; k < 60 && !accepted; k++, t *= 0.5) {
            trial = z + t * step;
            if (!ordered(trial)) {
                continue;
            }
            if (pot.value(trial) <= v0 + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            pot.derivatives(trial, trial_grad, trial_hess);
            accepted = trial_grad.norm() < g0;
            if (accepted) {
                break;
            }
        }
        if (!accepted) {
            break;
        }
        z = trial;
    }

    out.iterations = it;
    out.residual_force_norm = residual;
    out.converged = residual < kForceTolerance;
    if (!out.converged) {
        throw ConvergenceError("chain equilibrium did not converge", residual);
    }
    out.raw_positions.assign(z.data(), z.data() + n);
    out.positions.resize(n);
    for (Eigen::Index i = 0; i < n; i++) {
        out.positions[i] = z[i] / z0;
    }
    return out;
}

}  // namespace dualtype::chain
