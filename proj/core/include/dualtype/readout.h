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

#ifndef DUALTYPE_READOUT_H
#define DUALTYPE_READOUT_H

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dualtype/errors.h"

namespace dualtype::readout {

/// Two-qubit basis in the order 00', 01', 10', 11' (S qubit first).
inline constexpr std::size_t kBasisSize = 4;
using Probabilities = std::array<double, kBasisSize>;

std::string_view basis_label(std::size_t index);

/// Column-stochastic readout map; entry (measured, prepared).
class ConfusionMatrix {
   public:
    using Entries = std::array<std::array<double, kBasisSize>, kBasisSize>;

    /// Rows are measured states, columns prepared states. Columns are
    /// rescaled to sum to one; negative entries or empty columns throw.
    static ConfusionMatrix from_entries(const Entries &measured_by_prepared);
    /// Measured two-ion readout table, renormalised per column.
    static ConfusionMatrix reference();
    static ConfusionMatrix identity();
    /// Four rows of four comma-separated numbers, optionally preceded by a
    /// header line. Percentages are detected from the column sums.
    static ConfusionMatrix from_csv(std::istream &in);

    double operator()(std::size_t measured, std::size_t prepared) const {
        return m_[measured][prepared];
    }
    const Entries &entries() const {
        return m_;
    }
    Probabilities column(std::size_t prepared) const;
    Probabilities apply(const Probabilities &p) const;

    /// Writes fractions with a header naming the prepared states.
    void write_csv(std::ostream &out) const;

   private:
    Entries m_{};
};

class OutcomeDistribution {
   public:
    static OutcomeDistribution from_counts(const std::array<uint64_t, kBasisSize> &counts);
    /// `shots` may be zero when the frequencies are exact.
    static OutcomeDistribution from_frequencies(const Probabilities &frequencies, uint64_t shots = 0);

    const Probabilities &frequencies() const {
        return f_;
    }
    uint64_t shots() const {
        return shots_;
    }

   private:
    Probabilities f_{};
    uint64_t shots_ = 0;
};

class InfeasibleObservation : public DomainError {
   public:
    using DomainError::DomainError;
};

struct MleOptions {
    double tolerance = 1e-12;
    int max_iterations = 100000;
    /// Called after every update with (iteration, log-likelihood, p).
    std::function<void(int, double, const Probabilities &)> on_iteration;
};

struct MleResult {
    Probabilities p;
    int iterations;
    bool converged;
    double log_likelihood;
};

/// Σ fᵢ log (M p)ᵢ over outcomes with fᵢ > 0.
double log_likelihood(const Probabilities &frequencies, const ConfusionMatrix &m, const Probabilities &p);

/// Maximum-likelihood true distribution by the multiplicative EM update
/// pⱼ ← pⱼ Σᵢ Mᵢⱼ fᵢ/(M p)ᵢ, started from the uniform distribution.
MleResult mle_correct_detailed(const OutcomeDistribution &observed, const ConfusionMatrix &m, const MleOptions &options = {});

Probabilities mle_correct(const OutcomeDistribution &observed, const ConfusionMatrix &m);

/// p₀₀' − p₀₁' − p₁₀' + p₁₁'.
double parity_of(const Probabilities &p);

struct ParityFit {
    /// √(a² + b²) clamped to [0, 1].
    double contrast;
    /// φ₀ in Π(φ) = C cos(2φ + φ₀), in (−π, π].
    double phase_offset;
    /// Root-mean-square residual of the fit.
    double residual;
    double cos_coefficient;
    double sin_coefficient;
};

class DegeneratePhases : public DomainError {
   public:
    using DomainError::DomainError;
};

/// Linear least squares of Π(φ) on cos 2φ and sin 2φ.
ParityFit fit_parity(std::span<const std::pair<double, double>> samples);

/// (population of the two target states + parity contrast)/2.
double bell_fidelity(double population_even, double contrast);

/// Multinomial sample of `shots` outcomes from `p`.
std::array<uint64_t, kBasisSize> sample_counts(const Probabilities &p, uint64_t shots, std::mt19937_64 &rng);

inline constexpr int kDefaultResamples = 1000;

/// Looser EM settings used inside bootstrap loops.
MleOptions bootstrap_mle_options();

struct BootstrapResult {
    Probabilities mean;
    Probabilities standard_error;
};

/// Resamples the observed counts, corrects each resample and reports the
/// spread of the corrected distribution.
BootstrapResult bootstrap_uncertainty(
    const OutcomeDistribution &observed, const ConfusionMatrix &m, int resamples, uint64_t seed);

struct ParityScanPoint {
    double analysis_phase;
    OutcomeDistribution observed;
};

struct FidelityEstimate {
    double population_even;
    double contrast;
    double fidelity;
    double population_std;
    double contrast_std;
    double fidelity_std;
};

/// Point estimate and bootstrap spread of the Bell fidelity from a
/// population measurement and a parity scan. `targets` are the two basis
/// indices whose populations make up the ideal state.
FidelityEstimate bootstrap_fidelity(
    const OutcomeDistribution &population,
    std::span<const ParityScanPoint> parity_scan,
    const ConfusionMatrix &m,
    int resamples,
    uint64_t seed,
    std::array<std::size_t, 2> targets = {0, 3});

}  // namespace dualtype::readout

#endif
