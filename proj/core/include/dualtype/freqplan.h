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

#ifndef DUALTYPE_FREQPLAN_H
#define DUALTYPE_FREQPLAN_H

#include <string>
#include <string_view>
#include <vector>

#include "dualtype/errors.h"

// Raman beat-note planning for a mode-locked comb. All frequencies are
// ordinary frequencies in Hz; no factors of 2π appear in this module.

namespace dualtype::freqplan {

struct CombSpec {
    double repetition_rate_hz;
    double pulse_width_s;

    /// Throws DomainError unless both fields are positive and finite.
    static CombSpec make(double repetition_rate_hz, double pulse_width_s);

    double bandwidth_hz() const;
    /// True iff the transform-limited comb spans the given splitting.
    bool covers(double splitting_hz) const;
};

/// Reciprocal pulse width. Throws DomainError for non-positive widths.
double comb_bandwidth(const CombSpec &comb);

enum class Species { S, F };

std::string_view species_name(Species s);
Species parse_species(std::string_view name);

struct QubitSpecies {
    Species label;
    double splitting_hz;
    int tooth_index;

    void validate() const;
};

/// Relative sign between the AOM difference term and the comb-tooth term:
///     k·f_rep + sign·(f_awg − f_pll) = splitting + detuning.
enum class BeatSign { Plus = 1, Minus = -1 };

inline int sign_of(BeatSign s) {
    return static_cast<int>(s);
}
std::string_view beat_sign_name(BeatSign s);
BeatSign parse_beat_sign(std::string_view name);

struct AomBand {
    double low_hz;
    double high_hz;

    static AomBand make(double low_hz, double high_hz);
    static AomBand standard() {
        return {200e6, 280e6};
    }
    bool contains(double f_hz) const {
        return f_hz >= low_hz && f_hz <= high_hz;
    }
    double center_hz() const {
        return 0.5 * (low_hz + high_hz);
    }
    double half_width_hz() const {
        return 0.5 * (high_hz - low_hz);
    }
};

struct FrequencyPlan {
    QubitSpecies species;
    double pll_frequency_hz;
    double awg_frequency_hz;
    double detuning_hz;
    BeatSign beat_sign;

    /// k·f_rep + sign·(f_awg − f_pll) − (splitting + detuning). Zero for a
    /// consistent plan.
    double closure_error_hz(double repetition_rate_hz) const;
};

struct ToothCandidate {
    int tooth_index;
    /// splitting − k·f_rep.
    double residual_hz;
};

class NoBridgeableTooth : public DomainError {
   public:
    NoBridgeableTooth(int nearest_tooth, double residual_hz);
    int nearest_tooth() const {
        return nearest_tooth_;
    }
    double residual_hz() const {
        return residual_hz_;
    }

   private:
    int nearest_tooth_;
    double residual_hz_;
};

class OutOfBand : public DomainError {
   public:
    OutOfBand(double frequency_hz, AomBand band);
    double frequency_hz() const {
        return frequency_hz_;
    }
    const AomBand &band() const {
        return band_;
    }

   private:
    double frequency_hz_;
    AomBand band_;
};

/// Every tooth k ≥ 1 with |splitting − k·f_rep| ≤ span, sorted by |residual|.
std::vector<ToothCandidate> select_tooth(double splitting_hz, double repetition_rate_hz, double aom_tuning_span_hz);

struct PlanRequest {
    QubitSpecies species;
    double pll_frequency_hz;
    double detuning_hz;
    BeatSign beat_sign;
};

/// Solves for the AWG tone. Both the PLL and the AWG tone must lie in `band`.
FrequencyPlan solve_awg(const PlanRequest &request, double repetition_rate_hz, const AomBand &band);

/// Plan with the PLL at the band centre and the tooth residual carried by the
/// AWG tone. Always in band when |residual ± detuning| ≤ band half-width.
FrequencyPlan plan_from_tooth(
    const QubitSpecies &species, double repetition_rate_hz, const AomBand &band, BeatSign sign, double detuning_hz = 0);

/// PLL retune that keeps f_pll − k·f_rep fixed when f_rep drifts.
double pll_drift_compensation(const QubitSpecies &species, double repetition_rate_drift_hz);

}  // namespace dualtype::freqplan

#endif
