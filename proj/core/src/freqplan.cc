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

#include "dualtype/freqplan.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace dualtype::freqplan {

namespace {

bool positive_finite(double x) {
    return std::isfinite(x) && x > 0;
}

std::string describe_band(const AomBand &band) {
    return fmt::format("AOM band [{} MHz, {} MHz]", band.low_hz / 1e6, band.high_hz / 1e6);
}

}  // namespace

CombSpec CombSpec::make(double repetition_rate_hz, double pulse_width_s) {
    if (!positive_finite(repetition_rate_hz)) {
        throw DomainError("comb repetition rate must be positive");
    }
    if (!positive_finite(pulse_width_s)) {
        throw DomainError("comb pulse width must be positive");
    }
    return {repetition_rate_hz, pulse_width_s};
}

double CombSpec::bandwidth_hz() const {
    return comb_bandwidth(*this);
}

bool CombSpec::covers(double splitting_hz) const {
    return splitting_hz < bandwidth_hz();
}

double comb_bandwidth(const CombSpec &comb) {
    if (!positive_finite(comb.pulse_width_s)) {
        throw DomainError("comb pulse width must be positive");
    }
    return 1.0 / comb.pulse_width_s;
}

std::string_view species_name(Species s) {
    return s == Species::S ? "S" : "F";
}

Species parse_species(std::string_view name) {
    if (name == "S") {
        return Species::S;
    }
    if (name == "F") {
        return Species::F;
    }
    throw DomainError("unknown qubit species '" + std::string(name) + "'");
}

void QubitSpecies::validate() const {
    if (!positive_finite(splitting_hz)) {
        throw DomainError("qubit splitting must be positive");
    }
    if (tooth_index < 1) {
        throw DomainError("comb tooth index must be at least 1");
    }
}

std::string_view beat_sign_name(BeatSign s) {
    return s == BeatSign::Plus ? "Plus" : "Minus";
}

BeatSign parse_beat_sign(std::string_view name) {
    if (name == "Plus" || name == "+") {
        return BeatSign::Plus;
    }
    if (name == "Minus" || name == "-") {
        return BeatSign::Minus;
    }
    throw DomainError("unknown beat sign '" + std::string(name) + "'");
}

AomBand AomBand::make(double low_hz, double high_hz) {
    if (!positive_finite(low_hz) || !positive_finite(high_hz) || !(low_hz < high_hz)) {
        throw DomainError("AOM band needs 0 < low < high");
    }
    return {low_hz, high_hz};
}

double FrequencyPlan::closure_error_hz(double repetition_rate_hz) const {
    double bridged = species.tooth_index * repetition_rate_hz + sign_of(beat_sign) * (awg_frequency_hz - pll_frequency_hz);
    return bridged - (species.splitting_hz + detuning_hz);
}

NoBridgeableTooth::NoBridgeableTooth(int nearest_tooth, double residual_hz)
    : DomainError(
          "no comb tooth within the AOM tuning span; nearest k=" + std::to_string(nearest_tooth) +
          " leaves residual " + std::to_string(residual_hz) + " Hz"),
      nearest_tooth_(nearest_tooth),
      residual_hz_(residual_hz) {
}

OutOfBand::OutOfBand(double frequency_hz, AomBand band)
    : DomainError(
          fmt::format("required AOM frequency {} MHz lies outside the {}", frequency_hz / 1e6, describe_band(band))),
      frequency_hz_(frequency_hz),
      band_(band) {
}

std::vector<ToothCandidate> select_tooth(double splitting_hz, double repetition_rate_hz, double aom_tuning_span_hz) {
    if (!positive_finite(repetition_rate_hz)) {
        throw DomainError("repetition rate must be positive");
    }
    if (!positive_finite(splitting_hz)) {
        throw DomainError("splitting must be positive");
    }
    if (!(aom_tuning_span_hz >= 0)) {
        throw DomainError("AOM tuning span must be non-negative");
    }

    auto lo = static_cast<long long>(std::ceil((splitting_hz - aom_tuning_span_hz) / repetition_rate_hz));
    auto hi = static_cast<long long>(std::floor((splitting_hz + aom_tuning_span_hz) / repetition_rate_hz));
    lo = std::max(lo, 1LL);

    std::vector<ToothCandidate> out;
    for (long long k = lo; k <= hi; k++) {
        double residual = splitting_hz - static_cast<double>(k) * repetition_rate_hz;
        if (std::abs(residual) <= aom_tuning_span_hz) {
            out.push_back({static_cast<int>(k), residual});
        }
    }
    if (out.empty()) {
        auto nearest = std::max(1LL, std::llround(splitting_hz / repetition_rate_hz));
        throw NoBridgeableTooth(static_cast<int>(nearest), splitting_hz - static_cast<double>(nearest) * repetition_rate_hz);
    }
    std::stable_sort(out.begin(), out.end(), [](const ToothCandidate &a, const ToothCandidate &b) {
        return std::abs(a.residual_hz) < std::abs(b.residual_hz);
    });
    return out;
}

FrequencyPlan solve_awg(const PlanRequest &request, double repetition_rate_hz, const AomBand &band) {
    request.species.validate();
    if (!positive_finite(repetition_rate_hz)) {
        throw DomainError("repetition rate must be positive");
    }
    if (!std::isfinite(request.pll_frequency_hz) || !std::isfinite(request.detuning_hz)) {
        throw DomainError("plan inputs must be finite");
    }
    if (!band.contains(request.pll_frequency_hz)) {
        throw OutOfBand(request.pll_frequency_hz, band);
    }

    double target = request.species.splitting_hz + request.detuning_hz;
    double comb_term = request.species.tooth_index * repetition_rate_hz;
    double awg = request.pll_frequency_hz + sign_of(request.beat_sign) * (target - comb_term);
    if (!band.contains(awg)) {
        throw OutOfBand(awg, band);
    }
    return {request.species, request.pll_frequency_hz, awg, request.detuning_hz, request.beat_sign};
}

FrequencyPlan plan_from_tooth(
    const QubitSpecies &species, double repetition_rate_hz, const AomBand &band, BeatSign sign, double detuning_hz) {
    return solve_awg({species, band.center_hz(), detuning_hz, sign}, repetition_rate_hz, band);
}

double pll_drift_compensation(const QubitSpecies &species, double repetition_rate_drift_hz) {
    return species.tooth_index * repetition_rate_drift_hz;
}

}  // namespace dualtype::freqplan
