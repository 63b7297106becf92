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

#ifndef DUALTYPE_TOOLS_CONFIG_H
#define DUALTYPE_TOOLS_CONFIG_H

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dualtype/chain.h"
#include "dualtype/dynamics.h"
#include "dualtype/freqplan.h"
#include "dualtype/gate.h"
#include "dualtype/protocol.h"

namespace dualtype::cli {

/// Malformed or inconsistent configuration. The message starts with the
/// offending field path (or line and column for syntax errors).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct SpeciesConfig {
    freqplan::QubitSpecies species;
    double pll_frequency_hz;
    freqplan::BeatSign beat_sign;
};

struct ExperimentConfig {
    uint64_t seed = 0;
    freqplan::CombSpec comb{};
    freqplan::AomBand aom_band{};
    SpeciesConfig s{};
    SpeciesConfig f{};
    /// Center-of-mass mode first, rocking mode second.
    std::vector<dynamics::MotionalMode> modes;

    double rabi_rate_f = 0;
    double drive_s_to_f_ratio = 1;
    double decay_rate = 0;
    double rabi_stop_s = 0;
    int rabi_points = 0;
    std::size_t spectrum_ion = 0;
    double spectrum_duration_s = 0;
    double spectrum_start_hz = 0;
    double spectrum_stop_hz = 0;
    int spectrum_points = 0;
    double thermometry_pulse_area = 0;

    gate::HeuristicParams gate{};
    double target_chi = 0;
    std::size_t initial_state = 0;
    int analysis_phases = 0;
    int samples_per_segment = 0;
    gate::NoiseModel noise{};

    protocol::ErrorModel pulse_errors{};
    int rounds = 5;
    uint64_t confusion_shots = 0;
    std::filesystem::path sequences_dir;

    std::filesystem::path confusion_csv;
    uint64_t shots_per_setting = 0;
    int bootstrap_resamples = 0;

    chain::IonChainConfig chain{};

    /// Compact dump of the parsed document, used for the manifest hash.
    std::string canonical_json;
};

/// Parses and validates a configuration document. Relative file names are
/// resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir);

ExperimentConfig load_config(const std::filesystem::path &path);

/// Parses "00'", "01'", "10'", "11'" (the prime is optional).
std::size_t parse_basis_state(std::string_view text);

}  // namespace dualtype::cli

#endif
