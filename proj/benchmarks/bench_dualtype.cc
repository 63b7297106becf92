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

#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "dualtype/chain.h"
#include "dualtype/dynamics.h"
#include "dualtype/freqplan.h"
#include "dualtype/gate.h"
#include "dualtype/protocol.h"
#include "dualtype/readout.h"

using namespace dualtype;

namespace {

gate::GateSequence calibrated() {
    auto seq = gate::build_heuristic_sequence({});
    return gate::scale_rabi(seq, gate::calibrate_rabi(seq, std::numbers::pi / 4));
}

void BM_solve_awg(benchmark::State &state) {
    freqplan::PlanRequest req{{freqplan::Species::S, 12.642e9, 158}, 240e6, 2.271e6, freqplan::BeatSign::Plus};
    for (auto _ : state) {
        benchmark::DoNotOptimize(freqplan::solve_awg(req, 80e6, freqplan::AomBand::standard()));
    }
}
BENCHMARK(BM_solve_awg);

void BM_sideband_thermal(benchmark::State &state) {
    dynamics::MotionalMode m{dynamics::ModeLabel::CenterOfMass, 2.271e6, {0.1, 0.1}, 0.3};
    dynamics::DriveParams d{2e5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(dynamics::sideband_flip_probability(m, 0, d, dynamics::Sideband::Blue, 50e-6));
    }
}
BENCHMARK(BM_sideband_thermal);

void BM_build_and_calibrate_gate(benchmark::State &state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(calibrated());
    }
}
BENCHMARK(BM_build_and_calibrate_gate);

void BM_trajectory(benchmark::State &state) {
    auto seq = calibrated();
    for (auto _ : state) {
        benchmark::DoNotOptimize(gate::integrate_displacement(seq, 0, {1, 1}, int(state.range(0))));
    }
}
BENCHMARK(BM_trajectory)->Arg(0)->Arg(16)->Arg(128);

void BM_simulate_gate(benchmark::State &state) {
    auto seq = calibrated();
    auto phases = gate::default_analysis_phases();
    gate::NoiseModel noise{2.5e-3, 2e-3, int(state.range(0)), 1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gate::simulate_gate(seq, 0, noise, phases));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_simulate_gate)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_mle(benchmark::State &state) {
    auto m = readout::ConfusionMatrix::reference();
    auto f = readout::OutcomeDistribution::from_frequencies(m.apply({0.47, 0.02, 0.03, 0.48}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(readout::mle_correct(f, m));
    }
}
BENCHMARK(BM_mle);

void BM_bootstrap_fidelity(benchmark::State &state) {
    auto m = readout::ConfusionMatrix::reference();
    std::mt19937_64 rng(1);
    auto sample = [&](const readout::Probabilities &p) {
        return readout::OutcomeDistribution::from_counts(readout::sample_counts(m.apply(p), 10000, rng));
    };
    std::vector<readout::ParityScanPoint> scan;
    for (int k = 0; k < 32; k++) {
        double phi = std::numbers::pi * k / 32, par = 0.9 * std::cos(2 * phi);
        scan.push_back({phi, sample({(1 + par) / 4, (1 - par) / 4, (1 - par) / 4, (1 + par) / 4})});
    }
    auto pop = sample({0.48, 0.01, 0.02, 0.49});
    for (auto _ : state) {
        benchmark::DoNotOptimize(readout::bootstrap_fidelity(pop, scan, m, int(state.range(0)), 7));
    }
}
BENCHMARK(BM_bootstrap_fidelity)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_protocol_observables(benchmark::State &state) {
    protocol::ErrorModel e;
    e.pi411 = 0.02;
    e.crosstalk_f = 0.04;
    for (auto _ : state) {
        benchmark::DoNotOptimize(protocol::compute_observables(e));
    }
}
BENCHMARK(BM_protocol_observables);

void BM_protocol_calibration(benchmark::State &state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(protocol::calibrate_errors());
    }
}
BENCHMARK(BM_protocol_calibration)->Unit(benchmark::kMillisecond);

void BM_chain(benchmark::State &state) {
    chain::IonChainConfig c;
    for (int k = 0; k < state.range(0); k++) c.charges.push_back(1 + k % 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(chain::equilibrium_positions(c));
    }
}
BENCHMARK(BM_chain)->Arg(2)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
