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

#include "dualtype/protocol.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include <ceres/ceres.h>
#include <fmt/format.h>
#include <json.hpp>

#include "dualtype/seeding.h"

namespace dualtype::protocol {

namespace {

constexpr std::array<std::string_view, kLevelCount> kLevelNames = {
    "S0", "S1", "F0p", "F1p", "D52_F2", "D52_F3", "D32", "Lost"};

constexpr std::array<std::pair<PulseKind, std::string_view>, 10> kPulseNames = {{
    {PulseKind::Pi411, "Pi411"},
    {PulseKind::Pi3432_a, "Pi3432_a"},
    {PulseKind::Pi3432_b, "Pi3432_b"},
    {PulseKind::Pi3432, "Pi3432"},
    {PulseKind::Pump976, "Pump976"},
    {PulseKind::Pump370_no935, "Pump370_no935"},
    {PulseKind::Detect370, "Detect370"},
    {PulseKind::MicrowavePi, "MicrowavePi"},
    {PulseKind::MicrowavePiF, "MicrowavePiF"},
    {PulseKind::Raman355Pi, "Raman355Pi"},
}};

constexpr std::string_view kPrepareSf = R"({
  "name": "prepare_sf",
  "ions": 2,
  "steps": [
    {"pulse": "Raman355Pi", "ions": [0]},
    {"pulse": "Pi411", "ions": [1]},
    {"pulse": "Pi3432", "ions": [1]},
    "Pump976",
    "Detect370"
  ]
}
)";

constexpr std::string_view kDetectF = R"({
  "name": "detect_f",
  "ions": 1,
  "steps": [
    {"repeat": 5, "steps": ["Pi3432", "Pi411", "Pi3432", "Pump370_no935"]},
    "Detect370"
  ]
}
)";

constexpr std::string_view kDetectJoint = R"({
  "name": "detect_joint",
  "ions": 2,
  "steps": ["Pi3432", "Pi411", "Pi3432", "Detect370"]
}
)";

void exchange(LevelState &s, Level a, Level b, double eps) {
    double pa = s[a];
    double pb = s[b];
    s[a] = eps * pa + (1 - eps) * pb;
    s[b] = (1 - eps) * pa + eps * pb;
}

void pump(LevelState &s, Level from, Level to, double eps) {
    double moved = (1 - eps) * s[from];
    s[from] -= moved;
    s[to] += moved;
}

bool is_bright(Level l) {
    return l == Level::S0 || l == Level::S1 || l == Level::D32;
}

Step parse_step(const nlohmann::json &j, const std::string &where) {
    Step step;
    if (j.is_string()) {
        step.pulse = parse_pulse(j.get<std::string>());
        return step;
    }
    if (!j.is_object()) {
        throw DomainError(where + ": a step is a pulse name or an object");
    }
    if (j.contains("repeat")) {
        step.repeat = j.at("repeat").get<int>();
        if (step.repeat < 1) {
            throw DomainError(where + ".repeat: must be at least 1");
        }
    }
    if (j.contains("pulse")) {
        step.pulse = parse_pulse(j.at("pulse").get<std::string>());
        if (j.contains("ions")) {
            step.ions = j.at("ions").get<std::vector<std::size_t>>();
        }
    } else if (j.contains("steps")) {
        const auto &body = j.at("steps");
        for (std::size_t k = 0; k < body.size(); k++) {
            step.body.push_back(parse_step(body[k], fmt::format("{}.steps[{}]", where, k)));
        }
    } else {
        throw DomainError(where + ": step needs \"pulse\" or \"steps\"");
    }
    return step;
}

void check_ions(const std::vector<Step> &steps, std::size_t ion_count) {
    for (const auto &s : steps) {
        for (auto i : s.ions) {
            if (i >= ion_count) {
                throw DomainError(fmt::format("pulse addresses ion {} but the program has {} ions", i, ion_count));
            }
        }
        check_ions(s.body, ion_count);
    }
}

Program with_rounds(Program program, int rounds) {
    for (auto &s : program.steps) {
        if (!s.body.empty()) {
            s.repeat = rounds;
            return program;
        }
    }
    throw DomainError("detection program has no repeated block");
}

LevelState prepared_s(int bit, const ErrorModel &errors) {
    auto s = LevelState::pure(Level::S1);
    if (bit == 0) {
        s = apply_pulse(s, {PulseKind::MicrowavePi, errors.microwave_s});
    }
    return s;
}

LevelState prepared_f(int bit, const ErrorModel &errors) {
    auto s = LevelState::pure(Level::F0p);
    if (bit == 1) {
        s = apply_pulse(s, {PulseKind::MicrowavePiF, errors.microwave_f});
    }
    return s;
}

}  // namespace

std::string_view level_name(Level level) {
    return kLevelNames[static_cast<std::size_t>(level)];
}

LevelState LevelState::pure(Level level) {
    LevelState s;
    s[level] = 1;
    return s;
}

double LevelState::total() const {
    double t = 0;
    for (double x : p_) {
        t += x;
    }
    return t;
}

double LevelState::bright() const {
    return (*this)[Level::S0] + (*this)[Level::S1] + (*this)[Level::D32];
}

std::string_view pulse_name(PulseKind kind) {
    for (auto [k, name] : kPulseNames) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

PulseKind parse_pulse(std::string_view name) {
    for (auto [k, n] : kPulseNames) {
        if (n == name) {
            return k;
        }
    }
    throw DomainError("unknown pulse '" + std::string(name) + "'");
}

LevelState apply_pulse(const LevelState &state, const PulseOp &pulse) {
    double e = pulse.transfer_error;
    if (!(e >= 0 && e <= 1)) {
        throw DomainError("transfer error must lie in [0, 1]");
    }
    LevelState s = state;
    switch (pulse.kind) {
        case PulseKind::Pi411:
            exchange(s, Level::S0, Level::D52_F2, e);
            break;
        case PulseKind::Pi3432_a:
            exchange(s, Level::D52_F2, Level::F0p, e);
            break;
        case PulseKind::Pi3432_b:
            exchange(s, Level::D52_F3, Level::F1p, e);
            break;
        case PulseKind::Pi3432:
            exchange(s, Level::D52_F2, Level::F0p, e);
            exchange(s, Level::D52_F3, Level::F1p, e);
            break;
        case PulseKind::Pump976:
            pump(s, Level::D52_F2, Level::S0, e);
            pump(s, Level::D52_F3, Level::S1, e);
            break;
        case PulseKind::Pump370_no935:
            pump(s, Level::S0, Level::D32, e);
            pump(s, Level::S1, Level::D32, e);
            break;
        case PulseKind::Detect370:
            break;
        case PulseKind::MicrowavePi:
        case PulseKind::Raman355Pi:
            exchange(s, Level::S0, Level::S1, e);
            break;
        case PulseKind::MicrowavePiF:
            exchange(s, Level::F0p, Level::F1p, e);
            break;
    }
    return s;
}

void ErrorModel::validate() const {
    for (double e : {pi411, pi3432_a, pi3432_b, pump976, pump370, crosstalk_s, crosstalk_f, raman355, microwave_s, microwave_f}) {
        if (!(e >= 0 && e <= 1)) {
            throw DomainError("pulse errors and crosstalk must lie in [0, 1]");
        }
    }
}

double ErrorModel::error_for(PulseKind kind) const {
    switch (kind) {
        case PulseKind::Pi411:
            return pi411;
        case PulseKind::Pi3432_a:
            return pi3432_a;
        case PulseKind::Pi3432_b:
            return pi3432_b;
        case PulseKind::Pi3432:
            // Standalone apply_pulse uses one error for both tones;
            // run_program applies the a and b errors separately.
            return pi3432_a;
        case PulseKind::Pump976:
            return pump976;
        case PulseKind::Pump370_no935:
            return pump370;
        case PulseKind::Detect370:
            return 0;
        case PulseKind::MicrowavePi:
            return microwave_s;
        case PulseKind::MicrowavePiF:
            return microwave_f;
        case PulseKind::Raman355Pi:
            return raman355;
    }
    return 0;
}

Program parse_program(std::string_view json_text) {
    Program program;
    try {
        auto j = nlohmann::json::parse(json_text);
        program.name = j.value("name", "");
        program.ion_count = j.value("ions", std::size_t{1});
        if (program.ion_count < 1 || program.ion_count > 2) {
            throw DomainError("program must address one or two ions");
        }
        const auto &steps = j.at("steps");
        for (std::size_t k = 0; k < steps.size(); k++) {
            program.steps.push_back(parse_step(steps[k], fmt::format("steps[{}]", k)));
        }
    } catch (const nlohmann::json::exception &e) {
        throw DomainError(fmt::format("pulse program JSON: {}", e.what()));
    }
    check_ions(program.steps, program.ion_count);
    return program;
}

std::string_view builtin_program_text(std::string_view name) {
    if (name == "prepare_sf") {
        return kPrepareSf;
    }
    if (name == "detect_f") {
        return kDetectF;
    }
    if (name == "detect_joint") {
        return kDetectJoint;
    }
    throw DomainError("unknown built-in program '" + std::string(name) + "'");
}

Program builtin_program(std::string_view name) {
    return parse_program(builtin_program_text(name));
}

void Programs::validate() const {
    if (prepare_sf.ion_count != 2 || detect_joint.ion_count != 2) {
        throw DomainError("preparation and joint-detection programs act on two ions");
    }
    if (detect_f.ion_count != 1) {
        throw DomainError("F-type detection program acts on one ion");
    }
    with_rounds(detect_f, 1);
}

const Programs &builtin_programs() {
    static const Programs programs{
        builtin_program("prepare_sf"),
        builtin_program("detect_f"),
        builtin_program("detect_joint"),
    };
    return programs;
}

JointOutcome joint_readout(double bright_s, double bright_f, const ErrorModel &errors) {
    JointOutcome out{};
    for (int ts = 0; ts < 2; ts++) {
        for (int tf = 0; tf < 2; tf++) {
            double pt = (ts ? bright_s : 1 - bright_s) * (tf ? bright_f : 1 - bright_f);
            double read_s = ts ? 1.0 : (tf ? errors.crosstalk_s : 0.0);
            double read_f = tf ? 1.0 : (ts ? errors.crosstalk_f : 0.0);
            for (int os = 0; os < 2; os++) {
                for (int of = 0; of < 2; of++) {
                    double pr = pt * (os ? read_s : 1 - read_s) * (of ? read_f : 1 - read_f);
                    out[2 * os + (of ? 0 : 1)] += pr;
                }
            }
        }
    }
    return out;
}

SequenceResult run_program(const Program &program, const std::vector<LevelState> &initial, const ErrorModel &errors) {
    errors.validate();
    if (initial.size() != program.ion_count) {
        throw DomainError(fmt::format("program '{}' needs {} ions, got {}", program.name, program.ion_count, initial.size()));
    }
    for (const auto &s : initial) {
        if (std::abs(s.total() - 1) > 1e-9) {
            throw DomainError("initial level populations must sum to 1");
        }
    }
    const ErrorModel &e = errors;
    SequenceResult out;
    out.ions = initial;
    std::vector<double> bright(initial.size());
    bool detected = false;

    std::function<void(const std::vector<Step> &)> run = [&](const std::vector<Step> &steps) {
        for (const auto &s : steps) {
            for (int r = 0; r < s.repeat; r++) {
                if (!s.pulse) {
                    run(s.body);
                    continue;
                }
                if (*s.pulse == PulseKind::Detect370) {
                    detected = true;
                    for (std::size_t i = 0; i < out.ions.size(); i++) {
                        bright[i] = out.ions[i].bright();
                    }
                    continue;
                }
                auto apply = [&](LevelState &ion) {
                    if (*s.pulse == PulseKind::Pi3432) {
                        ion = apply_pulse(ion, {PulseKind::Pi3432_a, e.pi3432_a});
                        ion = apply_pulse(ion, {PulseKind::Pi3432_b, e.pi3432_b});
                    } else {
                        ion = apply_pulse(ion, {*s.pulse, e.error_for(*s.pulse)});
                    }
                };
                if (s.ions.empty()) {
                    for (auto &ion : out.ions) {
                        apply(ion);
                    }
                } else {
                    for (auto i : s.ions) {
                        apply(out.ions.at(i));
                    }
                }
            }
        }
    };
    run(program.steps);

    if (!detected) {
        for (std::size_t i = 0; i < out.ions.size(); i++) {
            bright[i] = out.ions[i].bright();
        }
    }
    out.bright_probability = bright;
    if (out.ions.size() == 2) {
        out.joint = joint_readout(bright[0], bright[1], errors);
    }
    return out;
}

PreparationResult run_prepare_sf(const ErrorModel &errors, const Programs &programs) {
    std::vector<LevelState> initial = {LevelState::pure(Level::S0), LevelState::pure(Level::S0)};
    auto r = run_program(programs.prepare_sf, initial, errors);

    PreparationResult out{};
    out.success_probability = (*r.joint)[2 * 1 + 1];

    // Split each ion into its bright and dark parts, then weight the four
    // true configurations by the probability of the passing readout.
    std::array<std::array<LevelState, 2>, 2> parts{};
    std::array<std::array<double, 2>, 2> mass{};
    for (std::size_t i = 0; i < 2; i++) {
        for (std::size_t l = 0; l < kLevelCount; l++) {
            auto level = static_cast<Level>(l);
            int b = is_bright(level) ? 1 : 0;
            parts[i][b][level] = r.ions[i][level];
            mass[i][b] += r.ions[i][level];
        }
    }
    std::array<LevelState, 2> post{};
    for (int t0 = 0; t0 < 2; t0++) {
        for (int t1 = 0; t1 < 2; t1++) {
            if (mass[0][t0] == 0 || mass[1][t1] == 0) {
                continue;
            }
            double read0 = t0 ? 1.0 : (t1 ? errors.crosstalk_s : 0.0);
            double read1_dark = t1 ? 0.0 : (t0 ? 1 - errors.crosstalk_f : 1.0);
            double w = mass[0][t0] * mass[1][t1] * read0 * read1_dark;
            for (std::size_t l = 0; l < kLevelCount; l++) {
                auto level = static_cast<Level>(l);
                post[0][level] += w * parts[0][t0][level] / mass[0][t0];
                post[1][level] += w * parts[1][t1][level] / mass[1][t1];
            }
        }
    }
    if (out.success_probability > 0) {
        for (auto &s : post) {
            for (std::size_t l = 0; l < kLevelCount; l++) {
                s[static_cast<Level>(l)] /= out.success_probability;
            }
        }
    }
    out.post_selected = {post[0], post[1]};
    return out;
}

FDetectionResult run_detect_f(const ErrorModel &errors, int rounds, const Programs &programs) {
    if (rounds < 1) {
        throw DomainError("F-type detection needs at least one shelving round");
    }
    auto program = with_rounds(programs.detect_f, rounds);
    auto zero = run_program(program, {LevelState::pure(Level::F0p)}, errors);
    auto one = run_program(program, {LevelState::pure(Level::F1p)}, errors);
    return {1 - zero.bright_probability[0], one.bright_probability[0]};
}

LevelState joint_exchange(const LevelState &state, const ErrorModel &errors, const Programs &programs) {
    Program single = programs.detect_joint;
    single.ion_count = 1;
    return run_program(single, {state}, errors).ions[0];
}

JointDetectionResult run_detect_joint(const ErrorModel &errors, const Programs &programs) {
    const auto &program = programs.detect_joint;
    JointDetectionResult out{};
    for (int s = 0; s < 2; s++) {
        for (int f = 0; f < 2; f++) {
            std::vector<LevelState> initial = {
                LevelState::pure(s ? Level::S1 : Level::S0),
                LevelState::pure(f ? Level::F1p : Level::F0p),
            };
            auto r = run_program(program, initial, errors);
            int k = 2 * s + f;
            out.outcomes[k] = *r.joint;
            for (int m = 0; m < 4; m++) {
                if ((m >> 1) != s) {
                    out.infidelity_s += out.outcomes[k][m] / 4;
                }
                if ((m & 1) != f) {
                    out.infidelity_f += out.outcomes[k][m] / 4;
                }
            }
        }
    }
    return out;
}

readout::ConfusionMatrix joint_confusion_exact(const ErrorModel &errors, const Programs &programs) {
    errors.validate();
    readout::ConfusionMatrix::Entries e{};
    for (int s = 0; s < 2; s++) {
        for (int f = 0; f < 2; f++) {
            auto ion_s = joint_exchange(prepared_s(s, errors), errors, programs);
            auto ion_f = joint_exchange(prepared_f(f, errors), errors, programs);
            auto outcome = joint_readout(ion_s.bright(), ion_f.bright(), errors);
            for (int m = 0; m < 4; m++) {
                e[m][2 * s + f] = outcome[m];
            }
        }
    }
    return readout::ConfusionMatrix::from_entries(e);
}

readout::ConfusionMatrix synthesize_confusion_matrix(
    const ErrorModel &errors, uint64_t shots, uint64_t seed, const Programs &programs) {
    if (shots < 1) {
        throw DomainError("confusion-matrix synthesis needs at least one shot");
    }
    auto exact = joint_confusion_exact(errors, programs);
    readout::ConfusionMatrix::Entries e{};
    for (std::size_t j = 0; j < 4; j++) {
        auto rng = stream_rng(seed, j);
        auto counts = readout::sample_counts(exact.column(j), shots, rng);
        for (std::size_t i = 0; i < 4; i++) {
            e[i][j] = double(counts[i]) / double(shots);
        }
    }
    return readout::ConfusionMatrix::from_entries(e);
}

Observables compute_observables(const ErrorModel &errors, int rounds, const Programs &programs) {
    auto f = run_detect_f(errors, rounds, programs);
    auto joint = run_detect_joint(errors, programs);
    return {run_prepare_sf(errors, programs).success_probability, f.infidelity_0p, f.infidelity_1p, joint.infidelity_s,
            joint.infidelity_f};
}

namespace {

constexpr int kParams = 7;
constexpr int kResiduals = 13;
constexpr double kRidge = 1e-2;

ErrorModel unpack(const double *z) {
    ErrorModel e;
    e.pi411 = z[0];
    e.pi3432_a = z[0] * z[1];
    e.pi3432_b = z[0] * z[2];
    e.pump976 = z[0] * z[3];
    e.pump370 = z[0] * z[4];
    e.crosstalk_s = z[5];
    e.crosstalk_f = z[6];
    return e;
}

struct CalibrationCost {
    CalibrationTargets targets;
    int rounds;
    const Programs *programs;

    bool operator()(const double *z, double *residual) const {
        ErrorModel e = unpack(z);
        auto o = compute_observables(e, rounds, *programs);
        auto m = joint_confusion_exact(e, *programs);
        const auto &t = targets.observables;
        residual[0] = o.preparation_success - t.preparation_success;
        residual[1] = o.f_infidelity_0p - t.f_infidelity_0p;
        residual[2] = o.f_infidelity_1p - t.f_infidelity_1p;
        residual[3] = o.joint_infidelity_s - t.joint_infidelity_s;
        residual[4] = o.joint_infidelity_f - t.joint_infidelity_f;
        for (int k = 0; k < 4; k++) {
            residual[5 + k] = m(k, k) - targets.diagonal[k];
        }
        for (int k = 0; k < 4; k++) {
            residual[9 + k] = kRidge * z[1 + k];
        }
        return true;
    }
};

}  // namespace

CalibrationResult calibrate_errors(const CalibrationTargets &targets, int rounds, const Programs &programs) {
    programs.validate();
    if (rounds < 1) {
        throw DomainError("F-type detection needs at least one shelving round");
    }
    // A few fixed starting points; the lowest final cost wins.
    const std::array<std::array<double, kParams>, 3> starts = {{
        {0.01, 0.5, 0.5, 0.5, 0.5, 0.01, 0.01},
        {0.02, 0.1, 0.01, 0.01, 0.01, 0.001, 0.04},
        {0.03, 0.9, 0.1, 0.1, 0.1, 0.02, 0.02},
    }};
    const std::array<double, kParams> upper = {0.5, 1, 1, 1, 1, 0.5, 0.5};

    std::array<double, kParams> best{};
    ceres::Solver::Summary best_summary;
    bool have_best = false;
    for (const auto &start : starts) {
        std::array<double, kParams> z = start;
        // Forward differences keep every probe inside the [0, 1] error domain.
        ceres::Problem problem;
        auto *cost = new ceres::NumericDiffCostFunction<CalibrationCost, ceres::FORWARD, kResiduals, kParams>(
            new CalibrationCost{targets, rounds, &programs});
        problem.AddResidualBlock(cost, nullptr, z.data());
        for (int k = 0; k < kParams; k++) {
            problem.SetParameterLowerBound(z.data(), k, 0);
            problem.SetParameterUpperBound(z.data(), k, upper[k]);
        }
        ceres::Solver::Options options;
        options.linear_solver_type = ceres::DENSE_QR;
        options.trust_region_strategy_type = ceres::DOGLEG;
        options.max_num_iterations = 500;
        options.function_tolerance = 1e-15;
        options.gradient_tolerance = 1e-15;
        options.parameter_tolerance = 1e-12;
        options.logging_type = ceres::SILENT;
        options.num_threads = 1;
        ceres::Solver::Summary summary;
        ceres::Solve(options, &problem, &summary);
        if (!have_best || summary.final_cost < best_summary.final_cost) {
            best = z;
            best_summary = summary;
            have_best = true;
        }
    }
    const auto &summary = best_summary;

    CalibrationResult out{};
    out.errors = unpack(best.data());
    out.observables = compute_observables(out.errors, rounds, programs);
    auto m = joint_confusion_exact(out.errors, programs);
    for (int k = 0; k < 4; k++) {
        out.diagonal[k] = m(k, k);
    }
    out.final_cost = summary.final_cost;
    out.converged = summary.termination_type == ceres::CONVERGENCE;
    return out;
}

}  // namespace dualtype::protocol
