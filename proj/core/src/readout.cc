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

#include "dualtype/readout.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "dualtype/seeding.h"

namespace dualtype::readout {

namespace {

constexpr std::array<std::string_view, kBasisSize> kLabels = {"00'", "01'", "10'", "11'"};

bool parse_row(const std::string &line, std::array<double, kBasisSize> &row) {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < kBasisSize; k++) {
        auto end = line.find(',', pos);
        if (k + 1 == kBasisSize) {
            if (end != std::string::npos) {
                return false;
            }
            end = line.size();
        } else if (end == std::string::npos) {
            return false;
        }
        std::string_view field(line.data() + pos, end - pos);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), row[k]);
        if (ec != std::errc() || ptr != field.data() + field.size()) {
            return false;
        }
        pos = end + 1;
    }
    return true;
}

double mle_step(const Probabilities &f, const ConfusionMatrix &m, Probabilities &p) {
    Probabilities predicted = m.apply(p);
    Probabilities ratio{};
    for (std::size_t i = 0; i < kBasisSize; i++) {
        if (f[i] > 0) {
            if (!(predicted[i] > 0)) {
                throw InfeasibleObservation(
                    fmt::format("outcome {} observed but has zero probability under the confusion matrix", kLabels[i]));
            }
            ratio[i] = f[i] / predicted[i];
        }
    }
    Probabilities next{};
    double total = 0;
    for (std::size_t j = 0; j < kBasisSize; j++) {
        double s = 0;
        for (std::size_t i = 0; i < kBasisSize; i++) {
            s += m(i, j) * ratio[i];
        }
        next[j] = p[j] * s;
        total += next[j];
    }
    double change = 0;
    for (std::size_t j = 0; j < kBasisSize; j++) {
        next[j] /= total;
        change = std::max(change, std::abs(next[j] - p[j]));
    }
    p = next;
    return change;
}

double sample_std(std::span<const double> xs, double mean) {
    if (xs.size() < 2) {
        return 0;
    }
    double ss = 0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / double(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

OutcomeDistribution resample(const OutcomeDistribution &d, std::mt19937_64 &rng) {
    return OutcomeDistribution::from_counts(sample_counts(d.frequencies(), d.shots(), rng));
}

}  // namespace

std::string_view basis_label(std::size_t index) {
    if (index >= kBasisSize) {
        throw DomainError("basis index out of range");
    }
    return kLabels[index];
}

ConfusionMatrix ConfusionMatrix::from_entries(const Entries &e) {
    ConfusionMatrix out;
    for (std::size_t j = 0; j < kBasisSize; j++) {
        double sum = 0;
        for (std::size_t i = 0; i < kBasisSize; i++) {
            if (!(e[i][j] >= 0) || !std::isfinite(e[i][j])) {
                throw DomainError("confusion matrix entries must be finite and non-negative");
            }
            sum += e[i][j];
        }
        if (!(sum > 0)) {
            throw DomainError(fmt::format("confusion matrix column {} is empty", kLabels[j]));
        }
        for (std::size_t i = 0; i < kBasisSize; i++) {
            out.m_[i][j] = e[i][j] / sum;
        }
    }
    return out;
}

ConfusionMatrix ConfusionMatrix::reference() {
    return from_entries({{
        {96.82, 2.14, 0.24, 0.00},
        {2.27, 97.16, 0.00, 0.24},
        {0.91, 0.23, 97.43, 4.39},
        {0.00, 0.47, 2.33, 95.38},
    }});
}

ConfusionMatrix ConfusionMatrix::identity() {
    Entries e{};
    for (std::size_t i = 0; i < kBasisSize; i++) {
        e[i][i] = 1;
    }
    return from_entries(e);
}

ConfusionMatrix ConfusionMatrix::from_csv(std::istream &in) {
    Entries e{};
    std::size_t rows = 0;
    std::string line;
    int line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        line_no++;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::array<double, kBasisSize> row{};
        if (!parse_row(line, row)) {
            if (!seen_content) {
                seen_content = true;
                continue;
            }
            throw DomainError(fmt::format("confusion matrix CSV line {}: expected four numbers", line_no));
        }
        seen_content = true;
        if (rows == kBasisSize) {
            throw DomainError(fmt::format("confusion matrix CSV line {}: more than four rows", line_no));
        }
        e[rows++] = row;
    }
    if (rows != kBasisSize) {
        throw DomainError("confusion matrix CSV needs exactly four rows");
    }
    double max_column = 0;
    for (std::size_t j = 0; j < kBasisSize; j++) {
        double sum = 0;
        for (std::size_t i = 0; i < kBasisSize; i++) {
            sum += e[i][j];
        }
        max_column = std::max(max_column, sum);
    }
    if (max_column > 1.5) {
        for (auto &row : e) {
            for (auto &x : row) {
                x /= 100;
            }
        }
    }
    return from_entries(e);
}

Probabilities ConfusionMatrix::column(std::size_t prepared) const {
    if (prepared >= kBasisSize) {
        throw DomainError("basis index out of range");
    }
    Probabilities out{};
    for (std::size_t i = 0; i < kBasisSize; i++) {
        out[i] = m_[i][prepared];
    }
    return out;
}

Probabilities ConfusionMatrix::apply(const Probabilities &p) const {
    Probabilities out{};
    for (std::size_t i = 0; i < kBasisSize; i++) {
        for (std::size_t j = 0; j < kBasisSize; j++) {
            out[i] += m_[i][j] * p[j];
        }
    }
    return out;
}

void ConfusionMatrix::write_csv(std::ostream &out) const {
    out << "measured\\prepared";
    for (auto label : kLabels) {
        out << ',' << label;
    }
    out << '\n';
    for (std::size_t i = 0; i < kBasisSize; i++) {
        out << fmt::format("{},{},{},{}\n", m_[i][0], m_[i][1], m_[i][2], m_[i][3]);
    }
}

OutcomeDistribution OutcomeDistribution::from_counts(const std::array<uint64_t, kBasisSize> &counts) {
    uint64_t total = 0;
    for (auto c : counts) {
        total += c;
    }
    if (total == 0) {
        throw DomainError("outcome distribution has no shots");
    }
    OutcomeDistribution out;
    out.shots_ = total;
    for (std::size_t i = 0; i < kBasisSize; i++) {
        out.f_[i] = double(counts[i]) / double(total);
    }
    return out;
}

OutcomeDistribution OutcomeDistribution::from_frequencies(const Probabilities &frequencies, uint64_t shots) {
    double total = 0;
    for (double x : frequencies) {
        if (!(x >= 0) || !std::isfinite(x)) {
            throw DomainError("outcome frequencies must be non-negative");
        }
        total += x;
    }
    if (std::abs(total - 1) > 1e-9) {
        throw DomainError(fmt::format("outcome frequencies sum to {}, not 1", total));
    }
    OutcomeDistribution out;
    out.f_ = frequencies;
    out.shots_ = shots;
    return out;
}

double log_likelihood(const Probabilities &frequencies, const ConfusionMatrix &m, const Probabilities &p) {
    Probabilities predicted = m.apply(p);
    double ll = 0;
    for (std::size_t i = 0; i < kBasisSize; i++) {
        if (frequencies[i] > 0) {
            ll += frequencies[i] * std::log(predicted[i]);
        }
    }
    return ll;
}

MleResult mle_correct_detailed(const OutcomeDistribution &observed, const ConfusionMatrix &m, const MleOptions &options) {
    const auto &f = observed.frequencies();
    Probabilities p;
    p.fill(1.0 / kBasisSize);
    MleResult out{};
    out.converged = false;
    int it = 0;
    while (it < options.max_iterations) {
        double change = mle_step(f, m, p);
        it++;
        if (options.on_iteration) {
            options.on_iteration(it, log_likelihood(f, m, p), p);
        }
        if (change < options.tolerance) {
            out.converged = true;
            break;
        }
    }
    Probabilities predicted = m.apply(p);
    for (std::size_t i = 0; i < kBasisSize; i++) {
        if (f[i] > 0 && !(predicted[i] > 0)) {
            throw InfeasibleObservation(
                fmt::format("outcome {} observed but has zero probability at the optimum", kLabels[i]));
        }
    }
    out.p = p;
    out.iterations = it;
    out.log_likelihood = log_likelihood(f, m, p);
    return out;
}

Probabilities mle_correct(const OutcomeDistribution &observed, const ConfusionMatrix &m) {
    return mle_correct_detailed(observed, m).p;
}

double parity_of(const Probabilities &p) {
    return p[0] - p[1] - p[2] + p[3];
}

ParityFit fit_parity(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 4) {
        throw DomainError("parity fit needs at least four samples");
    }
    double cc = 0, cs = 0, ss = 0, cy = 0, sy = 0;
    for (auto [phi, y] : samples) {
        if (!std::isfinite(phi) || !std::isfinite(y)) {
            throw DomainError("parity samples must be finite");
        }
        double c = std::cos(2 * phi);
        double s = std::sin(2 * phi);
        cc += c * c;
        cs += c * s;
        ss += s * s;
        cy += c * y;
        sy += s * y;
    }
    double det = cc * ss - cs * cs;
    if (!(det > 1e-12 * (cc + ss) * (cc + ss))) {
        throw DegeneratePhases("analysis phases are all equal modulo pi; parity fit is rank deficient");
    }
    double a = (ss * cy - cs * sy) / det;
    double b = (cc * sy - cs * cy) / det;
    double r2 = 0;
    for (auto [phi, y] : samples) {
        double e = y - a * std::cos(2 * phi) - b * std::sin(2 * phi);
        r2 += e * e;
    }
    ParityFit fit{};
    fit.cos_coefficient = a;
    fit.sin_coefficient = b;
    fit.contrast = std::min(1.0, std::hypot(a, b));
    fit.phase_offset = std::atan2(-b, a);
    fit.residual = std::sqrt(r2 / double(samples.size()));
    return fit;
}

double bell_fidelity(double population_even, double contrast) {
    if (!(population_even >= 0 && population_even <= 1 && contrast >= 0 && contrast <= 1)) {
        throw DomainError("population and contrast must lie in [0, 1]");
    }
    return (population_even + contrast) / 2;
}

std::array<uint64_t, kBasisSize> sample_counts(const Probabilities &p, uint64_t shots, std::mt19937_64 &rng) {
    std::array<uint64_t, kBasisSize> counts{};
    uint64_t remaining = shots;
    double mass = 1;
    for (std::size_t i = 0; i + 1 < kBasisSize && remaining > 0; i++) {
        double q = mass > 0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<uint64_t> draw(remaining, q);
        counts[i] = draw(rng);
        remaining -= counts[i];
        mass -= p[i];
    }
    counts[kBasisSize - 1] += remaining;
    return counts;
}

MleOptions bootstrap_mle_options() {
    MleOptions o;
    o.tolerance = 1e-10;
    o.max_iterations = 20000;
    return o;
}

BootstrapResult bootstrap_uncertainty(const OutcomeDistribution &observed, const ConfusionMatrix &m, int resamples, uint64_t seed) {
    if (resamples < 100) {
        throw DomainError("bootstrap needs at least 100 resamples");
    }
    if (observed.shots() == 0) {
        throw DomainError("bootstrap needs a finite shot count");
    }
    auto options = bootstrap_mle_options();
    std::array<std::vector<double>, kBasisSize> draws;
    for (auto &d : draws) {
        d.resize(resamples);
    }
    for (int r = 0; r < resamples; r++) {
        auto rng = stream_rng(seed, uint64_t(r));
        auto p = mle_correct_detailed(resample(observed, rng), m, options).p;
        for (std::size_t j = 0; j < kBasisSize; j++) {
            draws[j][r] = p[j];
        }
    }
    BootstrapResult out{};
    for (std::size_t j = 0; j < kBasisSize; j++) {
        out.mean[j] = mean_of(draws[j]);
        out.standard_error[j] = sample_std(draws[j], out.mean[j]);
    }
    return out;
}

FidelityEstimate bootstrap_fidelity(
    const OutcomeDistribution &population,
    std::span<const ParityScanPoint> parity_scan,
    const ConfusionMatrix &m,
    int resamples,
    uint64_t seed,
    std::array<std::size_t, 2> targets) {
    if (resamples < 100) {
        throw DomainError("bootstrap needs at least 100 resamples");
    }
    if (targets[0] >= kBasisSize || targets[1] >= kBasisSize || targets[0] == targets[1]) {
        throw DomainError("Bell targets must be two distinct basis states");
    }
    if (population.shots() == 0) {
        throw DomainError("bootstrap needs a finite shot count");
    }
    for (const auto &pt : parity_scan) {
        if (pt.observed.shots() == 0) {
            throw DomainError("bootstrap needs a finite shot count");
        }
    }

    auto estimate = [&](const OutcomeDistribution &pop, std::span<const OutcomeDistribution> scan, const MleOptions &opt) {
        auto p = mle_correct_detailed(pop, m, opt).p;
        double even = p[targets[0]] + p[targets[1]];
        std::vector<std::pair<double, double>> samples;
        samples.reserve(scan.size());
        for (std::size_t k = 0; k < scan.size(); k++) {
            samples.emplace_back(parity_scan[k].analysis_phase, parity_of(mle_correct_detailed(scan[k], m, opt).p));
        }
        double contrast = fit_parity(samples).contrast;
        return std::array<double, 3>{even, contrast, bell_fidelity(std::clamp(even, 0.0, 1.0), contrast)};
    };

    std::vector<OutcomeDistribution> scan;
    for (const auto &pt : parity_scan) {
        scan.push_back(pt.observed);
    }
    auto point = estimate(population, scan, MleOptions{});

    auto options = bootstrap_mle_options();
    std::array<std::vector<double>, 3> draws;
    for (auto &d : draws) {
        d.resize(resamples);
    }
    std::vector<OutcomeDistribution> scan_draw(scan.size(), scan.empty() ? population : scan[0]);
    for (int r = 0; r < resamples; r++) {
        auto rng = stream_rng(seed, uint64_t(r));
        auto pop = resample(population, rng);
        for (std::size_t k = 0; k < scan.size(); k++) {
            scan_draw[k] = resample(scan[k], rng);
        }
        auto e = estimate(pop, scan_draw, options);
        for (std::size_t q = 0; q < 3; q++) {
            draws[q][r] = e[q];
        }
    }
    FidelityEstimate out{};
    out.population_even = point[0];
    out.contrast = point[1];
    out.fidelity = point[2];
    out.population_std = sample_std(draws[0], mean_of(draws[0]));
    out.contrast_std = sample_std(draws[1], mean_of(draws[1]));
    out.fidelity_std = sample_std(draws[2], mean_of(draws[2]));
    return out;
}

}  // namespace dualtype::readout
