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
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"

using namespace dualtype;
using namespace dualtype::chain;

TEST(chain, two_ion_closed_form) {
    for (auto [q1, q2] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 1}, std::pair{1, 3}, std::pair{2, 2}}) {
        for (double kappa : {1.0, 0.37, 4.0}) {
            auto r = equilibrium_positions({{q1, q2}, kappa});
            auto want = oracle::two_ion_positions(q1, q2, kappa);
            ASSERT_TRUE(r.converged);
            EXPECT_NEAR(r.raw_positions[0], want[0], 1e-10 * std::abs(want[0]));
            EXPECT_NEAR(r.raw_positions[1], want[1], 1e-10 * std::abs(want[1]));
            EXPECT_NEAR(r.positions[0], want[0] / unit_half_separation(kappa), 1e-9);
            EXPECT_LT(r.residual_force_norm, 1e-10);
        }
    }
}

TEST(chain, equal_charges_symmetric_in_z0_units) {
    auto r = equilibrium_positions({{1, 1}});
    EXPECT_NEAR(r.positions[0], -1, 1e-12);
    EXPECT_NEAR(r.positions[1], 1, 1e-12);
}

TEST(chain, three_ions_closed_form) {
    auto r = equilibrium_positions({{1, 1, 1}});
    double a = std::cbrt(5.0 / 4.0);
    EXPECT_NEAR(r.raw_positions[0], -a, 1e-10);
    EXPECT_NEAR(r.raw_positions[1], 0, 1e-10);
    EXPECT_NEAR(r.raw_positions[2], a, 1e-10);
}

TEST(chain, longer_chain_balanced_forces) {
    IonChainConfig c{{1, 2, 1, 1, 3}, 1};
    auto r = equilibrium_positions(c);
    ASSERT_TRUE(r.converged);
    for (std::size_t i = 0; i < c.charges.size(); i++) {
        double f = c.charges[i] * r.raw_positions[i];
        for (std::size_t j = 0; j < c.charges.size(); j++) {
            if (j == i) continue;
            double d = r.raw_positions[i] - r.raw_positions[j];
            f -= c.charges[i] * c.charges[j] / (d * d) * (d > 0 ? 1 : -1);
        }
        EXPECT_NEAR(f, 0, 1e-9);
    }
    for (std::size_t i = 1; i < r.positions.size(); i++) EXPECT_GT(r.positions[i], r.positions[i - 1]);
}

TEST(chain, single_ion_at_origin) {
    auto r = equilibrium_positions({{2}});
    EXPECT_EQ(r.raw_positions[0], 0);
}

TEST(chain, poor_initial_guess_still_converges) {
    std::vector<double> guess = {-30, 0.01};
    auto r = equilibrium_positions({{1, 2}}, guess);
    EXPECT_NEAR(r.positions[0], -1.526, 5e-4);
}

TEST(chain, validation) {
    EXPECT_THROW(equilibrium_positions({{}}), DomainError);
    EXPECT_THROW(equilibrium_positions({{1, 0}}), DomainError);
    EXPECT_THROW(equilibrium_positions({{1, 1}, -1}), DomainError);
    std::vector<double> bad = {1, -1};
    EXPECT_THROW(equilibrium_positions({{1, 1}}, bad), DomainError);
}

TEST(chain, long_chains_reach_force_tolerance) {
    for (int n : {10, 30, 50, 100}) {
        for (bool mixed : {false, true}) {
            IonChainConfig c;
            for (int k = 0; k < n; k++) c.charges.push_back(mixed ? 1 + k % 2 : 1);
            auto r = equilibrium_positions(c);
            EXPECT_TRUE(r.converged) << n;
            EXPECT_LT(r.residual_force_norm, kForceTolerance) << n;
        }
    }
}
