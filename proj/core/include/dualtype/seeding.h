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

#ifndef DUALTYPE_SEEDING_H
#define DUALTYPE_SEEDING_H

#include <cstdint>
#include <random>

namespace dualtype {

/// SplitMix64 finaliser. Used to derive independent stream seeds.
uint64_t mix_seed(uint64_t x);

/// Seed for the stream with the given index. The result depends only on
/// (seed, index), so Monte Carlo work can be split in any order.
uint64_t derive_seed(uint64_t seed, uint64_t index);

/// Generator for one independent Monte Carlo stream.
std::mt19937_64 stream_rng(uint64_t seed, uint64_t index);

}  // namespace dualtype

#endif
