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

#include "dualtype/seeding.h"

namespace dualtype {

uint64_t mix_seed(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t index) {
    return mix_seed(mix_seed(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

std::mt19937_64 stream_rng(uint64_t seed, uint64_t index) {
    return std::mt19937_64(derive_seed(seed, index));
}

}  // namespace dualtype
