// Copyright 2026 The REALM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REALM_RANDOM_H_
#define REALM_RANDOM_H_

#include <cstdint>
#include <random>

namespace realm {

using Rng = std::mt19937_64;

// SplitMix64 finalizer over the combined words; used to derive independent,
// reproducible streams (per trajectory, per cycle, per restart) from one seed.
constexpr std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) {
  return MixSeed(MixSeed(a, b), c);
}

}  // namespace realm

#endif  // REALM_RANDOM_H_
