// Copyright 2026 The Herdsim Authors
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

#ifndef HERDSIM_SEEDING_H_
#define HERDSIM_SEEDING_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace herdsim {

// Identifier written into run metadata so shuffles can be replayed by other
// implementations:
//   engine   std::mt19937_64 seeded with the 64-bit seed
//   bounded  draw r = engine() until r < 2^64 - (2^64 mod m); return r mod m
//   shuffle  for i = size-1 down to 1: swap(v[i], v[bounded(i+1)])
inline constexpr std::string_view kShuffleAlgorithm =
    "mt19937_64+rejection-mod+fisher-yates-desc";

// Seed derivation path:
//   state = master; for each label: state = splitmix64(state ^ splitmix64(label))
inline constexpr std::string_view kSeedDerivation =
    "splitmix64-chain(master, labels...)";

std::uint64_t SplitMix64(std::uint64_t x);

std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> labels);

// Stream labels for DeriveSeed.
enum SeedStream : std::uint64_t {
  kTrajectoryStream = 1,
  kCurationStream = 2,
};

std::uint64_t BoundedDraw(std::mt19937_64& engine, std::uint64_t bound);

// Permutation of 0..size-1.
std::vector<std::size_t> SeededPermutation(std::size_t size, std::uint64_t seed);

template <typename T>
std::vector<T> SeededShuffle(const std::vector<T>& items, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(items.size());
  for (std::size_t idx : SeededPermutation(items.size(), seed)) out.push_back(items[idx]);
  return out;
}

}  // namespace herdsim

#endif  // HERDSIM_SEEDING_H_
