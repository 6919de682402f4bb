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

#include "herdsim/seeding.h"

#include <limits>
#include <numeric>
#include <utility>

namespace herdsim {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> labels) {
  std::uint64_t state = master;
  for (std::uint64_t label : labels) state = SplitMix64(state ^ SplitMix64(label));
  return state;
}

std::uint64_t BoundedDraw(std::mt19937_64& engine, std::uint64_t bound) {
  // 2^64 mod bound, computed without overflow.
  const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
  std::uint64_t r = engine();
  while (rem != 0 && r > limit) r = engine();
  return r % bound;
}

std::vector<std::size_t> SeededPermutation(std::size_t size, std::uint64_t seed) {
  std::vector<std::size_t> perm(size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  for (std::size_t i = size; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(BoundedDraw(engine, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace herdsim
