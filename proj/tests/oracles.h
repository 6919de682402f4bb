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

// Brute-force references for the equilibrium code. They share no code with
// the library: each one re-derives its answer straight from the attendance
// rule theta + beta * N - price >= 0.

#ifndef HERDSIM_TESTS_ORACLES_H_
#define HERDSIM_TESTS_ORACLES_H_

#include <algorithm>
#include <random>
#include <vector>

namespace herdsim::testing {

struct Instance {
  double beta = 0.0;
  std::vector<double> thetas;
  double price = 0.0;
};

inline int CountAttending(const Instance& inst, int n_assumed) {
  int count = 0;
  for (double theta : inst.thetas) {
    if ((theta + inst.beta * n_assumed) - inst.price >= 0) ++count;
  }
  return count;
}

// Every N in [0, n] that reproduces itself.
inline std::vector<int> EnumerateFee(const Instance& inst) {
  std::vector<int> out;
  const int n = static_cast<int>(inst.thetas.size());
  for (int level = 0; level <= n; ++level) {
    if (CountAttending(inst, level) == level) out.push_back(level);
  }
  return out;
}

inline std::vector<int> NaiveIterate(const Instance& inst, int n0) {
  std::vector<int> path{n0};
  for (std::size_t i = 0; i <= inst.thetas.size() + 1; ++i) {
    int next = CountAttending(inst, path.back());
    if (next == path.back()) {
      path.push_back(next);
      return path;
    }
    path.push_back(next);
  }
  return path;
}

// Distinct thetas drawn on a quarter grid so that boundary prices are hit
// exactly; prices on the same grid plus a few off-grid points.
inline Instance RandomInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 10);
  std::uniform_int_distribution<int> beta_steps(0, 6);  // 0 .. 1.5
  Instance inst;
  const int n = n_dist(rng);
  inst.beta = 0.25 * beta_steps(rng);
  std::vector<int> grid(40);
  for (int i = 0; i < 40; ++i) grid[i] = i + 1;
  std::shuffle(grid.begin(), grid.end(), rng);
  for (int i = 0; i < n; ++i) inst.thetas.push_back(0.25 * grid[i]);
  std::uniform_int_distribution<int> price_steps(0, 120);
  std::uniform_int_distribution<int> jitter(0, 3);
  inst.price = 0.25 * price_steps(rng) + (jitter(rng) == 0 ? 0.1 : 0.0);
  return inst;
}

// Real-valued variant: beta uniform in [0, 1.5], distinct thetas uniform in
// [0, 10], price on a 0.05 grid.
inline Instance RandomContinuousInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 10);
  std::uniform_real_distribution<double> beta_dist(0.0, 1.5);
  std::uniform_real_distribution<double> theta_dist(0.0, 10.0);
  std::uniform_int_distribution<int> price_steps(0, 500);
  Instance inst;
  const int n = n_dist(rng);
  inst.beta = beta_dist(rng);
  while (static_cast<int>(inst.thetas.size()) < n) {
    double theta = theta_dist(rng);
    if (std::find(inst.thetas.begin(), inst.thetas.end(), theta) == inst.thetas.end()) {
      inst.thetas.push_back(theta);
    }
  }
  inst.price = 0.05 * price_steps(rng);
  return inst;
}

}  // namespace herdsim::testing

#endif  // HERDSIM_TESTS_ORACLES_H_
