// Copyright 2026 The privlift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/rng.hpp"

namespace privlift::dp {

// Zero-concentrated DP budgets for the two released statistics, plus the
// confidence level and the per-user outcome cap that drives sensitivity.
struct DpParams {
  double rho1 = 0.5;       // budget for the lift point estimate
  double rho2 = 0.5;       // budget for the standard error
  double alpha = 0.05;     // two-sided CI level
  uint64_t r_bound = 100;  // per-user clamp, whole outcome units
};

// Worst-case change from one user switching arms or changing outcome.
struct Sensitivities {
  double lift;  // R/n_T + R/n_C
  double se;    // sqrt((n*-1)/n*^3) * R with n* the smaller arm
};

Sensitivities lift_sensitivities(uint64_t n_t, uint64_t n_c, double r_bound);

// Gaussian scale achieving rho-zCDP for a given L2 sensitivity.
double gaussian_sigma(double sensitivity, double rho);

// Inverse standard normal CDF. Rational approximation plus one Halley step;
// absolute error under 1e-8 across (0, 1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

// Half-width of the released CI: the dp standard error widened by the
// variance the lift noise itself added, all in the clear.
double ci_halfwidth(double dp_se, double sigma1, double alpha);

// One party's noise material for a single statistic. The party samples k
// candidate draws; exactly one (picked by the PEER, never revealed to us
// ahead of time) enters the circuit sum. `chosen_index` is OUR uniform pick
// into the PEER's vector. Values sit on the 2^-16 fixed-point grid.
struct NoiseVector {
  std::vector<int64_t> values;
  size_t chosen_index = 0;
  double sigma = 0.0;
};

NoiseVector sample_noise_vector(double sigma, size_t k, Csprng& rng);

// Distribution check on a peer's revealed vector with the consumed slot
// zeroed: Kolmogorov-Smirnov against N(0, sigma^2) at the 1% level over the
// k-1 remaining draws, plus an 8-sigma magnitude bound on every draw. A zero
// sigma demands an identically zero vector.
bool check_noise_distribution(std::span<const int64_t> revealed,
                              size_t zeroed_index, double sigma);

// Clear-side lift arithmetic shared by the pipeline and the test oracle.
struct Aggregates {
  uint64_t n_t = 0, sum_t = 0, ssq_t = 0;
  uint64_t n_c = 0, sum_c = 0, ssq_c = 0;
};

struct LiftEstimate {
  double mean_t = 0.0, mean_c = 0.0;
  double lift = 0.0;
  double se = 0.0;  // NaN when either arm has fewer than 2 users
};

LiftEstimate estimate_from_aggregates(const Aggregates& a);

}  // namespace privlift::dp
