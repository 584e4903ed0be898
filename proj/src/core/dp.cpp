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

#include "core/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "core/fixed.hpp"

namespace privlift::dp {

Sensitivities lift_sensitivities(uint64_t n_t, uint64_t n_c, double r_bound) {
  if (n_t == 0 || n_c == 0) throw std::invalid_argument("empty arm");
  double nt = static_cast<double>(n_t), nc = static_cast<double>(n_c);
  double ns = std::min(nt, nc);
  Sensitivities s;
  s.lift = r_bound / nt + r_bound / nc;
  s.se = std::sqrt((ns - 1.0) / (ns * ns * ns)) * r_bound;
  return s;
}

double gaussian_sigma(double sensitivity, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  if (sensitivity < 0.0) throw std::invalid_argument("negative sensitivity");
  return sensitivity / std::sqrt(2.0 * rho);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile argument outside (0, 1)");
  }
  // Acklam's rational approximation in three regimes.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF tightens the tail error to <1e-8.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double ci_halfwidth(double dp_se, double sigma1, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha outside (0, 1)");
  }
  double z = normal_quantile(1.0 - alpha / 2.0);
  return z * std::sqrt(dp_se * dp_se + sigma1 * sigma1);
}

NoiseVector sample_noise_vector(double sigma, size_t k, Csprng& rng) {
  if (k < 2) throw std::invalid_argument("noise vector needs k >= 2");
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("bad sigma");
  }
  NoiseVector nv;
  nv.sigma = sigma;
  nv.values.assign(k, 0);
  if (sigma > 0.0) {
    for (size_t i = 0; i < k; i += 2) {
      double u1 = rng.uniform01();
      while (u1 == 0.0) u1 = rng.uniform01();
      double u2 = rng.uniform01();
      double r = std::sqrt(-2.0 * std::log(u1));
      double z0 = r * std::cos(2.0 * std::numbers::pi * u2);
      nv.values[i] = std::llround(z0 * sigma * (1 << kFracBits));
      if (i + 1 < k) {
        double z1 = r * std::sin(2.0 * std::numbers::pi * u2);
        nv.values[i + 1] = std::llround(z1 * sigma * (1 << kFracBits));
      }
    }
  }
  nv.chosen_index = rng.below(k);
  return nv;
}

bool check_noise_distribution(std::span<const int64_t> revealed,
                              size_t zeroed_index, double sigma) {
  if (revealed.size() < 2 || zeroed_index >= revealed.size()) return false;
  if (sigma == 0.0) {
    for (int64_t v : revealed) {
      if (v != 0) return false;
    }
    return true;
  }
  std::vector<double> sample;
  sample.reserve(revealed.size() - 1);
  for (size_t i = 0; i < revealed.size(); ++i) {
    if (i == zeroed_index) continue;
    double v = static_cast<double>(revealed[i]) / (1 << kFracBits);
    if (std::abs(v) > 8.0 * sigma) return false;
    sample.push_back(v);
  }
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double dmax = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double f = normal_cdf(sample[i] / sigma);
    dmax = std::max(dmax, f - static_cast<double>(i) / n);
    dmax = std::max(dmax, static_cast<double>(i + 1) / n - f);
  }
  // 1% critical value of the one-sample KS statistic.
  double threshold = 1.62762 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  return dmax <= threshold;
}

LiftEstimate estimate_from_aggregates(const Aggregates& a) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  LiftEstimate e;
  double nt = static_cast<double>(a.n_t), nc = static_cast<double>(a.n_c);
  e.mean_t = a.n_t ? static_cast<double>(a.sum_t) / nt : nan;
  e.mean_c = a.n_c ? static_cast<double>(a.sum_c) / nc : nan;
  e.lift = e.mean_t - e.mean_c;
  if (a.n_t >= 2 && a.n_c >= 2) {
    double st = (static_cast<double>(a.ssq_t) -
                 static_cast<double>(a.sum_t) * a.sum_t / nt) /
                (nt - 1.0);
    double sc = (static_cast<double>(a.ssq_c) -
                 static_cast<double>(a.sum_c) * a.sum_c / nc) /
                (nc - 1.0);
    e.se = std::sqrt(st / nt + sc / nc);
  } else {
    e.se = nan;
  }
  return e;
}

}  // namespace privlift::dp
