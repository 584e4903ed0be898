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

#include <cmath>
#include <cstdint>

namespace privlift {

// Shared-circuit numeric format: 64-bit two's complement with 16 fractional
// bits. Quantization step 2^-16.
inline constexpr uint32_t kFracBits = 16;
inline constexpr double kFixedScale = 65536.0;

// Conversion values are capped at ingest; the circuit sizes its per-user
// value accumulator for this cap.
inline constexpr uint64_t kMaxConvValue = 1u << 20;

inline int64_t to_fixed(double v) {
  return static_cast<int64_t>(std::llround(v * kFixedScale));
}

inline double from_fixed(int64_t v) {
  return static_cast<double>(v) / kFixedScale;
}

// Number of bits needed to represent v (bitlen); bitlen(0) = 1.
inline uint32_t bit_width_u64(uint64_t v) {
  uint32_t w = 0;
  while (v > 0) {
    w++;
    v >>= 1;
  }
  return w == 0 ? 1 : w;
}

}  // namespace privlift
