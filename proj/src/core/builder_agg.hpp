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

#include "core/circuit.hpp"

namespace privlift::circuit {

// Aggregation circuit shape. total_rows is the spine size (known to both
// parties) and bounds every count/sum that can come out of the shard stage;
// the internal statistics run at widths derived from it. rho/alpha act
// outside the circuit (noise is pre-scaled, the CI is computed in the clear).
struct AggregationParams {
  uint32_t shards = 0;
  uint32_t noise_k = 0;       // cut-and-choose vector length
  uint64_t total_rows = 0;
  uint64_t r_bound = 0;

  bool operator==(const AggregationParams&) const = default;
};

// Inputs (garbler = publisher): per-shard masks (6 words each), two noise
// vectors at fixed-point F=16, and a 16-bit private index into the peer's
// vectors. Evaluator mirrors with masked words instead of masks.
//
// Outputs: each party receives dp_lift and dp_se carrying the PEER's noise at
// its own chosen index, plus the peer's vectors with the chosen slot zeroed
// (the cut-and-choose reveal). Means are F=16; the variance/se path runs at
// F=32 internally and lands on F=16 exactly via integer sqrt.
Circuit build_aggregation_circuit(const AggregationParams& p);

struct AggGarblerInputs {
  std::vector<uint64_t> masks;        // shards * 6
  std::vector<int64_t> noise_lift;    // k, fixed F16
  std::vector<int64_t> noise_se;      // k
  uint32_t choice = 0;                // index into the peer's vectors
};

struct AggEvaluatorInputs {
  std::vector<uint64_t> masked_words;  // shards * 6
  std::vector<int64_t> noise_lift;
  std::vector<int64_t> noise_se;
  uint32_t choice = 0;
};

std::vector<uint8_t> pack_agg_garbler_bits(const AggregationParams& p,
                                           const AggGarblerInputs& in);
std::vector<uint8_t> pack_agg_evaluator_bits(const AggregationParams& p,
                                             const AggEvaluatorInputs& in);

}  // namespace privlift::circuit
