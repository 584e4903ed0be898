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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/circuit.hpp"
#include "core/fixed.hpp"

namespace privlift::circuit {

// Static shape of one shard's lift circuit. The capacity widths are derived
// from (rows, max_conversions, r_bound) but stored explicitly: the in-circuit
// accumulators only carry to these widths (the clamp makes higher bits
// unreachable for every input), and tests pin them while varying rows to
// assert the AND-count formula.
struct LiftShardLayout {
  uint32_t rows = 0;
  uint32_t max_conversions = 0;  // conversion slots per user (K)
  uint64_t r_bound = 0;          // per-user outcome clamp (R)

  uint32_t clamp_bits = 0;      // bitlen(R)
  uint32_t value_sum_bits = 0;  // bitlen(K * value cap)
  uint32_t count_bits = 0;      // bitlen(rows)
  uint32_t sum_bits = 0;        // bitlen(rows * R)
  uint32_t sumsq_bits = 0;      // bitlen(rows * R^2)

  static LiftShardLayout make(uint32_t rows, uint32_t max_conversions,
                              uint64_t r_bound);

  uint32_t publisher_bits_per_row() const { return 32 + 1 + 1; }
  uint32_t advertiser_bits_per_row() const { return max_conversions * 64 + 1; }
  uint32_t mask_bits() const { return 6 * 64; }
};

// Aligned per-spine-row halves, already truncated to the layout's K.
struct LiftPublisherRow {
  uint32_t opportunity_ts = 0;
  bool is_test = false;
  bool present = false;  // padding rows and advertiser-only users are absent
};

struct LiftAdvertiserRow {
  // (conversion_ts, value), at most max_conversions entries.
  std::vector<std::pair<uint32_t, uint32_t>> conversions;
  bool present = false;
};

// Aggregate word order used everywhere downstream.
enum AggIndex : uint32_t {
  kAggNTest = 0,
  kAggSumTest = 1,
  kAggSumSqTest = 2,
  kAggNControl = 3,
  kAggSumControl = 4,
  kAggSumSqControl = 5,
};

// Builds the per-shard circuit. Garbler (publisher) inputs: per-row
// [opportunity_ts, is_test, present] plus six 64-bit masks. Evaluator
// (advertiser) inputs: per-row K conversion slots [ts, value] plus a
// presence bit. Single output, to the evaluator: the six aggregates, each
// XOR-masked with the garbler's mask word.
Circuit build_lift_shard_circuit(const LiftShardLayout& layout);

std::vector<uint8_t> pack_lift_garbler_bits(
    const LiftShardLayout& layout, std::span<const LiftPublisherRow> rows,
    std::span<const uint64_t> masks /* 6 */);
std::vector<uint8_t> pack_lift_evaluator_bits(
    const LiftShardLayout& layout, std::span<const LiftAdvertiserRow> rows);

// Plaintext reference of the shard semantics, for tests and the masking
// equivalence checks: attribute strictly-later conversions, clamp at R,
// square after the clamp, split by arm.
std::array<uint64_t, 6> lift_shard_reference(
    const LiftShardLayout& layout, std::span<const LiftPublisherRow> pub,
    std::span<const LiftAdvertiserRow> adv);

}  // namespace privlift::circuit
