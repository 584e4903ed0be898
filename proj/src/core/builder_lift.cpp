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

#include "core/builder_lift.hpp"

#include "core/builder.hpp"
#include "core/errors.hpp"
#include "core/fixed.hpp"

namespace privlift::circuit {

namespace {
uint32_t bitlen_u128(unsigned __int128 v) {
  uint32_t w = 0;
  while (v > 0) {
    w++;
    v >>= 1;
  }
  return w == 0 ? 1 : w;
}

void require(bool ok, const char* why) {
  if (!ok) throw ProtocolError(Errc::kBadInput, why);
}
}  // namespace

LiftShardLayout LiftShardLayout::make(uint32_t rows, uint32_t max_conversions,
                                      uint64_t r_bound) {
  require(rows > 0, "layout needs at least one row");
  require(max_conversions > 0 && max_conversions <= 256,
          "conversion slots out of range");
  require(r_bound > 0 && r_bound <= kMaxConvValue * 256,
          "r_bound out of range");
  LiftShardLayout l;
  l.rows = rows;
  l.max_conversions = max_conversions;
  l.r_bound = r_bound;
  l.clamp_bits = bit_width_u64(r_bound);
  l.value_sum_bits =
      bit_width_u64(static_cast<uint64_t>(max_conversions) * kMaxConvValue);
  l.count_bits = bit_width_u64(rows);
  unsigned __int128 sum_cap =
      static_cast<unsigned __int128>(rows) * r_bound;
  unsigned __int128 ssq_cap =
      static_cast<unsigned __int128>(rows) * r_bound * r_bound;
  require(bitlen_u128(ssq_cap) <= 63, "rows * R^2 exceeds 63 bits");
  l.sum_bits = bitlen_u128(sum_cap);
  l.sumsq_bits = bitlen_u128(ssq_cap);
  return l;
}

Circuit build_lift_shard_circuit(const LiftShardLayout& layout) {
  CircuitBuilder b;
  const uint32_t rows = layout.rows;
  const uint32_t K = layout.max_conversions;

  Word pub = b.input(Role::kGarbler, "publisher_rows",
                     rows * layout.publisher_bits_per_row());
  Word masks = b.input(Role::kGarbler, "masks", layout.mask_bits());
  Word adv = b.input(Role::kEvaluator, "advertiser_rows",
                     rows * layout.advertiser_bits_per_row());

  // Value wires wider than the per-user accumulator cannot contribute under
  // the ingest cap; truncate them into the accumulator's width.
  const uint32_t gw = std::min<uint32_t>(32, layout.value_sum_bits);

  Word acc[6];
  acc[kAggNTest] = CircuitBuilder::constant(0, layout.count_bits);
  acc[kAggNControl] = CircuitBuilder::constant(0, layout.count_bits);
  acc[kAggSumTest] = CircuitBuilder::constant(0, layout.sum_bits);
  acc[kAggSumControl] = CircuitBuilder::constant(0, layout.sum_bits);
  acc[kAggSumSqTest] = CircuitBuilder::constant(0, layout.sumsq_bits);
  acc[kAggSumSqControl] = CircuitBuilder::constant(0, layout.sumsq_bits);

  auto add_bit_into = [&](Word& a, Bit bit) {
    Word one(1);
    one[0] = bit;
    Word widened = CircuitBuilder::zext(one, static_cast<uint32_t>(a.size()));
    a = b.add(a, widened);
  };

  for (uint32_t r = 0; r < rows; r++) {
    const uint32_t pbase = r * layout.publisher_bits_per_row();
    Word opp_ts(pub.begin() + pbase, pub.begin() + pbase + 32);
    Bit is_test = pub[pbase + 32];
    Bit has_opp = pub[pbase + 33];

    const uint32_t abase = r * layout.advertiser_bits_per_row();
    Bit has_out = adv[abase + K * 64];
    Bit counted = b.band(has_opp, has_out);

    // Per-user attributed value: conversions strictly after the opportunity.
    Word vsum = CircuitBuilder::constant(0, layout.value_sum_bits);
    for (uint32_t k = 0; k < K; k++) {
      const uint32_t sbase = abase + k * 64;
      Word conv_ts(adv.begin() + sbase, adv.begin() + sbase + 32);
      Word value(adv.begin() + sbase + 32, adv.begin() + sbase + 64);
      Bit after = b.ult(opp_ts, conv_ts);
      Bit take = b.band(after, counted);
      Word gated = b.and_broadcast(CircuitBuilder::trunc(value, gw), take);
      vsum = b.add(vsum, CircuitBuilder::zext(gated, layout.value_sum_bits));
    }

    Word y_full = b.clamp_const(vsum, layout.r_bound);
    Word y = CircuitBuilder::trunc(y_full, layout.clamp_bits);
    Word ysq = b.mul(y, y);  // squared after the clamp

    Bit in_test = b.band(is_test, has_opp);
    Bit in_control = b.band(b.bnot(is_test), has_opp);

    add_bit_into(acc[kAggNTest], in_test);
    add_bit_into(acc[kAggNControl], in_control);
    acc[kAggSumTest] =
        b.add(acc[kAggSumTest],
              CircuitBuilder::zext(b.and_broadcast(y, in_test),
                                   layout.sum_bits));
    acc[kAggSumControl] =
        b.add(acc[kAggSumControl],
              CircuitBuilder::zext(b.and_broadcast(y, in_control),
                                   layout.sum_bits));
    acc[kAggSumSqTest] =
        b.add(acc[kAggSumSqTest],
              CircuitBuilder::zext(b.and_broadcast(ysq, in_test),
                                   layout.sumsq_bits));
    acc[kAggSumSqControl] =
        b.add(acc[kAggSumSqControl],
              CircuitBuilder::zext(b.and_broadcast(ysq, in_control),
                                   layout.sumsq_bits));
  }

  // Mask each aggregate into a full 64-bit word. High accumulator bits are
  // structurally zero, so those positions pass the mask wire through free.
  Word out;
  out.reserve(6 * 64);
  for (uint32_t j = 0; j < 6; j++) {
    Word wj = CircuitBuilder::zext(acc[j], 64);
    Word mj(masks.begin() + j * 64, masks.begin() + (j + 1) * 64);
    Word masked = b.bxor_words(wj, mj);
    out.insert(out.end(), masked.begin(), masked.end());
  }
  b.output(Role::kEvaluator, "masked_aggregates", out);
  return b.take();
}

std::vector<uint8_t> pack_lift_garbler_bits(const LiftShardLayout& layout,
                                            std::span<const LiftPublisherRow> rows,
                                            std::span<const uint64_t> masks) {
  require(rows.size() == layout.rows, "row count mismatch");
  require(masks.size() == 6, "expected six mask words");
  std::vector<uint8_t> bits;
  bits.reserve(layout.rows * layout.publisher_bits_per_row() +
               layout.mask_bits());
  for (const auto& row : rows) {
    for (uint32_t i = 0; i < 32; i++) {
      bits.push_back((row.opportunity_ts >> i) & 1);
    }
    bits.push_back(row.is_test ? 1 : 0);
    bits.push_back(row.present ? 1 : 0);
  }
  for (uint32_t j = 0; j < 6; j++) {
    for (uint32_t i = 0; i < 64; i++) bits.push_back((masks[j] >> i) & 1);
  }
  return bits;
}

std::vector<uint8_t> pack_lift_evaluator_bits(
    const LiftShardLayout& layout, std::span<const LiftAdvertiserRow> rows) {
  require(rows.size() == layout.rows, "row count mismatch");
  std::vector<uint8_t> bits;
  bits.reserve(layout.rows * layout.advertiser_bits_per_row());
  for (const auto& row : rows) {
    require(row.conversions.size() <= layout.max_conversions,
            "row exceeds conversion slots");
    for (uint32_t k = 0; k < layout.max_conversions; k++) {
      uint32_t ts = 0, value = 0;
      if (k < row.conversions.size()) {
        ts = row.conversions[k].first;
        value = row.conversions[k].second;
      }
      for (uint32_t i = 0; i < 32; i++) bits.push_back((ts >> i) & 1);
      for (uint32_t i = 0; i < 32; i++) bits.push_back((value >> i) & 1);
    }
    bits.push_back(row.present ? 1 : 0);
  }
  return bits;
}

std::array<uint64_t, 6> lift_shard_reference(
    const LiftShardLayout& layout, std::span<const LiftPublisherRow> pub,
    std::span<const LiftAdvertiserRow> adv) {
  require(pub.size() == layout.rows && adv.size() == layout.rows,
          "row count mismatch");
  std::array<uint64_t, 6> agg{};
  for (uint32_t r = 0; r < layout.rows; r++) {
    if (!pub[r].present) continue;
    uint64_t v = 0;
    if (adv[r].present) {
      for (const auto& [ts, value] : adv[r].conversions) {
        if (ts > pub[r].opportunity_ts) v += value;
      }
    }
    uint64_t y = std::min<uint64_t>(v, layout.r_bound);
    if (pub[r].is_test) {
      agg[kAggNTest]++;
      agg[kAggSumTest] += y;
      agg[kAggSumSqTest] += y * y;
    } else {
      agg[kAggNControl]++;
      agg[kAggSumControl] += y;
      agg[kAggSumSqControl] += y * y;
    }
  }
  return agg;
}

}  // namespace privlift::circuit
