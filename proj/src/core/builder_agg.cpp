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

#include "core/builder_agg.hpp"

#include <algorithm>

#include "core/builder.hpp"
#include "core/builder_lift.hpp"
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

std::vector<uint8_t> pack_words_and_noise(std::span<const uint64_t> words,
                                          std::span<const int64_t> noise_lift,
                                          std::span<const int64_t> noise_se,
                                          uint32_t choice) {
  std::vector<uint8_t> bits;
  bits.reserve((words.size() + noise_lift.size() + noise_se.size()) * 64 + 16);
  auto push_word = [&](uint64_t w) {
    for (uint32_t i = 0; i < 64; i++) bits.push_back((w >> i) & 1);
  };
  for (uint64_t w : words) push_word(w);
  for (int64_t v : noise_lift) push_word(static_cast<uint64_t>(v));
  for (int64_t v : noise_se) push_word(static_cast<uint64_t>(v));
  for (uint32_t i = 0; i < 16; i++) bits.push_back((choice >> i) & 1);
  return bits;
}
}  // namespace

Circuit build_aggregation_circuit(const AggregationParams& p) {
  require(p.shards > 0 && p.shards <= 4096, "shard count out of range");
  require(p.noise_k >= 2 && p.noise_k <= 4096, "noise_k out of range");
  require(p.total_rows > 0, "empty spine");
  unsigned __int128 ssq_cap =
      static_cast<unsigned __int128>(p.total_rows) * p.r_bound * p.r_bound;
  require(bitlen_u128(ssq_cap) <= 63, "rows * R^2 exceeds 63 bits");

  const uint32_t S = p.shards;
  const uint32_t k = p.noise_k;
  const uint32_t cw = bit_width_u64(p.total_rows);
  const uint32_t sw = bitlen_u128(
      static_cast<unsigned __int128>(p.total_rows) * p.r_bound);
  const uint32_t qw = bitlen_u128(ssq_cap);

  CircuitBuilder b;
  Word g_masks = b.input(Role::kGarbler, "masks", S * 6 * 64);
  Word g_nl = b.input(Role::kGarbler, "garbler_noise_lift", k * 64);
  Word g_ns = b.input(Role::kGarbler, "garbler_noise_se", k * 64);
  Word g_choice = b.input(Role::kGarbler, "garbler_choice", 16);
  Word e_words = b.input(Role::kEvaluator, "masked_words", S * 6 * 64);
  Word e_nl = b.input(Role::kEvaluator, "evaluator_noise_lift", k * 64);
  Word e_ns = b.input(Role::kEvaluator, "evaluator_noise_se", k * 64);
  Word e_choice = b.input(Role::kEvaluator, "evaluator_choice", 16);

  auto word_at = [](const Word& w, uint32_t idx, uint32_t width) {
    return Word(w.begin() + idx * width, w.begin() + (idx + 1) * width);
  };
  // Values on these paths always fit 64 bits; wire widths may not.
  auto fit64 = [](const Word& w) {
    return w.size() >= 64 ? CircuitBuilder::trunc(w, 64)
                          : CircuitBuilder::zext(w, 64);
  };

  // Reconstruct each shard's aggregates (pairwise XOR) and sum across shards.
  Word totals[6];
  for (uint32_t j = 0; j < 6; j++) {
    totals[j] = CircuitBuilder::constant(0, 64);
    for (uint32_t s = 0; s < S; s++) {
      Word share = b.bxor_words(word_at(g_masks, s * 6 + j, 64),
                                word_at(e_words, s * 6 + j, 64));
      totals[j] = b.add(totals[j], share);
    }
  }

  // Honest shares reconstruct values within the capacity widths; run the
  // statistics at those widths.
  auto stats = [&](uint32_t n_idx, uint32_t sum_idx, uint32_t ssq_idx) {
    Word n = CircuitBuilder::trunc(totals[n_idx], cw);
    Word sum = CircuitBuilder::trunc(totals[sum_idx], sw);
    Word ssq = CircuitBuilder::trunc(totals[ssq_idx], qw);
    // mean at F16: (sum << 16) / n, truncating division.
    Word mean = b.udiv(CircuitBuilder::shl_grow(sum, kFracBits), n);
    // Sample variance numerator n*ssq - sum^2 (>= 0), denominator n(n-1).
    Word a = b.mul(ssq, n);
    Word sq = b.mul(sum, sum);
    uint32_t W = std::max<uint32_t>(qw + cw, 2 * sw);
    Word num = b.sub(CircuitBuilder::zext(a, W), CircuitBuilder::zext(sq, W));
    Word den = b.mul(n, b.sub(n, CircuitBuilder::constant(1, cw)));
    // s^2 at F32, then s^2/n still at F32 (integer divide by n).
    Word s2 = b.udiv(CircuitBuilder::shl_grow(num, 32), den);
    Word s2_over_n = b.udiv(s2, n);
    return std::make_pair(mean, s2_over_n);
  };

  auto [mean_t, s2n_t] = stats(kAggNTest, kAggSumTest, kAggSumSqTest);
  auto [mean_c, s2n_c] = stats(kAggNControl, kAggSumControl, kAggSumSqControl);

  Word lift = b.sub(fit64(mean_t), fit64(mean_c));

  uint32_t vw = static_cast<uint32_t>(std::max(s2n_t.size(), s2n_c.size())) + 1;
  Word se2_f32 = b.add(CircuitBuilder::zext(s2n_t, vw),
                       CircuitBuilder::zext(s2n_c, vw));
  // isqrt(se^2 * 2^32) == floor(se * 2^16): exact landing on F16.
  Word se = fit64(b.isqrt(se2_f32));

  // One-hot selectors for each party's private index into the peer vectors.
  std::vector<Bit> sel_g(k), sel_e(k);
  for (uint32_t j = 0; j < k; j++) {
    sel_g[j] = b.eq_const(g_choice, j);
    sel_e[j] = b.eq_const(e_choice, j);
  }
  auto select = [&](const Word& vecs, const std::vector<Bit>& sel) {
    Word out = CircuitBuilder::constant(0, 64);
    for (uint32_t j = 0; j < k; j++) {
      out = b.bxor_words(out, b.and_broadcast(word_at(vecs, j, 64), sel[j]));
    }
    return out;
  };

  // Each party's outputs carry the peer's noise at its own chosen slot.
  Word dp_lift_g = b.add(lift, select(e_nl, sel_g));
  Word dp_se_g = b.add(se, select(e_ns, sel_g));
  Word dp_lift_e = b.add(lift, select(g_nl, sel_e));
  Word dp_se_e = b.add(se, select(g_ns, sel_e));

  // Cut-and-choose reveal: the peer's full vector with the chosen slot
  // zeroed, so the chosen (consumed) noise draw stays private.
  auto reveal = [&](const Word& vecs, const std::vector<Bit>& sel) {
    Word out;
    out.reserve(k * 64);
    for (uint32_t j = 0; j < k; j++) {
      Word masked = b.and_broadcast(word_at(vecs, j, 64), b.bnot(sel[j]));
      out.insert(out.end(), masked.begin(), masked.end());
    }
    return out;
  };

  b.output(Role::kGarbler, "dp_lift_garbler", dp_lift_g);
  b.output(Role::kGarbler, "dp_se_garbler", dp_se_g);
  b.output(Role::kGarbler, "reveal_evaluator_noise_lift", reveal(e_nl, sel_g));
  b.output(Role::kGarbler, "reveal_evaluator_noise_se", reveal(e_ns, sel_g));
  b.output(Role::kEvaluator, "dp_lift_evaluator", dp_lift_e);
  b.output(Role::kEvaluator, "dp_se_evaluator", dp_se_e);
  b.output(Role::kEvaluator, "reveal_garbler_noise_lift",
           reveal(g_nl, sel_e));
  b.output(Role::kEvaluator, "reveal_garbler_noise_se", reveal(g_ns, sel_e));
  return b.take();
}

std::vector<uint8_t> pack_agg_garbler_bits(const AggregationParams& p,
                                           const AggGarblerInputs& in) {
  require(in.masks.size() == size_t(p.shards) * 6, "mask count mismatch");
  require(in.noise_lift.size() == p.noise_k && in.noise_se.size() == p.noise_k,
          "noise vector length mismatch");
  require(in.choice < p.noise_k, "choice out of range");
  return pack_words_and_noise(in.masks, in.noise_lift, in.noise_se, in.choice);
}

std::vector<uint8_t> pack_agg_evaluator_bits(const AggregationParams& p,
                                             const AggEvaluatorInputs& in) {
  require(in.masked_words.size() == size_t(p.shards) * 6,
          "masked word count mismatch");
  require(in.noise_lift.size() == p.noise_k && in.noise_se.size() == p.noise_k,
          "noise vector length mismatch");
  require(in.choice < p.noise_k, "choice out of range");
  return pack_words_and_noise(in.masked_words, in.noise_lift, in.noise_se,
                              in.choice);
}

}  // namespace privlift::circuit
