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

#include "core/ot_extension.hpp"

#include <algorithm>
#include <cstring>

#include "core/aes_hash.hpp"
#include "core/base_ot.hpp"
#include "core/errors.hpp"
#include "core/hashing.hpp"
#include "core/wire.hpp"

namespace privlift::twopc {

namespace {

constexpr size_t kKappa = 128;  // extension width = computational security

// Fixed public key for the transfer-pad hash. Pads depend on secret q/t rows
// and per-transfer tweaks, not on this key.
const Aes128& pad_aes() {
  static const Aes128 aes(std::array<uint8_t, 16>{
      'p', 'r', 'i', 'v', 'l', 'i', 'f', 't',
      'o', 't', 'c', 'r', 'h', 'v', '1', 0});
  return aes;
}

Block pad_hash(Block row, uint64_t transfer_index) {
  return cr_hash1(pad_aes(), row, tweak_block(transfer_index, 2));
}

// Column PRG keyed off a base-OT seed block. Domain-separated from every
// other Csprng in the pipeline.
Csprng prg_from_seed(Block seed, uint64_t column, uint64_t which) {
  uint8_t msg[16 + 8 + 8];
  block_to_bytes(seed, msg);
  for (int k = 0; k < 8; ++k) {
    msg[16 + k] = static_cast<uint8_t>(column >> (8 * k));
    msg[24 + k] = static_cast<uint8_t>(which >> (8 * k));
  }
  Sha256 h;
  constexpr char kTag[] = "privlift/ot-ext-prg/v1";
  h.update({reinterpret_cast<const uint8_t*>(kTag), sizeof(kTag) - 1});
  h.update(msg);
  return Csprng(h.digest());
}

void transpose_64(uint64_t a[64]) {
  uint64_t m = 0x00000000ffffffffull;
  for (int j = 32; j != 0; j >>= 1, m ^= m << j) {
    for (int k = 0; k < 64; k = (k + j + 1) & ~j) {
      uint64_t t = (a[k] ^ (a[k | j] >> j)) & m;
      a[k] ^= t;
      a[k | j] ^= t << j;
    }
  }
}

}  // namespace

void transpose_128(uint64_t m[128][2]) {
  uint64_t a[64], b[64], c[64], d[64];
  for (int i = 0; i < 64; ++i) {
    a[i] = m[i][0];
    b[i] = m[i][1];
    c[i] = m[64 + i][0];
    d[i] = m[64 + i][1];
  }
  transpose_64(a);
  transpose_64(b);
  transpose_64(c);
  transpose_64(d);
  // [[A B] [C D]]^T = [[A^T C^T] [B^T D^T]] blockwise.
  for (int i = 0; i < 64; ++i) {
    m[i][0] = a[i];
    m[i][1] = c[i];
    m[64 + i][0] = b[i];
    m[64 + i][1] = d[i];
  }
}

namespace {

void ext_send(net::Channel& ch,
              std::span<const std::pair<Block, Block>> messages, Csprng& rng) {
  // Base phase with reversed roles: this side receives one seed per column,
  // selected by its secret correlation vector s.
  std::vector<uint8_t> s_bits(kKappa);
  uint64_t s_words[2] = {0, 0};
  for (size_t i = 0; i < kKappa; ++i) {
    s_bits[i] = static_cast<uint8_t>(rng.next_u32() & 1);
    s_words[i / 64] |= static_cast<uint64_t>(s_bits[i]) << (i % 64);
  }
  std::vector<Block> seeds = base_ot_recv(ch, s_bits, rng);

  std::vector<Csprng> prg;
  prg.reserve(kKappa);
  for (size_t i = 0; i < kKappa; ++i) {
    prg.push_back(prg_from_seed(seeds[i], i, s_bits[i]));
  }
  Block s_block = block_from_u64(s_words[0], s_words[1]);

  const uint64_t total = messages.size();
  std::vector<uint64_t> q_cols;
  std::vector<uint64_t> u_col;
  for (uint64_t start = 0; start < total; start += kOtBatchRows) {
    const uint64_t rows = std::min<uint64_t>(kOtBatchRows, total - start);
    const uint64_t padded = (rows + kKappa - 1) / kKappa * kKappa;
    const uint64_t words = padded / 64;

    auto u = ch.expect(net::MsgType::kOtExtMatrix);
    WireReader rd(u);
    if (rd.u64() != start || rd.u64() != rows || rd.u64() != padded) {
      throw ProtocolError(Errc::kMalformedMessage, "OT ext: batch mismatch");
    }
    auto u_bytes = rd.bytes(kKappa * words * 8);
    rd.expect_end();

    q_cols.assign(kKappa * words, 0);
    u_col.assign(words, 0);
    for (size_t i = 0; i < kKappa; ++i) {
      uint64_t* q = q_cols.data() + i * words;
      prg[i].fill(q, words * 8);
      if (s_bits[i]) {
        std::memcpy(u_col.data(), u_bytes.data() + i * words * 8, words * 8);
        for (uint64_t w = 0; w < words; ++w) q[w] ^= u_col[w];
      }
    }

    WireWriter out;
    out.u64(start);
    out.u64(rows);
    uint64_t sub[128][2];
    uint8_t pads[32];
    for (uint64_t chunk = 0; chunk * kKappa < rows; ++chunk) {
      for (size_t i = 0; i < kKappa; ++i) {
        sub[i][0] = q_cols[i * words + 2 * chunk];
        sub[i][1] = q_cols[i * words + 2 * chunk + 1];
      }
      transpose_128(sub);
      const uint64_t limit = std::min<uint64_t>(kKappa, rows - chunk * kKappa);
      for (uint64_t j = 0; j < limit; ++j) {
        const uint64_t idx = start + chunk * kKappa + j;
        Block q_row = block_from_u64(sub[j][0], sub[j][1]);
        Block y0 = block_xor(messages[idx].first, pad_hash(q_row, idx));
        Block y1 = block_xor(messages[idx].second,
                             pad_hash(block_xor(q_row, s_block), idx));
        block_to_bytes(y0, pads);
        block_to_bytes(y1, pads + 16);
        out.bytes(pads);
      }
    }
    ch.send(net::MsgType::kOtExtMatrix, out.take());
  }
}

std::vector<Block> ext_recv(net::Channel& ch, std::span<const uint8_t> choices,
                            Csprng& rng) {
  std::vector<std::pair<Block, Block>> seed_pairs(kKappa);
  for (auto& [s0, s1] : seed_pairs) {
    s0 = rng.next_block();
    s1 = rng.next_block();
  }
  base_ot_send(ch, seed_pairs, rng);

  std::vector<Csprng> prg0, prg1;
  prg0.reserve(kKappa);
  prg1.reserve(kKappa);
  for (size_t i = 0; i < kKappa; ++i) {
    prg0.push_back(prg_from_seed(seed_pairs[i].first, i, 0));
    prg1.push_back(prg_from_seed(seed_pairs[i].second, i, 1));
  }

  const uint64_t total = choices.size();
  std::vector<Block> out(total);
  std::vector<uint64_t> r_words;
  std::vector<uint64_t> t_cols;
  std::vector<uint64_t> scratch;
  for (uint64_t start = 0; start < total; start += kOtBatchRows) {
    const uint64_t rows = std::min<uint64_t>(kOtBatchRows, total - start);
    const uint64_t padded = (rows + kKappa - 1) / kKappa * kKappa;
    const uint64_t words = padded / 64;

    // Choice vector, random-padded so the matrix never leaks tail bits.
    r_words.assign(words, 0);
    rng.fill(r_words.data(), words * 8);
    for (uint64_t j = 0; j < rows; ++j) {
      uint64_t bit = choices[start + j] & 1;
      uint64_t mask = 1ull << (j % 64);
      r_words[j / 64] = (r_words[j / 64] & ~mask) | (bit << (j % 64));
    }

    t_cols.assign(kKappa * words, 0);
    scratch.assign(words, 0);
    WireWriter uw;
    uw.u64(start);
    uw.u64(rows);
    uw.u64(padded);
    for (size_t i = 0; i < kKappa; ++i) {
      uint64_t* t = t_cols.data() + i * words;
      prg0[i].fill(t, words * 8);
      prg1[i].fill(scratch.data(), words * 8);
      for (uint64_t w = 0; w < words; ++w) {
        scratch[w] ^= t[w] ^ r_words[w];
      }
      uw.bytes({reinterpret_cast<const uint8_t*>(scratch.data()), words * 8});
    }
    ch.send(net::MsgType::kOtExtMatrix, uw.take());

    auto pads = ch.expect(net::MsgType::kOtExtMatrix);
    WireReader rd(pads);
    if (rd.u64() != start || rd.u64() != rows) {
      throw ProtocolError(Errc::kMalformedMessage, "OT ext: batch mismatch");
    }
    auto y = rd.bytes(rows * 32);
    rd.expect_end();

    uint64_t sub[128][2];
    for (uint64_t chunk = 0; chunk * kKappa < rows; ++chunk) {
      for (size_t i = 0; i < kKappa; ++i) {
        sub[i][0] = t_cols[i * words + 2 * chunk];
        sub[i][1] = t_cols[i * words + 2 * chunk + 1];
      }
      transpose_128(sub);
      const uint64_t limit = std::min<uint64_t>(kKappa, rows - chunk * kKappa);
      for (uint64_t j = 0; j < limit; ++j) {
        const uint64_t row = chunk * kKappa + j;
        const uint64_t idx = start + row;
        Block t_row = block_from_u64(sub[j][0], sub[j][1]);
        Block pad = block_from_bytes(y.data() + row * 32 +
                                     (choices[idx] & 1 ? 16 : 0));
        out[idx] = block_xor(pad, pad_hash(t_row, idx));
      }
    }
  }
  return out;
}

}  // namespace

void ot_send(net::Channel& ch,
             std::span<const std::pair<Block, Block>> messages, Csprng& rng) {
  if (messages.size() <= kOtExtThreshold) {
    base_ot_send(ch, messages, rng);
  } else {
    ext_send(ch, messages, rng);
  }
}

std::vector<Block> ot_recv(net::Channel& ch, std::span<const uint8_t> choices,
                           Csprng& rng) {
  if (choices.size() <= kOtExtThreshold) {
    return base_ot_recv(ch, choices, rng);
  }
  return ext_recv(ch, choices, rng);
}

}  // namespace privlift::twopc
