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
#include <wmmintrin.h>

#include "core/block.hpp"

namespace privlift::twopc {

// AES-128 with AES-NI; the key is public within a session, so no
// constant-time concerns beyond what the instructions give for free.
class Aes128 {
 public:
  Aes128() = default;
  explicit Aes128(const std::array<uint8_t, 16>& key) { set_key(key); }
  void set_key(const std::array<uint8_t, 16>& key);

  Block encrypt(Block x) const;
  // Four independent blocks, pipelined.
  void encrypt4(const Block in[4], Block out[4]) const;

 private:
  Block rk_[11];
};

inline Block tweak_block(uint64_t lo, uint64_t domain) {
  return block_from_u64(lo, domain);
}

// Garbling hash (MMO): H(A, B, T) = AES_K(s) ^ s with s = 2A ^ 4B ^ T, where
// doubling is in GF(2^128). Correlation-robust for free-XOR label pairs.
inline Block cr_hash(const Aes128& aes, Block a, Block b, Block tweak) {
  Block s = block_xor(block_gf_double(a),
                      block_xor(block_gf_double(block_gf_double(b)), tweak));
  return block_xor(aes.encrypt(s), s);
}

// Single-input variant used by the OT extension.
inline Block cr_hash1(const Aes128& aes, Block a, Block tweak) {
  Block s = block_xor(block_gf_double(a), tweak);
  return block_xor(aes.encrypt(s), s);
}

}  // namespace privlift::twopc
