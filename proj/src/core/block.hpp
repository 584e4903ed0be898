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
#include <cstring>
#include <emmintrin.h>
#include <smmintrin.h>

namespace privlift {

// 128-bit value used for wire labels and hash blocks. Thin wrapper over SSE.
using Block = __m128i;

inline Block block_zero() { return _mm_setzero_si128(); }

inline Block block_from_u64(uint64_t lo, uint64_t hi) {
  return _mm_set_epi64x(static_cast<int64_t>(hi), static_cast<int64_t>(lo));
}

inline Block block_xor(Block a, Block b) { return _mm_xor_si128(a, b); }

inline uint64_t block_lo(Block a) {
  return static_cast<uint64_t>(_mm_extract_epi64(a, 0));
}

inline uint64_t block_hi(Block a) {
  return static_cast<uint64_t>(_mm_extract_epi64(a, 1));
}

// Color bit used by point-and-permute.
inline int block_lsb(Block a) { return static_cast<int>(block_lo(a) & 1); }

inline Block block_set_lsb(Block a) {
  return _mm_or_si128(a, _mm_set_epi64x(0, 1));
}

inline bool block_eq(Block a, Block b) {
  Block x = _mm_xor_si128(a, b);
  return _mm_testz_si128(x, x) != 0;
}

// Doubling in GF(2^128) with the standard reduction polynomial. Used to make
// the two halves of the garbling-hash input independent.
inline Block block_gf_double(Block a) {
  const __m128i mask = _mm_set_epi32(0, 0, 0, 0x87);
  __m128i carry = _mm_srai_epi32(_mm_shuffle_epi32(a, 0xff), 31);
  __m128i shifted = _mm_or_si128(_mm_slli_epi64(a, 1),
                                 _mm_srli_epi64(_mm_slli_si128(a, 8), 63));
  return _mm_xor_si128(shifted, _mm_and_si128(carry, mask));
}

inline void block_to_bytes(Block a, uint8_t out[16]) {
  _mm_storeu_si128(reinterpret_cast<__m128i*>(out), a);
}

inline Block block_from_bytes(const uint8_t in[16]) {
  return _mm_loadu_si128(reinterpret_cast<const __m128i*>(in));
}

}  // namespace privlift
