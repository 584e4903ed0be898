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

#include "core/aes_hash.hpp"

#include <cstring>

namespace privlift::twopc {

namespace {

template <int Rcon>
inline __m128i expand_round(__m128i prev) {
  __m128i t = _mm_aeskeygenassist_si128(prev, Rcon);
  t = _mm_shuffle_epi32(t, 0xff);
  prev = _mm_xor_si128(prev, _mm_slli_si128(prev, 4));
  prev = _mm_xor_si128(prev, _mm_slli_si128(prev, 4));
  prev = _mm_xor_si128(prev, _mm_slli_si128(prev, 4));
  return _mm_xor_si128(prev, t);
}

}  // namespace

void Aes128::set_key(const std::array<uint8_t, 16>& key) {
  __m128i k;
  std::memcpy(&k, key.data(), 16);
  rk_[0] = k;
  rk_[1] = expand_round<0x01>(rk_[0]);
  rk_[2] = expand_round<0x02>(rk_[1]);
  rk_[3] = expand_round<0x04>(rk_[2]);
  rk_[4] = expand_round<0x08>(rk_[3]);
  rk_[5] = expand_round<0x10>(rk_[4]);
  rk_[6] = expand_round<0x20>(rk_[5]);
  rk_[7] = expand_round<0x40>(rk_[6]);
  rk_[8] = expand_round<0x80>(rk_[7]);
  rk_[9] = expand_round<0x1b>(rk_[8]);
  rk_[10] = expand_round<0x36>(rk_[9]);
}

Block Aes128::encrypt(Block x) const {
  x = _mm_xor_si128(x, rk_[0]);
  for (int r = 1; r < 10; ++r) {
    x = _mm_aesenc_si128(x, rk_[r]);
  }
  return _mm_aesenclast_si128(x, rk_[10]);
}

void Aes128::encrypt4(const Block in[4], Block out[4]) const {
  __m128i a = _mm_xor_si128(in[0], rk_[0]);
  __m128i b = _mm_xor_si128(in[1], rk_[0]);
  __m128i c = _mm_xor_si128(in[2], rk_[0]);
  __m128i d = _mm_xor_si128(in[3], rk_[0]);
  for (int r = 1; r < 10; ++r) {
    a = _mm_aesenc_si128(a, rk_[r]);
    b = _mm_aesenc_si128(b, rk_[r]);
    c = _mm_aesenc_si128(c, rk_[r]);
    d = _mm_aesenc_si128(d, rk_[r]);
  }
  out[0] = _mm_aesenclast_si128(a, rk_[10]);
  out[1] = _mm_aesenclast_si128(b, rk_[10]);
  out[2] = _mm_aesenclast_si128(c, rk_[10]);
  out[3] = _mm_aesenclast_si128(d, rk_[10]);
}

}  // namespace privlift::twopc
