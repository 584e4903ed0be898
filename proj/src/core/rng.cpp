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

#include "core/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace privlift {

namespace {
void ensure_sodium() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
}
}  // namespace

Csprng::Csprng() {
  ensure_sodium();
  randombytes_buf(key_.data(), key_.size());
  pos_ = buf_.size();
}

Csprng::Csprng(const std::array<uint8_t, 32>& seed) : key_(seed) {
  ensure_sodium();
  pos_ = buf_.size();
}

Csprng Csprng::from_seed64(uint64_t seed) {
  ensure_sodium();
  uint8_t msg[16] = {'s', 'e', 'e', 'd', '6', '4', 0, 0};
  for (int i = 0; i < 8; i++) msg[8 + i] = static_cast<uint8_t>(seed >> (8 * i));
  std::array<uint8_t, 32> key;
  crypto_hash_sha256(key.data(), msg, sizeof(msg));
  return Csprng(key);
}

void Csprng::refill() {
  // Keystream of zeros under ChaCha20; the 8-byte nonce carries the block
  // counter so the stream never repeats within one key.
  uint8_t nonce[8];
  for (int i = 0; i < 8; i++) nonce[i] = static_cast<uint8_t>(counter_ >> (8 * i));
  counter_++;
  std::memset(buf_.data(), 0, buf_.size());
  crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
  pos_ = 0;
}

void Csprng::fill(void* out, size_t n) {
  uint8_t* p = static_cast<uint8_t*>(out);
  while (n > 0) {
    if (pos_ == buf_.size()) refill();
    size_t take = std::min(n, buf_.size() - pos_);
    std::memcpy(p, buf_.data() + pos_, take);
    pos_ += take;
    p += take;
    n -= take;
  }
}

uint64_t Csprng::next_u64() {
  uint64_t v;
  fill(&v, sizeof(v));
  return v;
}

uint32_t Csprng::next_u32() {
  uint32_t v;
  fill(&v, sizeof(v));
  return v;
}

Block Csprng::next_block() {
  uint8_t raw[16];
  fill(raw, sizeof(raw));
  return block_from_bytes(raw);
}

uint64_t Csprng::below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Rejection sampling on the top of the range to avoid modulo bias.
  uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  for (;;) {
    uint64_t v = next_u64();
    if (v <= limit) return v % n;
  }
}

double Csprng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::vector<uint8_t> Csprng::bytes(size_t n) {
  std::vector<uint8_t> v(n);
  fill(v.data(), n);
  return v;
}

Csprng Csprng::fork(std::string_view label) const {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, key_.data(), key_.size());
  const uint8_t sep = 0x1f;
  crypto_hash_sha256_update(&st, &sep, 1);
  crypto_hash_sha256_update(&st,
                            reinterpret_cast<const uint8_t*>(label.data()),
                            label.size());
  std::array<uint8_t, 32> child;
  crypto_hash_sha256_final(&st, child.data());
  return Csprng(child);
}

}  // namespace privlift
