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

#include "core/hashing.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace privlift {

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

Sha256Digest sha256(std::span<const uint8_t> data) {
  Sha256Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::array<uint8_t, 64> sha512(std::span<const uint8_t> data) {
  std::array<uint8_t, 64> out;
  crypto_hash_sha512(out.data(), data.data(), data.size());
  return out;
}

Sha256::Sha256() {
  auto* st = reinterpret_cast<crypto_hash_sha256_state*>(state_.data());
  crypto_hash_sha256_init(st);
}

void Sha256::update(std::span<const uint8_t> data) {
  auto* st = reinterpret_cast<crypto_hash_sha256_state*>(state_.data());
  crypto_hash_sha256_update(st, data.data(), data.size());
}

void Sha256::update_byte(uint8_t b) { update({&b, 1}); }

void Sha256::update_u32(uint32_t v) {
  uint8_t be[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                   static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
  update(be);
}

Sha256Digest Sha256::digest() const {
  std::array<uint8_t, 128> copy = state_;
  auto* st = reinterpret_cast<crypto_hash_sha256_state*>(copy.data());
  Sha256Digest out;
  crypto_hash_sha256_final(st, out.data());
  return out;
}

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (uint8_t b : data) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); i++) {
    int hi = hex_val(hex[2 * i]), lo = hex_val(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

}  // namespace privlift
