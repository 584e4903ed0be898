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

#include "core/group.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace privlift::group {

namespace {
constexpr std::string_view kHashTag = "privlift/hash-to-group/v1";

std::array<uint8_t, 32> reverse32(std::span<const uint8_t> in) {
  std::array<uint8_t, 32> out;
  for (int i = 0; i < 32; i++) out[i] = in[31 - i];
  return out;
}
}  // namespace

Scalar Scalar::random(Csprng& rng) {
  Scalar s;
  for (;;) {
    // Reduce 64 uniform bytes mod the order; bias is negligible.
    uint8_t wide[64];
    rng.fill(wide, sizeof(wide));
    crypto_core_ristretto255_scalar_reduce(s.bytes_.data(), wide);
    if (!s.is_zero()) return s;
  }
}

std::optional<Scalar> Scalar::deserialize(std::span<const uint8_t> in) {
  if (in.size() != kScalarBytes) return std::nullopt;
  Scalar s;
  s.bytes_ = reverse32(in);
  // Canonical means already reduced: reducing must be the identity.
  uint8_t wide[64] = {0};
  std::memcpy(wide, s.bytes_.data(), 32);
  uint8_t reduced[32];
  crypto_core_ristretto255_scalar_reduce(reduced, wide);
  if (std::memcmp(reduced, s.bytes_.data(), 32) != 0) return std::nullopt;
  return s;
}

std::array<uint8_t, kScalarBytes> Scalar::serialize() const {
  return reverse32(bytes_);
}

bool Scalar::is_zero() const {
  uint8_t acc = 0;
  for (uint8_t b : bytes_) acc |= b;
  return acc == 0;
}

Scalar Scalar::invert() const {
  if (is_zero()) throw std::invalid_argument("scalar invert of zero");
  Scalar out;
  if (crypto_core_ristretto255_scalar_invert(out.bytes_.data(),
                                             bytes_.data()) != 0) {
    throw std::invalid_argument("scalar invert failed");
  }
  return out;
}

Scalar Scalar::mul(const Scalar& other) const {
  Scalar out;
  crypto_core_ristretto255_scalar_mul(out.bytes_.data(), bytes_.data(),
                                      other.bytes_.data());
  return out;
}

std::optional<GroupElement> GroupElement::deserialize(
    std::span<const uint8_t> in) {
  if (in.size() != kElementBytes) return std::nullopt;
  GroupElement e;
  std::copy(in.begin(), in.end(), e.bytes_.begin());
  if (crypto_core_ristretto255_is_valid_point(e.bytes_.data()) != 1) {
    return std::nullopt;
  }
  return e;
}

GroupElement hash_to_group(std::span<const uint8_t> input) {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  crypto_hash_sha512_update(
      &st, reinterpret_cast<const uint8_t*>(kHashTag.data()), kHashTag.size());
  crypto_hash_sha512_update(&st, input.data(), input.size());
  uint8_t wide[64];
  crypto_hash_sha512_final(&st, wide);

  GroupElement e;
  crypto_core_ristretto255_from_hash(e.bytes_.data(), wide);
  return e;
}

GroupElement exp(const GroupElement& g, const Scalar& k) {
  if (k.is_zero()) throw std::invalid_argument("exp by zero scalar");
  GroupElement out;
  if (crypto_scalarmult_ristretto255(out.bytes_.data(), k.raw(),
                                     g.bytes_.data()) != 0) {
    throw std::invalid_argument("exp on degenerate element");
  }
  return out;
}

GroupElement basepoint_mul(const Scalar& k) {
  if (k.is_zero()) throw std::invalid_argument("exp by zero scalar");
  GroupElement out;
  if (crypto_scalarmult_ristretto255_base(out.bytes_.data(), k.raw()) != 0) {
    throw std::invalid_argument("basepoint mul failed");
  }
  return out;
}

GroupElement add(const GroupElement& a, const GroupElement& b) {
  GroupElement out;
  if (crypto_core_ristretto255_add(out.bytes_.data(), a.bytes_.data(),
                                   b.bytes_.data()) != 0) {
    throw std::invalid_argument("group add on invalid element");
  }
  return out;
}

GroupElement sub(const GroupElement& a, const GroupElement& b) {
  GroupElement out;
  if (crypto_core_ristretto255_sub(out.bytes_.data(), a.bytes_.data(),
                                   b.bytes_.data()) != 0) {
    throw std::invalid_argument("group sub on invalid element");
  }
  return out;
}

std::string normalize_identifier(std::string_view id) {
  size_t begin = 0, end = id.size();
  auto is_space = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (begin < end && is_space(id[begin])) begin++;
  while (end > begin && is_space(id[end - 1])) end--;
  std::string out;
  out.reserve(end - begin);
  for (size_t i = begin; i < end; i++) {
    char c = id[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

GroupElement hash_identifier(std::string_view id) {
  std::string norm = normalize_identifier(id);
  return hash_to_group(
      {reinterpret_cast<const uint8_t*>(norm.data()), norm.size()});
}

}  // namespace privlift::group
