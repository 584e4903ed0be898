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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "core/rng.hpp"

namespace privlift::group {

// Prime-order group used by the identity join and the base oblivious
// transfer: ristretto255. Elements and scalars serialize to 32 bytes;
// element encodings are canonical (accept-then-reserialize is the identity)
// and scalar encodings are big-endian and fully reduced.
inline constexpr size_t kElementBytes = 32;
inline constexpr size_t kScalarBytes = 32;

class Scalar {
 public:
  Scalar() : bytes_{} {}

  // Uniform nonzero scalar.
  static Scalar random(Csprng& rng);
  // Parses the canonical big-endian encoding. Rejects non-reduced values.
  static std::optional<Scalar> deserialize(std::span<const uint8_t> in);

  std::array<uint8_t, kScalarBytes> serialize() const;  // big-endian
  bool is_zero() const;
  // Multiplicative inverse mod the group order. Rejects zero.
  Scalar invert() const;
  Scalar mul(const Scalar& other) const;

  bool operator==(const Scalar& other) const { return bytes_ == other.bytes_; }

  // Little-endian limb order, as the underlying library expects.
  const uint8_t* raw() const { return bytes_.data(); }

 private:
  std::array<uint8_t, kScalarBytes> bytes_;
};

class GroupElement {
 public:
  GroupElement() : bytes_{} {}

  // Validates that the encoding is a canonical group element.
  static std::optional<GroupElement> deserialize(std::span<const uint8_t> in);

  std::array<uint8_t, kElementBytes> serialize() const { return bytes_; }

  bool operator==(const GroupElement& other) const {
    return bytes_ == other.bytes_;
  }

  const uint8_t* raw() const { return bytes_.data(); }

 private:
  friend GroupElement hash_to_group(std::span<const uint8_t>);
  friend GroupElement exp(const GroupElement&, const Scalar&);
  friend GroupElement basepoint_mul(const Scalar&);
  friend GroupElement add(const GroupElement&, const GroupElement&);
  friend GroupElement sub(const GroupElement&, const GroupElement&);
  std::array<uint8_t, kElementBytes> bytes_;
};

// Maps arbitrary bytes onto the group with no known discrete log, via the
// library's from-uniform-bytes map over SHA-512 of a domain tag plus input.
GroupElement hash_to_group(std::span<const uint8_t> input);

// g^k. Rejects the zero scalar and (for hash outputs) never yields identity.
GroupElement exp(const GroupElement& g, const Scalar& k);

GroupElement basepoint_mul(const Scalar& k);
GroupElement add(const GroupElement& a, const GroupElement& b);
GroupElement sub(const GroupElement& a, const GroupElement& b);

// Identifier canonicalization applied before hashing: trim ASCII whitespace,
// lowercase ASCII letters, leave other UTF-8 bytes untouched.
std::string normalize_identifier(std::string_view id);

GroupElement hash_identifier(std::string_view id);

}  // namespace privlift::group
