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
#include <span>
#include <string>
#include <vector>

#include "core/channel.hpp"
#include "core/group.hpp"
#include "core/rng.hpp"

namespace privlift::pid {

enum class Party : uint8_t { kPublisher = 0, kAdvertiser = 1 };

inline Party other_party(Party p) {
  return p == Party::kPublisher ? Party::kAdvertiser : Party::kPublisher;
}

// Pseudonymous row key shared by both parties after the join.
using Uid = std::array<uint8_t, 32>;

struct PidResult {
  // Sorted, deduplicated union of both parties' pseudonymous keys. Identical
  // on both sides (checked by hash exchange before returning).
  std::vector<Uid> spine;
  // My input row -> spine position.
  std::vector<uint32_t> row_to_spine;
};

// Derives the shared key for a doubly-masked element. Exposed so tests can
// compute expected spines from known exponents.
Uid kdf_uid(const group::GroupElement& doubly_masked);

// Order-sensitive digest of a spine; the same value both parties compare
// before run_private_id returns.
Sha256Digest spine_digest(std::span<const Uid> spine);

// Two-sided Diffie-Hellman identity join. Each party masks its hashed
// identifiers with a private exponent, the peer adds its own exponent, and
// the common double-masked values key the row-aligned spine.
//
// What the peer learns, by design: my set size, the intersection size, and
// (for identifiers it holds) whether they are in my set. Batches are sent in
// a fresh random order, so nothing ties a masked element back to my row
// order. The publisher speaks first; every step strictly alternates.
//
// `key_override` substitutes the private exponent (tests only).
PidResult run_private_id(net::Channel& ch, Party me,
                         std::span<const std::string> ids, Csprng& rng,
                         const group::Scalar* key_override = nullptr);

}  // namespace privlift::pid
