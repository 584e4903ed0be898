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
#include <span>
#include <utility>
#include <vector>

#include "core/block.hpp"
#include "core/channel.hpp"
#include "core/rng.hpp"

namespace privlift::twopc {

// Up to this many transfers run over the DH base OT directly; beyond it the
// IKNP extension amortizes the group operations down to 128 base transfers.
// Both parties see the same count, so dispatch needs no negotiation.
inline constexpr size_t kOtExtThreshold = 128;

// Extension batch, in transfers. Bounds per-frame size and working memory.
inline constexpr size_t kOtBatchRows = 1u << 18;

void ot_send(net::Channel& ch,
             std::span<const std::pair<Block, Block>> messages, Csprng& rng);

std::vector<Block> ot_recv(net::Channel& ch, std::span<const uint8_t> choices,
                           Csprng& rng);

// 128x128 bit transpose, rows as (low word, high word) pairs. Exposed for
// tests.
void transpose_128(uint64_t m[128][2]);

}  // namespace privlift::twopc
