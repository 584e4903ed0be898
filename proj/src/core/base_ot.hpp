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

// Diffie-Hellman base oblivious transfer (Chou-Orlandi) over ristretto255.
// One group element from the sender, one per transfer from the receiver,
// then both 128-bit messages encrypted under per-index keys. Used directly
// for small evaluator inputs and as the seed phase of the OT extension.
void base_ot_send(net::Channel& ch,
                  std::span<const std::pair<Block, Block>> messages,
                  Csprng& rng);

std::vector<Block> base_ot_recv(net::Channel& ch,
                                std::span<const uint8_t> choices, Csprng& rng);

}  // namespace privlift::twopc
