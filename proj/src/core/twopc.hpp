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

#include <span>
#include <utility>

#include "core/channel.hpp"
#include "core/circuit.hpp"
#include "core/rng.hpp"

namespace privlift::twopc {

struct TwopcResult {
  // This party's bound outputs only.
  circuit::EvalResult outputs;
  // Channel transcript after both parties confirmed agreement.
  Sha256Digest transcript;
};

// One garbled-circuit execution over `ch`. Garbling is free-XOR with
// point-and-permute four-row AND tables; evaluator inputs arrive by oblivious
// transfer; tables stream in bounded chunks so memory stays flat in the gate
// count. `my_bits` are this party's input bits, bindings concatenated in
// declaration order. Both parties learn exactly their bound outputs, confirm
// output authenticity against label hashes, and compare channel transcripts.
// Blocks until the peer completes; throws ProtocolError on any divergence.
TwopcResult run_2pc(net::Channel& ch, const circuit::Circuit& c,
                    circuit::Role role, std::span<const uint8_t> my_bits,
                    Csprng& rng);

// Test helper: runs both parties of run_2pc over an in-process channel pair,
// garbler on a second thread. Returns (garbler result, evaluator result).
std::pair<TwopcResult, TwopcResult> run_2pc_local(
    const circuit::Circuit& c, std::span<const uint8_t> garbler_bits,
    std::span<const uint8_t> evaluator_bits, uint64_t seed);

}  // namespace privlift::twopc
