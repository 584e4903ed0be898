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
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "core/hashing.hpp"

namespace privlift::circuit {

enum class Role : uint8_t { kGarbler = 0, kEvaluator = 1 };

inline Role other_role(Role r) {
  return r == Role::kGarbler ? Role::kEvaluator : Role::kGarbler;
}

enum class GateKind : uint8_t { kXor = 0, kAnd = 1, kInv = 2 };

// Named contiguous range of input wires owned by one party.
struct InputBinding {
  Role party;
  std::string name;
  uint32_t first_wire;
  uint32_t width;
};

// Named list of wires revealed to exactly one party.
struct OutputBinding {
  Role party;
  std::string name;
  std::vector<uint32_t> wires;
};

// Streaming-friendly bound on how far back a gate may reference a non-input
// wire, and on how far from the end an output wire may sit. Lets both garbler
// and evaluator keep labels in a fixed ring instead of one slot per wire.
inline constexpr uint32_t kMaxWireSpan = 1u << 19;

// Pure boolean circuit over XOR/AND/INV. Wires are numbered with inputs
// first; gate i drives wire num_inputs + i, so the gate list is topologically
// ordered by construction. Gates pack into 8 bytes: kind(2) | a(31) | b(31).
class Circuit {
 public:
  uint32_t num_inputs = 0;
  std::vector<uint64_t> gates;
  uint64_t and_count = 0;
  std::vector<InputBinding> inputs;
  std::vector<OutputBinding> outputs;

  uint32_t num_wires() const {
    return num_inputs + static_cast<uint32_t>(gates.size());
  }
  static uint64_t pack_gate(GateKind k, uint32_t a, uint32_t b) {
    return (static_cast<uint64_t>(k) << 62) | (static_cast<uint64_t>(a) << 31) |
           b;
  }
  static GateKind gate_kind(uint64_t g) {
    return static_cast<GateKind>(g >> 62);
  }
  static uint32_t gate_a(uint64_t g) {
    return static_cast<uint32_t>((g >> 31) & 0x7fffffffu);
  }
  static uint32_t gate_b(uint64_t g) {
    return static_cast<uint32_t>(g & 0x7fffffffu);
  }

  uint32_t party_input_width(Role r) const;
  std::vector<uint32_t> party_output_wires(Role r) const;

  // Structural checks: operand ordering, wire-span bounds, binding coverage
  // (input bindings partition the input range, output wires are bound to
  // exactly one party). Throws ProtocolError(kBadInput) with a reason.
  void validate() const;

  // Cheap structural agreement fingerprint: counts, bindings, and a sample of
  // the gate list. Wire-protocol integrity is covered separately by the
  // channel transcript.
  Sha256Digest fingerprint() const;

  // Debug dump: one line per gate, `id KIND a b out`, with binding headers.
  void dump(std::ostream& os) const;
};

struct EvalResult {
  std::map<std::string, std::vector<uint8_t>> bits;  // binding name -> 0/1

  uint64_t as_u64(const std::string& name) const;
  std::vector<uint64_t> as_u64_words(const std::string& name) const;
};

// Reference evaluation in the clear; the oracle against which the garbled
// execution is checked. Input bit vectors are each party's bindings
// concatenated in declaration order.
EvalResult eval_plaintext(const Circuit& c,
                          std::span<const uint8_t> garbler_bits,
                          std::span<const uint8_t> evaluator_bits);

std::vector<uint8_t> u64_to_bits(uint64_t v, uint32_t width);
uint64_t bits_to_u64(std::span<const uint8_t> bits);

}  // namespace privlift::circuit
