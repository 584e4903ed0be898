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

#include "core/circuit.hpp"

#include <algorithm>

#include "core/errors.hpp"
#include "core/wire.hpp"

namespace privlift::circuit {

uint32_t Circuit::party_input_width(Role r) const {
  uint32_t w = 0;
  for (const auto& b : inputs) {
    if (b.party == r) w += b.width;
  }
  return w;
}

std::vector<uint32_t> Circuit::party_output_wires(Role r) const {
  std::vector<uint32_t> ws;
  for (const auto& b : outputs) {
    if (b.party == r) ws.insert(ws.end(), b.wires.begin(), b.wires.end());
  }
  return ws;
}

void Circuit::validate() const {
  auto fail = [](const std::string& why) {
    throw ProtocolError(Errc::kBadInput, "invalid circuit: " + why);
  };
  const uint32_t nw = num_wires();
  if (nw > (1u << 30)) fail("too many wires");

  // Input bindings must tile [0, num_inputs) in order.
  uint32_t cursor = 0;
  for (const auto& b : inputs) {
    if (b.first_wire != cursor) fail("input bindings not contiguous");
    if (b.width == 0) fail("empty input binding " + b.name);
    cursor += b.width;
  }
  if (cursor != num_inputs) fail("input bindings do not cover inputs");

  for (size_t i = 0; i < gates.size(); i++) {
    uint64_t g = gates[i];
    uint32_t out = num_inputs + static_cast<uint32_t>(i);
    uint32_t a = gate_a(g), b = gate_b(g);
    GateKind k = gate_kind(g);
    if (k != GateKind::kXor && k != GateKind::kAnd && k != GateKind::kInv) {
      fail("unknown gate kind");
    }
    if (a >= out) fail("gate reads a later wire");
    if (a >= num_inputs && out - a > kMaxWireSpan) fail("operand span too far");
    if (k != GateKind::kInv) {
      if (b >= out) fail("gate reads a later wire");
      if (b >= num_inputs && out - b > kMaxWireSpan) {
        fail("operand span too far");
      }
    }
  }

  uint64_t ands = 0;
  for (uint64_t g : gates) {
    if (gate_kind(g) == GateKind::kAnd) ands++;
  }
  if (ands != and_count) fail("and_count out of sync");

  std::vector<std::string> names;
  std::vector<uint32_t> bound;
  for (const auto& b : outputs) {
    names.push_back(b.name);
    for (uint32_t w : b.wires) {
      if (w >= nw) fail("output wire out of range");
      if (w >= num_inputs && nw - w > kMaxWireSpan) {
        fail("output wire too far from the end");
      }
      bound.push_back(w);
    }
  }
  for (const auto& b : inputs) names.push_back(b.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    fail("duplicate binding name");
  }
  std::sort(bound.begin(), bound.end());
  if (std::adjacent_find(bound.begin(), bound.end()) != bound.end()) {
    fail("output wire bound twice");
  }
}

Sha256Digest Circuit::fingerprint() const {
  WireWriter w;
  w.str("circuit-fp-v1");
  w.u32(num_inputs);
  w.u64(gates.size());
  w.u64(and_count);
  w.u32(static_cast<uint32_t>(inputs.size()));
  for (const auto& b : inputs) {
    w.u8(static_cast<uint8_t>(b.party));
    w.str(b.name);
    w.u32(b.first_wire);
    w.u32(b.width);
  }
  w.u32(static_cast<uint32_t>(outputs.size()));
  for (const auto& b : outputs) {
    w.u8(static_cast<uint8_t>(b.party));
    w.str(b.name);
    w.u32(static_cast<uint32_t>(b.wires.size()));
    for (uint32_t wire : b.wires) w.u32(wire);
  }
  constexpr size_t kSample = 4096;
  size_t head = std::min(gates.size(), kSample);
  w.bytes({reinterpret_cast<const uint8_t*>(gates.data()), head * 8});
  if (gates.size() > kSample) {
    size_t tail = std::min(gates.size() - kSample, kSample);
    w.bytes({reinterpret_cast<const uint8_t*>(gates.data() + gates.size() -
                                              tail),
             tail * 8});
  }
  return sha256(w.view());
}

void Circuit::dump(std::ostream& os) const {
  os << "inputs " << num_inputs << " gates " << gates.size() << " ands "
     << and_count << "\n";
  for (const auto& b : inputs) {
    os << "in " << (b.party == Role::kGarbler ? "garbler" : "evaluator") << " "
       << b.name << " " << b.first_wire << " " << b.width << "\n";
  }
  for (const auto& b : outputs) {
    os << "out " << (b.party == Role::kGarbler ? "garbler" : "evaluator")
       << " " << b.name;
    for (uint32_t w : b.wires) os << " " << w;
    os << "\n";
  }
  for (size_t i = 0; i < gates.size(); i++) {
    uint64_t g = gates[i];
    uint32_t out = num_inputs + static_cast<uint32_t>(i);
    switch (gate_kind(g)) {
      case GateKind::kXor:
        os << i << " XOR " << gate_a(g) << " " << gate_b(g) << " " << out;
        break;
      case GateKind::kAnd:
        os << i << " AND " << gate_a(g) << " " << gate_b(g) << " " << out;
        break;
      case GateKind::kInv:
        os << i << " INV " << gate_a(g) << " - " << out;
        break;
    }
    os << "\n";
  }
}

uint64_t EvalResult::as_u64(const std::string& name) const {
  auto it = bits.find(name);
  if (it == bits.end()) {
    throw ProtocolError(Errc::kBadInput, "no output binding " + name);
  }
  return bits_to_u64(it->second);
}

std::vector<uint64_t> EvalResult::as_u64_words(const std::string& name) const {
  auto it = bits.find(name);
  if (it == bits.end()) {
    throw ProtocolError(Errc::kBadInput, "no output binding " + name);
  }
  const auto& v = it->second;
  if (v.size() % 64 != 0) {
    throw ProtocolError(Errc::kBadInput, "binding width not word aligned");
  }
  std::vector<uint64_t> words(v.size() / 64);
  for (size_t i = 0; i < words.size(); i++) {
    words[i] = bits_to_u64({v.data() + i * 64, 64});
  }
  return words;
}

EvalResult eval_plaintext(const Circuit& c,
                          std::span<const uint8_t> garbler_bits,
                          std::span<const uint8_t> evaluator_bits) {
  if (garbler_bits.size() != c.party_input_width(Role::kGarbler) ||
      evaluator_bits.size() != c.party_input_width(Role::kEvaluator)) {
    throw ProtocolError(Errc::kBadInput, "input width mismatch");
  }
  std::vector<uint8_t> wires(c.num_wires());
  size_t gpos = 0, epos = 0;
  for (const auto& b : c.inputs) {
    auto& pos = (b.party == Role::kGarbler) ? gpos : epos;
    const auto& src = (b.party == Role::kGarbler) ? garbler_bits
                                                  : evaluator_bits;
    for (uint32_t i = 0; i < b.width; i++) {
      wires[b.first_wire + i] = src[pos++] & 1;
    }
  }
  for (size_t i = 0; i < c.gates.size(); i++) {
    uint64_t g = c.gates[i];
    uint8_t a = wires[Circuit::gate_a(g)];
    switch (Circuit::gate_kind(g)) {
      case GateKind::kXor:
        wires[c.num_inputs + i] = a ^ wires[Circuit::gate_b(g)];
        break;
      case GateKind::kAnd:
        wires[c.num_inputs + i] = a & wires[Circuit::gate_b(g)];
        break;
      case GateKind::kInv:
        wires[c.num_inputs + i] = a ^ 1;
        break;
    }
  }
  EvalResult res;
  for (const auto& b : c.outputs) {
    std::vector<uint8_t> bits(b.wires.size());
    for (size_t i = 0; i < b.wires.size(); i++) bits[i] = wires[b.wires[i]];
    res.bits.emplace(b.name, std::move(bits));
  }
  return res;
}

std::vector<uint8_t> u64_to_bits(uint64_t v, uint32_t width) {
  std::vector<uint8_t> bits(width);
  for (uint32_t i = 0; i < width; i++) bits[i] = (v >> i) & 1;
  return bits;
}

uint64_t bits_to_u64(std::span<const uint8_t> bits) {
  if (bits.size() > 64) {
    throw ProtocolError(Errc::kBadInput, "word wider than 64 bits");
  }
  uint64_t v = 0;
  for (size_t i = 0; i < bits.size(); i++) {
    v |= static_cast<uint64_t>(bits[i] & 1) << i;
  }
  return v;
}

}  // namespace privlift::circuit
