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

#include "core/builder.hpp"

#include <stdexcept>

#include "core/errors.hpp"

namespace privlift::circuit {

namespace {
void require(bool ok, const char* why) {
  if (!ok) throw ProtocolError(Errc::kBadInput, why);
}
}  // namespace

Word CircuitBuilder::input(Role party, const std::string& name,
                           uint32_t width) {
  require(!inputs_closed_, "inputs must be declared before gates");
  require(width > 0, "empty input binding");
  InputBinding b{party, name, c_.num_inputs, width};
  c_.inputs.push_back(b);
  Word w(width);
  for (uint32_t i = 0; i < width; i++) w[i] = Bit::wire(c_.num_inputs + i);
  c_.num_inputs += width;
  return w;
}

void CircuitBuilder::output(Role party, const std::string& name,
                            const Word& bits) {
  OutputBinding b{party, name, {}};
  b.wires.reserve(bits.size());
  for (Bit bit : bits) {
    // Output wires must be real wires; pin constants down with a gate. XOR
    // of a wire with itself gives zero without touching input semantics.
    if (bit.is_const()) {
      require(c_.num_inputs > 0, "constant output in a circuit with no wires");
      Bit z = emit(GateKind::kXor, Bit::wire(0), Bit::wire(0));
      bit = bit.const_value() ? emit(GateKind::kInv, z, z) : z;
    }
    b.wires.push_back(bit.wire_id());
  }
  c_.outputs.push_back(std::move(b));
}

Circuit CircuitBuilder::take() {
  c_.validate();
  return std::move(c_);
}

Bit CircuitBuilder::emit(GateKind k, Bit a, Bit b) {
  inputs_closed_ = true;
  if (k == GateKind::kAnd) c_.and_count++;
  c_.gates.push_back(Circuit::pack_gate(k, a.wire_id(),
                                        k == GateKind::kInv ? 0
                                                            : b.wire_id()));
  return Bit::wire(c_.num_inputs + static_cast<uint32_t>(c_.gates.size()) - 1);
}

Bit CircuitBuilder::bxor(Bit a, Bit b) {
  if (a.is_const() && b.is_const()) {
    return Bit::konst(a.const_value() ^ b.const_value());
  }
  if (a.is_const()) return a.const_value() ? bnot(b) : b;
  if (b.is_const()) return b.const_value() ? bnot(a) : a;
  return emit(GateKind::kXor, a, b);
}

Bit CircuitBuilder::band(Bit a, Bit b) {
  if (a.is_const()) return a.const_value() ? b : Bit::zero();
  if (b.is_const()) return b.const_value() ? a : Bit::zero();
  return emit(GateKind::kAnd, a, b);
}

Bit CircuitBuilder::bnot(Bit a) {
  if (a.is_const()) return Bit::konst(!a.const_value());
  return emit(GateKind::kInv, a, a);
}

Bit CircuitBuilder::bor(Bit a, Bit b) {
  // a | b = (a ^ b) ^ (a & b)
  return bxor(bxor(a, b), band(a, b));
}

Word CircuitBuilder::constant(uint64_t v, uint32_t width) {
  Word w(width);
  for (uint32_t i = 0; i < width; i++) {
    w[i] = Bit::konst(i < 64 && ((v >> i) & 1));
  }
  return w;
}

Word CircuitBuilder::zext(const Word& a, uint32_t width) {
  require(width >= a.size(), "zext narrows");
  Word w = a;
  w.resize(width, Bit::zero());
  return w;
}

Word CircuitBuilder::trunc(const Word& a, uint32_t width) {
  require(width <= a.size(), "trunc widens");
  return Word(a.begin(), a.begin() + width);
}

Word CircuitBuilder::shl_grow(const Word& a, uint32_t by) {
  Word w(by, Bit::zero());
  w.insert(w.end(), a.begin(), a.end());
  return w;
}

Word CircuitBuilder::bxor_words(const Word& a, const Word& b) {
  require(a.size() == b.size(), "width mismatch in xor");
  Word out(a.size());
  for (size_t i = 0; i < a.size(); i++) out[i] = bxor(a[i], b[i]);
  return out;
}

Word CircuitBuilder::and_broadcast(const Word& a, Bit s) {
  Word out(a.size());
  for (size_t i = 0; i < a.size(); i++) out[i] = band(a[i], s);
  return out;
}

Word CircuitBuilder::add(const Word& a, const Word& b) {
  require(a.size() == b.size(), "width mismatch in add");
  Word out(a.size());
  Bit c = Bit::zero();
  for (size_t i = 0; i < a.size(); i++) {
    // Full adder: sum = a^b^c, carry' = ((a^c)&(b^c))^c. Constant operands
    // collapse to half adders or to nothing.
    Bit x1 = bxor(a[i], c);
    Bit x2 = bxor(b[i], c);
    out[i] = bxor(x1, b[i]);
    c = bxor(band(x1, x2), c);
  }
  return out;
}

std::pair<Word, Bit> CircuitBuilder::sub_borrow(const Word& a, const Word& b) {
  require(a.size() == b.size(), "width mismatch in sub");
  Word out(a.size());
  Bit bw = Bit::zero();
  for (size_t i = 0; i < a.size(); i++) {
    // Difference = a^b^bw; borrow' = maj(!a, b, bw).
    Bit x1 = bxor(a[i], bw);
    Bit x2 = bxor(b[i], bw);
    out[i] = bxor(x1, b[i]);
    bw = bxor(band(bnot(x1), x2), bw);
  }
  return {out, bw};
}

Word CircuitBuilder::sub(const Word& a, const Word& b) {
  return sub_borrow(a, b).first;
}

Bit CircuitBuilder::ult(const Word& a, const Word& b) {
  return sub_borrow(a, b).second;
}

Bit CircuitBuilder::eq(const Word& a, const Word& b) {
  require(a.size() == b.size(), "width mismatch in eq");
  std::vector<Bit> terms(a.size());
  for (size_t i = 0; i < a.size(); i++) terms[i] = bnot(bxor(a[i], b[i]));
  // Balanced AND reduction.
  while (terms.size() > 1) {
    std::vector<Bit> next;
    for (size_t i = 0; i + 1 < terms.size(); i += 2) {
      next.push_back(band(terms[i], terms[i + 1]));
    }
    if (terms.size() % 2 == 1) next.push_back(terms.back());
    terms = std::move(next);
  }
  return terms.empty() ? Bit::one() : terms[0];
}

Bit CircuitBuilder::eq_const(const Word& a, uint64_t v) {
  return eq(a, constant(v, static_cast<uint32_t>(a.size())));
}

Word CircuitBuilder::mux(Bit sel, const Word& when_set,
                         const Word& when_clear) {
  require(when_set.size() == when_clear.size(), "width mismatch in mux");
  Word out(when_set.size());
  for (size_t i = 0; i < out.size(); i++) {
    out[i] = bxor(when_clear[i],
                  band(sel, bxor(when_set[i], when_clear[i])));
  }
  return out;
}

void CircuitBuilder::add_into(Word& acc, const Word& x, uint32_t offset) {
  require(offset + x.size() <= acc.size(), "add_into out of range");
  Bit c = Bit::zero();
  for (size_t i = 0; i < x.size(); i++) {
    Bit& a = acc[offset + i];
    Bit x1 = bxor(a, c);
    Bit x2 = bxor(x[i], c);
    Bit s = bxor(x1, x[i]);
    c = bxor(band(x1, x2), c);
    a = s;
  }
  for (size_t i = offset + x.size(); i < acc.size(); i++) {
    if (c.is_const() && !c.const_value()) break;
    Bit& a = acc[i];
    Bit s = bxor(a, c);
    c = band(a, c);
    a = s;
  }
}

Word CircuitBuilder::mul(const Word& a, const Word& b) {
  require(!a.empty() && !b.empty(), "empty multiplicand");
  Word acc = constant(0, static_cast<uint32_t>(a.size() + b.size()));
  for (size_t j = 0; j < b.size(); j++) {
    Word pp = and_broadcast(a, b[j]);
    add_into(acc, pp, static_cast<uint32_t>(j));
  }
  return acc;
}

Word CircuitBuilder::clamp_const(const Word& x, uint64_t bound) {
  Word cap = constant(bound, static_cast<uint32_t>(x.size()));
  Bit over = ult(cap, x);  // bound < x
  return mux(over, cap, x);
}

Word CircuitBuilder::udiv(const Word& num, const Word& den) {
  require(!num.empty() && !den.empty(), "empty division operand");
  const uint32_t wq = static_cast<uint32_t>(num.size());
  const uint32_t wr = static_cast<uint32_t>(den.size()) + 1;
  Word rem = constant(0, wr);
  Word den_ext = zext(den, wr);
  Word q(wq);
  for (uint32_t step = 0; step < wq; step++) {
    uint32_t i = wq - 1 - step;
    // rem = (rem << 1) | num[i]; the dropped top bit is provably zero.
    rem.pop_back();
    rem.insert(rem.begin(), num[i]);
    auto [diff, borrow] = sub_borrow(rem, den_ext);
    Bit qi = bnot(borrow);
    q[i] = qi;
    rem = mux(qi, diff, rem);
  }
  return q;
}

Word CircuitBuilder::div_fixed(const Word& num, const Word& den,
                               uint32_t frac_bits) {
  require(num.size() == den.size(), "width mismatch in div_fixed");
  Word shifted = shl_grow(num, frac_bits);
  Word q = udiv(shifted, den);
  return trunc(q, static_cast<uint32_t>(num.size()));
}

Word CircuitBuilder::isqrt(const Word& x) {
  uint32_t n = static_cast<uint32_t>(x.size());
  uint32_t n_even = (n + 1) & ~1u;
  Word v = zext(x, n_even);
  uint32_t rw = n_even / 2;
  const uint32_t wr = rw + 3;
  Word rem = constant(0, wr);
  Word root;  // grows LSB-first; bit s of the loop is the next lower root bit
  for (uint32_t s = 0; s < rw; s++) {
    // Shift the next two bits of the radicand into the remainder.
    Bit hi = v[n_even - 1 - 2 * s];
    Bit lo = v[n_even - 2 - 2 * s];
    rem.pop_back();
    rem.pop_back();
    rem.insert(rem.begin(), hi);
    rem.insert(rem.begin(), lo);
    // Trial subtrahend 4*root + 1.
    Word trial;
    trial.push_back(Bit::one());
    trial.push_back(Bit::zero());
    trial.insert(trial.end(), root.begin(), root.end());
    auto [diff, borrow] = sub_borrow(rem, zext(trial, wr));
    Bit g = bnot(borrow);
    rem = mux(g, diff, rem);
    root.insert(root.begin(), g);
  }
  return root;
}

Word CircuitBuilder::sqrt_fixed(const Word& x, uint32_t frac_bits) {
  Word widened = shl_grow(x, frac_bits);
  Word root = isqrt(widened);
  if (root.size() >= x.size()) return trunc(root, static_cast<uint32_t>(x.size()));
  return zext(root, static_cast<uint32_t>(x.size()));
}

}  // namespace privlift::circuit
