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
#include <string>
#include <vector>

#include "core/circuit.hpp"

namespace privlift::circuit {

// A wire reference or a compile-time constant. Gadgets fold constants, so
// e.g. adding a zero-extended word only pays for the carry chain it really
// needs and XOR with a known-zero bit emits nothing.
class Bit {
 public:
  Bit() : v_(kZeroTag) {}
  static Bit zero() { return Bit(kZeroTag); }
  static Bit one() { return Bit(kOneTag); }
  static Bit wire(uint32_t w) { return Bit(static_cast<int64_t>(w)); }
  static Bit konst(bool b) { return b ? one() : zero(); }

  bool is_const() const { return v_ < 0; }
  bool const_value() const { return v_ == kOneTag; }
  uint32_t wire_id() const { return static_cast<uint32_t>(v_); }

 private:
  explicit Bit(int64_t v) : v_(v) {}
  static constexpr int64_t kZeroTag = -1;
  static constexpr int64_t kOneTag = -2;
  int64_t v_;
};

// Little-endian vector of bits: word[0] is the LSB.
using Word = std::vector<Bit>;

class CircuitBuilder {
 public:
  // All inputs must be declared before the first gate.
  Word input(Role party, const std::string& name, uint32_t width);
  void output(Role party, const std::string& name, const Word& bits);

  // Finalizes, validates, and returns the circuit.
  Circuit take();

  uint64_t and_count() const { return c_.and_count; }
  uint64_t gate_count() const { return c_.gates.size(); }

  // Bit ops with constant folding. INV on a wire is a real (free) gate.
  Bit bxor(Bit a, Bit b);
  Bit band(Bit a, Bit b);
  Bit bnot(Bit a);
  Bit bor(Bit a, Bit b);

  // Word helpers. Arithmetic is unsigned with wraparound; two's complement
  // signed values use the same gadgets. Widths must match exactly where two
  // word operands are taken; widen explicitly with zext.
  static Word constant(uint64_t v, uint32_t width);
  static Word zext(const Word& a, uint32_t width);
  static Word trunc(const Word& a, uint32_t width);
  // Value shifted left by `by` zero bits, width grows accordingly.
  static Word shl_grow(const Word& a, uint32_t by);

  Word bxor_words(const Word& a, const Word& b);
  Word and_broadcast(const Word& a, Bit s);
  Word add(const Word& a, const Word& b);
  Word sub(const Word& a, const Word& b);
  // (a - b, borrow). borrow = 1 iff a < b.
  std::pair<Word, Bit> sub_borrow(const Word& a, const Word& b);
  Bit ult(const Word& a, const Word& b);
  Bit eq(const Word& a, const Word& b);
  Bit eq_const(const Word& a, uint64_t v);
  Word mux(Bit sel, const Word& when_set, const Word& when_clear);
  // Product at full width a.size() + b.size().
  Word mul(const Word& a, const Word& b);
  // min(x, bound), same width as x.
  Word clamp_const(const Word& x, uint64_t bound);
  // Floor quotient, width of num. Divisor zero yields all-ones (callers
  // guarantee a positive divisor).
  Word udiv(const Word& num, const Word& den);
  // Fixed-point divide with frac_bits fractional bits: trunc((num << F) / den)
  // at the input width. Inputs are treated as unsigned.
  Word div_fixed(const Word& num, const Word& den, uint32_t frac_bits);
  // Fixed-point square root: floor(sqrt(x << F)), width of x, unsigned.
  Word sqrt_fixed(const Word& x, uint32_t frac_bits);
  // Integer floor sqrt of an unsigned word (result width ceil(w/2)).
  Word isqrt(const Word& x);

 private:
  Bit emit(GateKind k, Bit a, Bit b);
  // Adds x into acc starting at bit `offset`, rippling the carry to the top
  // of acc. acc is modified in place.
  void add_into(Word& acc, const Word& x, uint32_t offset);

  Circuit c_;
  bool inputs_closed_ = false;
};

}  // namespace privlift::circuit
