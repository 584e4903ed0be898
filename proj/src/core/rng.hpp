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
#include <string_view>
#include <vector>

#include "core/block.hpp"

namespace privlift {

// ChaCha20-based deterministic CSPRNG. Every source of randomness in the
// pipeline draws from one of these so that seeded runs are reproducible.
// Not thread-safe; fork() per worker instead of sharing.
class Csprng {
 public:
  // Seeds from the OS.
  Csprng();
  explicit Csprng(const std::array<uint8_t, 32>& seed);
  // Convenience for CLI-style integer seeds; domain-separated from raw keys.
  static Csprng from_seed64(uint64_t seed);

  void fill(void* out, size_t n);
  uint64_t next_u64();
  uint32_t next_u32();
  Block next_block();
  // Unbiased value in [0, n). n must be nonzero.
  uint64_t below(uint64_t n);
  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  std::vector<uint8_t> bytes(size_t n);

  // Independent child stream. Streams forked with distinct labels never
  // overlap, and forking does not disturb this stream's output.
  Csprng fork(std::string_view label) const;

 private:
  void refill();

  std::array<uint8_t, 32> key_;
  uint64_t counter_ = 0;
  std::array<uint8_t, 4096> buf_;
  size_t pos_;
};

}  // namespace privlift
