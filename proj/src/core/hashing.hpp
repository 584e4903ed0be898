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
#include <string_view>
#include <vector>

namespace privlift {

using Sha256Digest = std::array<uint8_t, 32>;

Sha256Digest sha256(std::span<const uint8_t> data);
std::array<uint8_t, 64> sha512(std::span<const uint8_t> data);

// Incremental SHA-256, used for wire-protocol transcripts.
class Sha256 {
 public:
  Sha256();
  void update(std::span<const uint8_t> data);
  void update_byte(uint8_t b);
  void update_u32(uint32_t v);  // big-endian
  Sha256Digest digest() const;  // does not disturb the running state

 private:
  // Opaque copy of libsodium's state; sized generously.
  std::array<uint8_t, 128> state_;
};

std::string to_hex(std::span<const uint8_t> data);
std::vector<uint8_t> from_hex(std::string_view hex);  // throws on bad input

}  // namespace privlift
