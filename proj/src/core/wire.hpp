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
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace privlift {

// Little scratch writer/reader for message payloads. Integers are
// little-endian on the wire (frame headers are big-endian, see channel).
class WireWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { append(&v, 2); }
  void u32(uint32_t v) { append(&v, 4); }
  void u64(uint64_t v) { append(&v, 8); }
  void bytes(std::span<const uint8_t> b) { append(b.data(), b.size()); }
  void str(std::string_view s) {
    u32(static_cast<uint32_t>(s.size()));
    append(s.data(), s.size());
  }
  std::vector<uint8_t> take() { return std::move(buf_); }
  const std::vector<uint8_t>& view() const { return buf_; }

 private:
  void append(const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<uint8_t> buf_;
};

class WireReader {
 public:
  explicit WireReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() { return load<uint16_t>(); }
  uint32_t u32() { return load<uint32_t>(); }
  uint64_t u64() { return load<uint64_t>(); }
  std::span<const uint8_t> bytes(size_t n) { return take(n); }
  std::string str() {
    uint32_t n = u32();
    auto b = take(n);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) {
      throw ProtocolError(Errc::kMalformedMessage, "trailing payload bytes");
    }
  }

 private:
  std::span<const uint8_t> take(size_t n) {
    if (remaining() < n) {
      throw ProtocolError(Errc::kMalformedMessage, "short payload");
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T load() {
    T v;
    auto s = take(sizeof(T));
    std::memcpy(&v, s.data(), sizeof(T));
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace privlift
