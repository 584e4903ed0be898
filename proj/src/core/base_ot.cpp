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

#include "core/base_ot.hpp"

#include <cstring>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/group.hpp"
#include "core/hashing.hpp"
#include "core/wire.hpp"

namespace privlift::twopc {

namespace {

constexpr char kKeyTag[] = "privlift/base-ot/key/v1";

// Key for transfer i from the shared group element. Truncated SHA-256.
Block derive_key(const group::GroupElement& e, uint64_t index) {
  Sha256 h;
  h.update({reinterpret_cast<const uint8_t*>(kKeyTag), sizeof(kKeyTag) - 1});
  auto enc = e.serialize();
  h.update(enc);
  uint8_t idx[8];
  for (int k = 0; k < 8; ++k) idx[k] = static_cast<uint8_t>(index >> (8 * k));
  h.update(idx);
  auto digest = h.digest();
  return block_from_bytes(digest.data());
}

group::GroupElement parse_element(std::span<const uint8_t> bytes) {
  auto e = group::GroupElement::deserialize(bytes);
  if (!e) {
    throw ProtocolError(Errc::kMalformedMessage,
                        "base OT: invalid group element");
  }
  return *e;
}

}  // namespace

void base_ot_send(net::Channel& ch,
                  std::span<const std::pair<Block, Block>> messages,
                  Csprng& rng) {
  const uint64_t n = messages.size();
  group::Scalar a = group::Scalar::random(rng);
  group::GroupElement big_a = group::basepoint_mul(a);
  // T = A^a lets the sender strip the receiver's A-term for choice 1.
  group::GroupElement t = group::exp(big_a, a);

  WireWriter first;
  first.u64(n);
  auto enc_a = big_a.serialize();
  first.bytes(enc_a);
  ch.send(net::MsgType::kOtBaseMsg, first.take());

  auto reply = ch.expect(net::MsgType::kOtBaseMsg);
  if (reply.size() != n * group::kElementBytes) {
    throw ProtocolError(Errc::kMalformedMessage, "base OT: bad B batch size");
  }

  WireWriter out;
  for (uint64_t i = 0; i < n; ++i) {
    auto b = parse_element(
        std::span(reply).subspan(i * group::kElementBytes, group::kElementBytes));
    group::GroupElement k0_point = group::exp(b, a);
    group::GroupElement k1_point = group::sub(k0_point, t);
    Block y0 = block_xor(messages[i].first, derive_key(k0_point, i));
    Block y1 = block_xor(messages[i].second, derive_key(k1_point, i));
    uint8_t buf[16];
    block_to_bytes(y0, buf);
    out.bytes(std::span<const uint8_t>(buf, 16));
    block_to_bytes(y1, buf);
    out.bytes(std::span<const uint8_t>(buf, 16));
  }
  ch.send(net::MsgType::kOtBaseMsg, out.take());
}

std::vector<Block> base_ot_recv(net::Channel& ch,
                                std::span<const uint8_t> choices, Csprng& rng) {
  const uint64_t n = choices.size();
  auto first = ch.expect(net::MsgType::kOtBaseMsg);
  WireReader rd(first);
  uint64_t sender_n = rd.u64();
  auto enc_a = rd.bytes(group::kElementBytes);
  rd.expect_end();
  if (sender_n != n) {
    throw ProtocolError(Errc::kMalformedMessage, "base OT: count mismatch");
  }
  group::GroupElement big_a = parse_element(enc_a);

  std::vector<group::Scalar> secrets;
  secrets.reserve(n);
  WireWriter bs;
  for (uint64_t i = 0; i < n; ++i) {
    if (choices[i] > 1) throw std::invalid_argument("choice bit out of range");
    group::Scalar b = group::Scalar::random(rng);
    group::GroupElement point = group::basepoint_mul(b);
    if (choices[i]) point = group::add(big_a, point);
    auto enc = point.serialize();
    bs.bytes(enc);
    secrets.push_back(b);
  }
  ch.send(net::MsgType::kOtBaseMsg, bs.take());

  auto pads = ch.expect(net::MsgType::kOtBaseMsg);
  if (pads.size() != n * 32) {
    throw ProtocolError(Errc::kMalformedMessage, "base OT: bad pad batch size");
  }
  std::vector<Block> out(n);
  for (uint64_t i = 0; i < n; ++i) {
    group::GroupElement key_point = group::exp(big_a, secrets[i]);
    Block key = derive_key(key_point, i);
    Block pad = block_from_bytes(pads.data() + i * 32 + (choices[i] ? 16 : 0));
    out[i] = block_xor(pad, key);
  }
  return out;
}

}  // namespace privlift::twopc
