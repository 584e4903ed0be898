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

#include "core/private_id.hpp"

#include <algorithm>
#include <numeric>

#include "core/errors.hpp"
#include "core/hashing.hpp"
#include "core/wire.hpp"

namespace privlift::pid {

namespace {

// Elements per batch frame; keeps frames at 16 MiB for arbitrarily large
// input sets.
constexpr uint64_t kChunkElems = 1u << 19;

constexpr char kUidTag[] = "privlift/uid/v1";
constexpr char kSpineTag[] = "privlift/spine/v1";

void send_batch(net::Channel& ch, net::MsgType type,
                std::span<const std::array<uint8_t, 32>> elems) {
  const uint64_t total = elems.size();
  uint64_t offset = 0;
  do {
    const uint64_t count = std::min(kChunkElems, total - offset);
    WireWriter w;
    w.u64(total);
    w.u64(offset);
    w.u32(static_cast<uint32_t>(count));
    for (uint64_t i = 0; i < count; ++i) w.bytes(elems[offset + i]);
    ch.send(type, w.take());
    offset += count;
  } while (offset < total);
}

std::vector<std::array<uint8_t, 32>> recv_batch(net::Channel& ch,
                                                net::MsgType type) {
  std::vector<std::array<uint8_t, 32>> out;
  uint64_t expect_total = 0, offset = 0;
  bool first = true;
  do {
    auto payload = ch.expect(type);
    WireReader rd(payload);
    uint64_t total = rd.u64();
    uint64_t off = rd.u64();
    uint32_t count = rd.u32();
    if (first) {
      if (total > (1ull << 32)) {
        throw ProtocolError(Errc::kMalformedMessage, "batch too large");
      }
      expect_total = total;
      // Growth tracks chunks actually received, so a fake huge total cannot
      // balloon memory ahead of real data.
      out.reserve(std::min(total, kChunkElems));
      first = false;
    }
    if (total != expect_total || off != offset || count > total - offset) {
      throw ProtocolError(Errc::kMalformedMessage, "bad batch chunk");
    }
    for (uint32_t i = 0; i < count; ++i) {
      auto b = rd.bytes(32);
      std::array<uint8_t, 32> e;
      std::copy(b.begin(), b.end(), e.begin());
      out.push_back(e);
    }
    rd.expect_end();
    offset += count;
  } while (offset < expect_total);
  return out;
}

std::vector<std::array<uint8_t, 32>> mask_peer_batch(
    std::span<const std::array<uint8_t, 32>> singles,
    const group::Scalar& key) {
  std::vector<std::array<uint8_t, 32>> out;
  out.reserve(singles.size());
  for (const auto& enc : singles) {
    auto e = group::GroupElement::deserialize(enc);
    if (!e) {
      throw ProtocolError(Errc::kMalformedMessage,
                          "masked batch holds an invalid element");
    }
    out.push_back(group::exp(*e, key).serialize());
  }
  return out;
}

}  // namespace

Sha256Digest spine_digest(std::span<const Uid> spine) {
  Sha256 h;
  h.update({reinterpret_cast<const uint8_t*>(kSpineTag), sizeof(kSpineTag) - 1});
  for (const auto& uid : spine) h.update(uid);
  return h.digest();
}

Uid kdf_uid(const group::GroupElement& doubly_masked) {
  Sha256 h;
  h.update({reinterpret_cast<const uint8_t*>(kUidTag), sizeof(kUidTag) - 1});
  h.update(doubly_masked.serialize());
  return h.digest();
}

PidResult run_private_id(net::Channel& ch, Party me,
                         std::span<const std::string> ids, Csprng& rng,
                         const group::Scalar* key_override) {
  const size_t n = ids.size();
  group::Scalar key =
      key_override ? *key_override : group::Scalar::random(rng);

  // Mask own identifiers, then send them in a fresh random order. perm[pos]
  // is the input row sitting at batch position pos.
  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  std::vector<std::array<uint8_t, 32>> mine(n);
  for (size_t pos = 0; pos < n; ++pos) {
    mine[pos] =
        group::exp(group::hash_identifier(ids[perm[pos]]), key).serialize();
  }

  std::vector<std::array<uint8_t, 32>> peer_singles;
  std::vector<std::array<uint8_t, 32>> peer_doubles;
  std::vector<std::array<uint8_t, 32>> my_doubles;
  if (me == Party::kPublisher) {
    send_batch(ch, net::MsgType::kPidMaskedBatch, mine);
    peer_singles = recv_batch(ch, net::MsgType::kPidMaskedBatch);
    peer_doubles = mask_peer_batch(peer_singles, key);
    send_batch(ch, net::MsgType::kPidDoubleMaskedBatch, peer_doubles);
    my_doubles = recv_batch(ch, net::MsgType::kPidDoubleMaskedBatch);
  } else {
    peer_singles = recv_batch(ch, net::MsgType::kPidMaskedBatch);
    send_batch(ch, net::MsgType::kPidMaskedBatch, mine);
    my_doubles = recv_batch(ch, net::MsgType::kPidDoubleMaskedBatch);
    peer_doubles = mask_peer_batch(peer_singles, key);
    send_batch(ch, net::MsgType::kPidDoubleMaskedBatch, peer_doubles);
  }
  if (my_doubles.size() != n) {
    throw ProtocolError(Errc::kMalformedMessage,
                        "peer returned wrong double-mask count");
  }

  // Row UIDs from my own returned elements; spine from the union.
  auto to_uid = [](const std::array<uint8_t, 32>& enc) {
    auto e = group::GroupElement::deserialize(enc);
    if (!e) {
      throw ProtocolError(Errc::kMalformedMessage,
                          "double-masked batch holds an invalid element");
    }
    return kdf_uid(*e);
  };
  std::vector<Uid> row_uid(n);
  for (size_t pos = 0; pos < n; ++pos) row_uid[perm[pos]] = to_uid(my_doubles[pos]);

  PidResult res;
  res.spine.reserve(n + peer_doubles.size());
  res.spine.assign(row_uid.begin(), row_uid.end());
  for (const auto& enc : peer_doubles) res.spine.push_back(to_uid(enc));
  std::sort(res.spine.begin(), res.spine.end());
  res.spine.erase(std::unique(res.spine.begin(), res.spine.end()),
                  res.spine.end());

  // Both parties must hold the identical spine before any rows key off it.
  auto digest = spine_digest(res.spine);
  std::vector<uint8_t> peer_digest;
  if (me == Party::kPublisher) {
    ch.send(net::MsgType::kPidSpineHash, digest);
    peer_digest = ch.expect(net::MsgType::kPidSpineHash);
  } else {
    peer_digest = ch.expect(net::MsgType::kPidSpineHash);
    ch.send(net::MsgType::kPidSpineHash, digest);
  }
  if (peer_digest.size() != digest.size() ||
      !std::equal(peer_digest.begin(), peer_digest.end(), digest.begin())) {
    throw ProtocolError(Errc::kSpineDivergence,
                        "parties computed different spines");
  }

  res.row_to_spine.resize(n);
  for (size_t i = 0; i < n; ++i) {
    auto it = std::lower_bound(res.spine.begin(), res.spine.end(), row_uid[i]);
    res.row_to_spine[i] =
        static_cast<uint32_t>(std::distance(res.spine.begin(), it));
  }
  return res;
}

}  // namespace privlift::pid
