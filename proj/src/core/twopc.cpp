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

#include "core/twopc.hpp"

#include <cstring>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

#include "core/aes_hash.hpp"
#include "core/errors.hpp"
#include "core/ot_extension.hpp"
#include "core/wire.hpp"

namespace privlift::twopc {

namespace {

using circuit::Circuit;
using circuit::GateKind;
using circuit::Role;

constexpr uint8_t kTableMagic[4] = {'G', 'T', '0', '1'};
// 16 MiB frames for both label and table streams.
constexpr size_t kLabelsPerFrame = 1u << 20;
constexpr size_t kTableBlocksPerFrame = 1u << 20;
static_assert(kTableBlocksPerFrame % 4 == 0,
              "AND tables must not split across frames");

// Labels for input wires live in a flat array; gate outputs live in a ring
// strictly larger than the wire-span bound the circuit validator enforces, so
// any operand or output reference still holds its label when read.
constexpr uint32_t kRingSize = 1u << 20;
static_assert(kRingSize >= 2 * circuit::kMaxWireSpan);

class LabelStore {
 public:
  explicit LabelStore(uint32_t num_inputs)
      : num_inputs_(num_inputs), inputs_(num_inputs), ring_(kRingSize) {}

  void set_input(uint32_t w, Block b) { inputs_[w] = b; }
  void push(Block b) { ring_[next_++ & (kRingSize - 1)] = b; }

  Block get(uint32_t w) const {
    if (w < num_inputs_) return inputs_[w];
    return ring_[(w - num_inputs_) & (kRingSize - 1)];
  }

 private:
  uint32_t num_inputs_;
  std::vector<Block> inputs_;
  std::vector<Block> ring_;
  uint64_t next_ = 0;
};

// Walks the wires a party owns, input bindings in declaration order.
class BindingCursor {
 public:
  BindingCursor(const Circuit& c, Role party) : c_(c), party_(party) {
    skip();
  }
  bool done() const { return idx_ == c_.inputs.size(); }
  uint32_t next() {
    uint32_t w = c_.inputs[idx_].first_wire + off_;
    if (++off_ == c_.inputs[idx_].width) {
      off_ = 0;
      ++idx_;
      skip();
    }
    return w;
  }

 private:
  void skip() {
    while (idx_ < c_.inputs.size() &&
           (c_.inputs[idx_].party != party_ || c_.inputs[idx_].width == 0)) {
      ++idx_;
    }
  }
  const Circuit& c_;
  Role party_;
  size_t idx_ = 0;
  uint32_t off_ = 0;
};

Block dec_hash(const Aes128& aes, Block label, uint32_t wire) {
  return cr_hash1(aes, label, tweak_block(wire, 1));
}

// Four-row point-and-permute AND table. Row index is the pair of label
// permute bits the evaluator will see; free-XOR keeps lsb(delta) = 1 so the
// two labels of a wire always differ in their permute bit.
void garble_and(const Aes128& aes, Block a0, Block b0, Block delta, Block out0,
                uint32_t out_wire, Block table[4]) {
  Block tweak = tweak_block(out_wire, 0);
  Block a2[2] = {block_gf_double(a0), block_gf_double(block_xor(a0, delta))};
  Block b4[2] = {block_gf_double(block_gf_double(b0)),
                 block_gf_double(block_gf_double(block_xor(b0, delta)))};
  Block sigma[4], h[4];
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      sigma[2 * i + j] = block_xor(a2[i], block_xor(b4[j], tweak));
    }
  }
  aes.encrypt4(sigma, h);
  int pa = block_lsb(a0), pb = block_lsb(b0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      int row = 2 * (pa ^ i) + (pb ^ j);
      Block v = block_xor(h[2 * i + j], sigma[2 * i + j]);
      v = block_xor(v, out0);
      if (i & j) v = block_xor(v, delta);
      table[row] = v;
    }
  }
}

void append_block(std::vector<uint8_t>& buf, Block b) {
  uint8_t raw[16];
  block_to_bytes(b, raw);
  buf.insert(buf.end(), raw, raw + 16);
}

TwopcResult run_garbler(net::Channel& ch, const Circuit& c,
                        std::span<const uint8_t> bits, Csprng& rng) {
  Csprng gc_rng = rng.fork("gc-garble");
  Block delta = block_set_lsb(gc_rng.next_block());
  std::array<uint8_t, 16> hash_key;
  gc_rng.fill(hash_key.data(), hash_key.size());
  Aes128 aes(hash_key);

  LabelStore w0(c.num_inputs);
  for (uint32_t w = 0; w < c.num_inputs; ++w) {
    w0.set_input(w, gc_rng.next_block());
  }

  // Evaluator inputs by OT, transfer order = the peer's binding order.
  {
    std::vector<std::pair<Block, Block>> pairs;
    pairs.reserve(c.party_input_width(Role::kEvaluator));
    for (BindingCursor cur(c, Role::kEvaluator); !cur.done();) {
      Block l0 = w0.get(cur.next());
      pairs.emplace_back(l0, block_xor(l0, delta));
    }
    ot_send(ch, pairs, rng);
  }

  // Own active labels, streamed.
  {
    std::vector<uint8_t> buf;
    size_t bit = 0;
    for (BindingCursor cur(c, Role::kGarbler); !cur.done();) {
      uint32_t w = cur.next();
      Block l = w0.get(w);
      if (bits[bit++]) l = block_xor(l, delta);
      append_block(buf, l);
      if (buf.size() == kLabelsPerFrame * 16) {
        ch.send(net::MsgType::kGcInputLabels, buf);
        buf.clear();
      }
    }
    if (!buf.empty()) ch.send(net::MsgType::kGcInputLabels, buf);
  }

  {
    WireWriter hdr;
    hdr.bytes(kTableMagic);
    hdr.bytes(hash_key);
    hdr.bytes(c.fingerprint());
    hdr.u64(c.and_count);
    hdr.u64(c.gates.size());
    hdr.u32(c.num_inputs);
    ch.send(net::MsgType::kGcTables, hdr.take());
  }

  {
    std::vector<uint8_t> buf;
    buf.reserve(kTableBlocksPerFrame * 16);
    uint32_t out_wire = c.num_inputs;
    Block table[4];
    for (uint64_t g : c.gates) {
      Block a = w0.get(Circuit::gate_a(g));
      switch (Circuit::gate_kind(g)) {
        case GateKind::kXor:
          w0.push(block_xor(a, w0.get(Circuit::gate_b(g))));
          break;
        case GateKind::kInv:
          w0.push(block_xor(a, delta));
          break;
        case GateKind::kAnd: {
          Block out0 = gc_rng.next_block();
          garble_and(aes, a, w0.get(Circuit::gate_b(g)), delta, out0, out_wire,
                     table);
          for (int r = 0; r < 4; ++r) append_block(buf, table[r]);
          if (buf.size() == kTableBlocksPerFrame * 16) {
            ch.send(net::MsgType::kGcTables, buf);
            buf.clear();
          }
          w0.push(out0);
          break;
        }
      }
      ++out_wire;
    }
    if (!buf.empty()) ch.send(net::MsgType::kGcTables, buf);
  }

  // Decode hashes for every evaluator-bound wire. Hashes rather than permute
  // bits: the evaluator checks its label is one of the two valid ones instead
  // of blindly trusting a bit.
  {
    std::vector<uint8_t> dec;
    for (const auto& ob : c.outputs) {
      if (ob.party != Role::kEvaluator) continue;
      for (uint32_t w : ob.wires) {
        Block l0 = w0.get(w);
        append_block(dec, dec_hash(aes, l0, w));
        append_block(dec, dec_hash(aes, block_xor(l0, delta), w));
      }
    }
    ch.send(net::MsgType::kOutputDecode, dec);
  }

  // Own outputs come back as active labels.
  TwopcResult res;
  {
    auto labels = ch.expect(net::MsgType::kOutputDecode);
    size_t pos = 0;
    for (const auto& ob : c.outputs) {
      if (ob.party != Role::kGarbler) continue;
      auto& out = res.outputs.bits[ob.name];
      out.reserve(ob.wires.size());
      for (uint32_t w : ob.wires) {
        if (pos + 16 > labels.size()) {
          throw ProtocolError(Errc::kMalformedMessage,
                              "short output label message");
        }
        Block act = block_from_bytes(labels.data() + pos);
        pos += 16;
        Block l0 = w0.get(w);
        if (block_eq(act, l0)) {
          out.push_back(0);
        } else if (block_eq(act, block_xor(l0, delta))) {
          out.push_back(1);
        } else {
          throw ProtocolError(Errc::kDecodeFailure,
                              "output label is not on wire " +
                                  std::to_string(w));
        }
      }
    }
    if (pos != labels.size()) {
      throw ProtocolError(Errc::kMalformedMessage,
                          "trailing output label bytes");
    }
  }

  res.transcript = ch.transcript_digest();
  ch.send(net::MsgType::kTranscriptHash, res.transcript);
  auto peer = ch.expect(net::MsgType::kTranscriptHash);
  if (peer.size() != res.transcript.size() ||
      !std::equal(peer.begin(), peer.end(), res.transcript.begin())) {
    throw ProtocolError(Errc::kTranscriptMismatch,
                        "channel transcripts diverge");
  }
  return res;
}

TwopcResult run_evaluator(net::Channel& ch, const Circuit& c,
                          std::span<const uint8_t> bits, Csprng& rng) {
  LabelStore act(c.num_inputs);

  {
    std::vector<Block> mine = ot_recv(ch, bits, rng);
    size_t i = 0;
    for (BindingCursor cur(c, Role::kEvaluator); !cur.done();) {
      act.set_input(cur.next(), mine[i++]);
    }
  }

  {
    uint64_t remaining = c.party_input_width(Role::kGarbler);
    BindingCursor cur(c, Role::kGarbler);
    while (remaining > 0) {
      auto frame = ch.expect(net::MsgType::kGcInputLabels);
      if (frame.empty() || frame.size() % 16 != 0 ||
          frame.size() / 16 > remaining) {
        throw ProtocolError(Errc::kMalformedMessage, "bad input label frame");
      }
      for (size_t pos = 0; pos < frame.size(); pos += 16) {
        act.set_input(cur.next(), block_from_bytes(frame.data() + pos));
      }
      remaining -= frame.size() / 16;
    }
  }

  Aes128 aes;
  {
    auto hdr_bytes = ch.expect(net::MsgType::kGcTables);
    WireReader hdr(hdr_bytes);
    auto magic = hdr.bytes(4);
    if (std::memcmp(magic.data(), kTableMagic, 4) != 0) {
      throw ProtocolError(Errc::kMalformedMessage, "bad table header magic");
    }
    std::array<uint8_t, 16> hash_key;
    std::memcpy(hash_key.data(), hdr.bytes(16).data(), 16);
    auto fp = hdr.bytes(32);
    uint64_t and_count = hdr.u64();
    uint64_t gate_count = hdr.u64();
    uint32_t num_inputs = hdr.u32();
    hdr.expect_end();
    auto own_fp = c.fingerprint();
    if (!std::equal(fp.begin(), fp.end(), own_fp.begin()) ||
        and_count != c.and_count || gate_count != c.gates.size() ||
        num_inputs != c.num_inputs) {
      throw ProtocolError(Errc::kBindingMismatch,
                          "parties hold different circuits");
    }
    aes.set_key(hash_key);
  }

  {
    std::vector<uint8_t> chunk;
    size_t pos = 0;
    auto next_table = [&](Block table[4]) {
      if (pos == chunk.size()) {
        chunk = ch.expect(net::MsgType::kGcTables);
        pos = 0;
        if (chunk.empty() || chunk.size() % 64 != 0) {
          throw ProtocolError(Errc::kMalformedMessage, "bad table frame");
        }
      }
      for (int r = 0; r < 4; ++r) {
        table[r] = block_from_bytes(chunk.data() + pos);
        pos += 16;
      }
    };
    uint32_t out_wire = c.num_inputs;
    Block table[4];
    for (uint64_t g : c.gates) {
      Block a = act.get(Circuit::gate_a(g));
      switch (Circuit::gate_kind(g)) {
        case GateKind::kXor:
          act.push(block_xor(a, act.get(Circuit::gate_b(g))));
          break;
        case GateKind::kInv:
          // Free inverter: the garbler flipped the wire's zero-label.
          act.push(a);
          break;
        case GateKind::kAnd: {
          next_table(table);
          Block b = act.get(Circuit::gate_b(g));
          int row = 2 * block_lsb(a) + block_lsb(b);
          Block h = cr_hash(aes, a, b, tweak_block(out_wire, 0));
          act.push(block_xor(h, table[row]));
          break;
        }
      }
      ++out_wire;
    }
    if (pos != chunk.size()) {
      throw ProtocolError(Errc::kMalformedMessage, "trailing table bytes");
    }
  }

  TwopcResult res;
  {
    auto dec = ch.expect(net::MsgType::kOutputDecode);
    size_t pos = 0;
    for (const auto& ob : c.outputs) {
      if (ob.party != Role::kEvaluator) continue;
      auto& out = res.outputs.bits[ob.name];
      out.reserve(ob.wires.size());
      for (uint32_t w : ob.wires) {
        if (pos + 32 > dec.size()) {
          throw ProtocolError(Errc::kMalformedMessage,
                              "short output decode message");
        }
        Block h = dec_hash(aes, act.get(w), w);
        Block h0 = block_from_bytes(dec.data() + pos);
        Block h1 = block_from_bytes(dec.data() + pos + 16);
        pos += 32;
        if (block_eq(h, h0)) {
          out.push_back(0);
        } else if (block_eq(h, h1)) {
          out.push_back(1);
        } else {
          throw ProtocolError(Errc::kDecodeFailure,
                              "no decode hash matches wire " +
                                  std::to_string(w));
        }
      }
    }
    if (pos != dec.size()) {
      throw ProtocolError(Errc::kMalformedMessage,
                          "trailing output decode bytes");
    }
  }

  {
    std::vector<uint8_t> labels;
    for (const auto& ob : c.outputs) {
      if (ob.party != Role::kGarbler) continue;
      for (uint32_t w : ob.wires) append_block(labels, act.get(w));
    }
    ch.send(net::MsgType::kOutputDecode, labels);
  }

  auto peer = ch.expect(net::MsgType::kTranscriptHash);
  res.transcript = ch.transcript_digest();
  ch.send(net::MsgType::kTranscriptHash, res.transcript);
  if (peer.size() != res.transcript.size() ||
      !std::equal(peer.begin(), peer.end(), res.transcript.begin())) {
    throw ProtocolError(Errc::kTranscriptMismatch,
                        "channel transcripts diverge");
  }
  return res;
}

}  // namespace

TwopcResult run_2pc(net::Channel& ch, const Circuit& c, Role role,
                    std::span<const uint8_t> my_bits, Csprng& rng) {
  c.validate();
  if (my_bits.size() != c.party_input_width(role)) {
    throw ProtocolError(Errc::kBadInput,
                        "input bit count does not match bindings");
  }
  for (uint8_t b : my_bits) {
    if (b > 1) throw ProtocolError(Errc::kBadInput, "input bits must be 0 or 1");
  }
  try {
    return role == Role::kGarbler ? run_garbler(ch, c, my_bits, rng)
                                  : run_evaluator(ch, c, my_bits, rng);
  } catch (const ProtocolError& e) {
    if (e.code() != Errc::kPeerAbort && e.code() != Errc::kChannelClosed) {
      ch.send_abort(e.what());
    }
    throw;
  }
}

std::pair<TwopcResult, TwopcResult> run_2pc_local(
    const Circuit& c, std::span<const uint8_t> garbler_bits,
    std::span<const uint8_t> evaluator_bits, uint64_t seed) {
  auto [g_ch, e_ch] = net::make_local_channel_pair();
  Csprng root = Csprng::from_seed64(seed);
  Csprng g_rng = root.fork("garbler");
  Csprng e_rng = root.fork("evaluator");

  TwopcResult g_res;
  std::exception_ptr g_err;
  // Each side owns its channel endpoint so a party that fails before the
  // protocol starts still closes it and unblocks the peer.
  std::thread g_thread([&, ch = std::move(g_ch)]() mutable {
    try {
      g_res = run_2pc(*ch, c, Role::kGarbler, garbler_bits, g_rng);
    } catch (...) {
      g_err = std::current_exception();
    }
    ch.reset();
  });
  TwopcResult e_res;
  std::exception_ptr e_err;
  {
    auto ch = std::move(e_ch);
    try {
      e_res = run_2pc(*ch, c, Role::kEvaluator, evaluator_bits, e_rng);
    } catch (...) {
      e_err = std::current_exception();
    }
  }
  g_thread.join();
  if (g_err) std::rethrow_exception(g_err);
  if (e_err) std::rethrow_exception(e_err);
  return {std::move(g_res), std::move(e_res)};
}

}  // namespace privlift::twopc
