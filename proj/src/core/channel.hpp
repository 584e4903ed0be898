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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/hashing.hpp"

namespace privlift::net {

// Frame types on the party-to-party channels. One byte on the wire.
enum class MsgType : uint8_t {
  kHello = 0x01,
  kAbort = 0x02,
  kPidMaskedBatch = 0x10,
  kPidDoubleMaskedBatch = 0x11,
  kPidSpineHash = 0x12,
  kOtBaseMsg = 0x20,
  kOtExtMatrix = 0x21,
  kGcInputLabels = 0x30,
  kGcTables = 0x31,
  kOutputDecode = 0x32,
  kTranscriptHash = 0x33,
  kShareNotify = 0x40,
  kAggPreflight = 0x41,
  kResult = 0x42,
};

bool msg_type_known(uint8_t t);
const char* msg_type_name(MsgType t);

struct Frame {
  MsgType type;
  std::vector<uint8_t> payload;
};

// Frame header: 4-byte big-endian length (type byte + payload), then the type
// byte, then the payload. Hard cap well below anything a peer could use to
// exhaust memory.
inline constexpr size_t kMaxFramePayload = (64u << 20) - 1;

std::vector<uint8_t> encode_frame(MsgType type,
                                  std::span<const uint8_t> payload);
// Parses one frame from the front of `data`. Returns the frame and the number
// of bytes consumed, or nullopt if more bytes are needed. Throws on oversized
// or unknown-type frames.
std::optional<std::pair<Frame, size_t>> decode_frame(
    std::span<const uint8_t> data);

// Frame-atomic duplex channel. A running SHA-256 transcript covers every
// substantive frame in protocol order (both directions; the protocols here
// are strictly turn-based so both parties observe the same order). Transcript
// comparison frames themselves are excluded.
class Channel {
 public:
  virtual ~Channel() = default;

  void send(MsgType type, std::span<const uint8_t> payload);
  Frame recv();
  // recv() + type check. Translates an incoming ABORT into kPeerAbort.
  std::vector<uint8_t> expect(MsgType type);

  // Sends an ABORT frame with a reason; never throws.
  void send_abort(const std::string& reason) noexcept;

  Sha256Digest transcript_digest() const { return transcript_.digest(); }

  // Test hook: observe every frame crossing this channel.
  using CaptureFn =
      std::function<void(bool outgoing, MsgType, std::span<const uint8_t>)>;
  void set_capture(CaptureFn fn) { capture_ = std::move(fn); }

 protected:
  virtual void send_impl(MsgType type, std::span<const uint8_t> payload) = 0;
  virtual Frame recv_impl() = 0;

 private:
  void fold(const Frame& f);
  Sha256 transcript_;
  CaptureFn capture_;
};

// In-process channel pair backed by a bounded frame queue per direction.
// Used by tests and by same-process pipelines.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
make_local_channel_pair(size_t capacity_bytes = 256u << 20);

// Blocking TCP with the framing above. Nagle off.
class TcpChannel final : public Channel {
 public:
  ~TcpChannel() override;
  TcpChannel(TcpChannel&&) = delete;

  static std::unique_ptr<TcpChannel> from_fd(int fd);
  // Dials host:port, retrying connection refusal for `retry_ms`.
  static std::unique_ptr<TcpChannel> connect(const std::string& host,
                                             uint16_t port,
                                             int retry_ms = 10000);

 protected:
  void send_impl(MsgType type, std::span<const uint8_t> payload) override;
  Frame recv_impl() override;

 private:
  explicit TcpChannel(int fd) : fd_(fd) {}
  int fd_;
};

// Listening socket that hands out accepted TcpChannels.
class TcpListener {
 public:
  // port 0 binds an ephemeral port; bound_port() reports the real one.
  explicit TcpListener(uint16_t port);
  ~TcpListener();
  TcpListener(TcpListener&&) = delete;

  uint16_t bound_port() const { return port_; }
  std::unique_ptr<TcpChannel> accept_one();

 private:
  int fd_;
  uint16_t port_;
};

}  // namespace privlift::net
