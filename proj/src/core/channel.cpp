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

#include "core/channel.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>

namespace privlift::net {

bool msg_type_known(uint8_t t) {
  switch (static_cast<MsgType>(t)) {
    case MsgType::kHello:
    case MsgType::kAbort:
    case MsgType::kPidMaskedBatch:
    case MsgType::kPidDoubleMaskedBatch:
    case MsgType::kPidSpineHash:
    case MsgType::kOtBaseMsg:
    case MsgType::kOtExtMatrix:
    case MsgType::kGcInputLabels:
    case MsgType::kGcTables:
    case MsgType::kOutputDecode:
    case MsgType::kTranscriptHash:
    case MsgType::kShareNotify:
    case MsgType::kAggPreflight:
    case MsgType::kResult:
      return true;
  }
  return false;
}

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::kHello: return "HELLO";
    case MsgType::kAbort: return "ABORT";
    case MsgType::kPidMaskedBatch: return "PID_MASKED_BATCH";
    case MsgType::kPidDoubleMaskedBatch: return "PID_DOUBLE_MASKED_BATCH";
    case MsgType::kPidSpineHash: return "PID_SPINE_HASH";
    case MsgType::kOtBaseMsg: return "OT_BASE_MSG";
    case MsgType::kOtExtMatrix: return "OT_EXT_MATRIX";
    case MsgType::kGcInputLabels: return "GC_INPUT_LABELS";
    case MsgType::kGcTables: return "GC_TABLES";
    case MsgType::kOutputDecode: return "OUTPUT_DECODE";
    case MsgType::kTranscriptHash: return "TRANSCRIPT_HASH";
    case MsgType::kShareNotify: return "SHARE_NOTIFY";
    case MsgType::kAggPreflight: return "AGG_PREFLIGHT";
    case MsgType::kResult: return "RESULT";
  }
  return "?";
}

std::vector<uint8_t> encode_frame(MsgType type,
                                  std::span<const uint8_t> payload) {
  if (payload.size() > kMaxFramePayload) {
    throw ProtocolError(Errc::kInternal, "frame payload too large");
  }
  uint32_t len = static_cast<uint32_t>(payload.size()) + 1;
  std::vector<uint8_t> out;
  out.reserve(4 + len);
  out.push_back(static_cast<uint8_t>(len >> 24));
  out.push_back(static_cast<uint8_t>(len >> 16));
  out.push_back(static_cast<uint8_t>(len >> 8));
  out.push_back(static_cast<uint8_t>(len));
  out.push_back(static_cast<uint8_t>(type));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<std::pair<Frame, size_t>> decode_frame(
    std::span<const uint8_t> data) {
  if (data.size() < 4) return std::nullopt;
  uint32_t len = (uint32_t(data[0]) << 24) | (uint32_t(data[1]) << 16) |
                 (uint32_t(data[2]) << 8) | uint32_t(data[3]);
  if (len == 0 || len > kMaxFramePayload + 1) {
    throw ProtocolError(Errc::kMalformedMessage, "bad frame length");
  }
  if (data.size() < 4 + size_t(len)) return std::nullopt;
  uint8_t type = data[4];
  if (!msg_type_known(type)) {
    throw ProtocolError(Errc::kMalformedMessage, "unknown frame type");
  }
  Frame f;
  f.type = static_cast<MsgType>(type);
  f.payload.assign(data.begin() + 5, data.begin() + 4 + len);
  return std::make_pair(std::move(f), 4 + size_t(len));
}

void Channel::fold(const Frame& f) {
  if (f.type == MsgType::kTranscriptHash) return;
  transcript_.update_byte(static_cast<uint8_t>(f.type));
  transcript_.update_u32(static_cast<uint32_t>(f.payload.size()));
  transcript_.update(f.payload);
}

void Channel::send(MsgType type, std::span<const uint8_t> payload) {
  if (payload.size() > kMaxFramePayload) {
    throw ProtocolError(Errc::kInternal, "frame payload too large");
  }
  if (capture_) capture_(true, type, payload);
  Frame f{type, {payload.begin(), payload.end()}};
  fold(f);
  send_impl(type, payload);
}

Frame Channel::recv() {
  Frame f = recv_impl();
  if (capture_) capture_(false, f.type, f.payload);
  fold(f);
  return f;
}

std::vector<uint8_t> Channel::expect(MsgType type) {
  Frame f = recv();
  if (f.type == MsgType::kAbort) {
    std::string reason(f.payload.begin(), f.payload.end());
    throw ProtocolError(Errc::kPeerAbort, "peer abort: " + reason);
  }
  if (f.type != type) {
    throw ProtocolError(Errc::kMalformedMessage,
                        std::string("expected ") + msg_type_name(type) +
                            ", got " + msg_type_name(f.type));
  }
  return std::move(f.payload);
}

void Channel::send_abort(const std::string& reason) noexcept {
  try {
    send(MsgType::kAbort,
         {reinterpret_cast<const uint8_t*>(reason.data()), reason.size()});
  } catch (...) {
  }
}

namespace {

// Shared state for one direction of an in-process channel pair.
struct LocalQueue {
  std::mutex mu;
  std::condition_variable cv_data;
  std::condition_variable cv_space;
  std::deque<Frame> frames;
  size_t bytes = 0;
  size_t capacity;
  bool closed = false;

  explicit LocalQueue(size_t cap) : capacity(cap) {}

  void push(Frame f) {
    std::unique_lock lk(mu);
    cv_space.wait(lk, [&] {
      return closed || bytes + f.payload.size() <= capacity || frames.empty();
    });
    if (closed) {
      throw ProtocolError(Errc::kChannelClosed, "local channel closed");
    }
    bytes += f.payload.size();
    frames.push_back(std::move(f));
    cv_data.notify_one();
  }

  Frame pop() {
    std::unique_lock lk(mu);
    cv_data.wait(lk, [&] { return closed || !frames.empty(); });
    if (frames.empty()) {
      throw ProtocolError(Errc::kChannelClosed, "local channel closed");
    }
    Frame f = std::move(frames.front());
    frames.pop_front();
    bytes -= f.payload.size();
    cv_space.notify_one();
    return f;
  }

  void close() {
    std::lock_guard lk(mu);
    closed = true;
    cv_data.notify_all();
    cv_space.notify_all();
  }
};

class LocalChannel final : public Channel {
 public:
  LocalChannel(std::shared_ptr<LocalQueue> out, std::shared_ptr<LocalQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~LocalChannel() override {
    out_->close();
    in_->close();
  }

 protected:
  void send_impl(MsgType type, std::span<const uint8_t> payload) override {
    out_->push(Frame{type, {payload.begin(), payload.end()}});
  }
  Frame recv_impl() override { return in_->pop(); }

 private:
  std::shared_ptr<LocalQueue> out_;
  std::shared_ptr<LocalQueue> in_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
make_local_channel_pair(size_t capacity_bytes) {
  auto a2b = std::make_shared<LocalQueue>(capacity_bytes);
  auto b2a = std::make_shared<LocalQueue>(capacity_bytes);
  return {std::make_unique<LocalChannel>(a2b, b2a),
          std::make_unique<LocalChannel>(b2a, a2b)};
}

// ---- TCP ----

namespace {
void write_all(int fd, const uint8_t* p, size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(Errc::kChannelClosed,
                          std::string("send: ") + std::strerror(errno));
    }
    p += w;
    n -= static_cast<size_t>(w);
  }
}

void read_all(int fd, uint8_t* p, size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(Errc::kChannelClosed,
                          std::string("recv: ") + std::strerror(errno));
    }
    if (r == 0) {
      throw ProtocolError(Errc::kChannelClosed, "peer closed connection");
    }
    p += r;
    n -= static_cast<size_t>(r);
  }
}
}  // namespace

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpChannel::from_fd(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::unique_ptr<TcpChannel>(new TcpChannel(fd));
}

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host,
                                                uint16_t port, int retry_ms) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ProtocolError(Errc::kBadInput, "bad IPv4 address: " + host);
  }
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(retry_ms);
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ProtocolError(Errc::kInternal, "socket() failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      return from_fd(fd);
    }
    int err = errno;
    ::close(fd);
    // The listener may not be up yet; retry refusals until the deadline.
    if ((err == ECONNREFUSED || err == ETIMEDOUT) &&
        std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      continue;
    }
    throw ProtocolError(Errc::kChannelClosed,
                        std::string("connect: ") + std::strerror(err));
  }
}

void TcpChannel::send_impl(MsgType type, std::span<const uint8_t> payload) {
  uint32_t len = static_cast<uint32_t>(payload.size()) + 1;
  uint8_t hdr[5] = {static_cast<uint8_t>(len >> 24),
                    static_cast<uint8_t>(len >> 16),
                    static_cast<uint8_t>(len >> 8), static_cast<uint8_t>(len),
                    static_cast<uint8_t>(type)};
  write_all(fd_, hdr, sizeof(hdr));
  write_all(fd_, payload.data(), payload.size());
}

Frame TcpChannel::recv_impl() {
  uint8_t hdr[5];
  read_all(fd_, hdr, sizeof(hdr));
  uint32_t len = (uint32_t(hdr[0]) << 24) | (uint32_t(hdr[1]) << 16) |
                 (uint32_t(hdr[2]) << 8) | uint32_t(hdr[3]);
  if (len == 0 || len > kMaxFramePayload + 1) {
    throw ProtocolError(Errc::kMalformedMessage, "bad frame length");
  }
  if (!msg_type_known(hdr[4])) {
    send_abort("unknown frame type");
    throw ProtocolError(Errc::kMalformedMessage, "unknown frame type");
  }
  Frame f;
  f.type = static_cast<MsgType>(hdr[4]);
  f.payload.resize(len - 1);
  read_all(fd_, f.payload.data(), f.payload.size());
  return f;
}

TcpListener::TcpListener(uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ProtocolError(Errc::kInternal, "socket() failed");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    int err = errno;
    ::close(fd_);
    throw ProtocolError(Errc::kIo,
                        std::string("bind: ") + std::strerror(err));
  }
  if (::listen(fd_, 64) != 0) {
    int err = errno;
    ::close(fd_);
    throw ProtocolError(Errc::kIo,
                        std::string("listen: ") + std::strerror(err));
  }
  socklen_t alen = sizeof(addr);
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &alen);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpListener::accept_one() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return TcpChannel::from_fd(fd);
    if (errno == EINTR) continue;
    throw ProtocolError(Errc::kIo,
                        std::string("accept: ") + std::strerror(errno));
  }
}

}  // namespace privlift::net
