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

#include <stdexcept>
#include <string>

namespace privlift {

// Distinct failure classes; each maps to a distinct process exit code and C
// API status. Protocol failures abort the whole run (single-attempt policy).
enum class Errc {
  kBadInput = 1,        // malformed CSV/config/arguments
  kIo = 2,              // file system
  kChannelClosed = 3,   // peer hung up mid-protocol
  kMalformedMessage = 4,
  kPeerAbort = 5,       // peer sent ABORT
  kHelloMismatch = 6,   // config/version disagreement
  kSpineDivergence = 7,
  kBindingMismatch = 8,  // circuit structure disagreement
  kDecodeFailure = 9,    // output label failed the decode check
  kTranscriptMismatch = 10,
  kPreflightFailed = 11,  // arm sizes / empty dataset
  kCovertCheckFailed = 12,
  kInternal = 13,
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::kBadInput: return "bad_input";
    case Errc::kIo: return "io";
    case Errc::kChannelClosed: return "channel_closed";
    case Errc::kMalformedMessage: return "malformed_message";
    case Errc::kPeerAbort: return "peer_abort";
    case Errc::kHelloMismatch: return "hello_mismatch";
    case Errc::kSpineDivergence: return "spine_divergence";
    case Errc::kBindingMismatch: return "binding_mismatch";
    case Errc::kDecodeFailure: return "decode_failure";
    case Errc::kTranscriptMismatch: return "transcript_mismatch";
    case Errc::kPreflightFailed: return "preflight_failed";
    case Errc::kCovertCheckFailed: return "covert_check_failed";
    case Errc::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace privlift
