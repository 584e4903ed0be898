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
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/channel.hpp"
#include "core/dataset.hpp"
#include "core/private_id.hpp"

namespace privlift::orch {

using pid::Party;

// Run configuration. The protocol block must match between the parties and
// is pinned by hash during HELLO; the local block is each party's own
// business.
struct Config {
  // Protocol parameters, agreement-hashed.
  uint32_t shards = 4;
  uint32_t workers = 1;          // concurrent shard sessions
  uint32_t max_conversions = 4;  // conversion slots per user (K)
  uint64_t r_bound = 100;        // per-user outcome clamp (R), whole units
  double rho1 = 0.5;             // zCDP budget, lift
  double rho2 = 0.5;             // zCDP budget, standard error
  double alpha = 0.05;
  uint32_t noise_k = 64;         // covert-check vector length
  bool zero_noise = false;       // test mode: noise off, checked as all-zero

  // Local parameters.
  uint64_t seed = 0;  // nonzero: deterministic run, durations zeroed
  std::string input_csv;
  std::string out_report;
  std::string host = "127.0.0.1";
  uint16_t port = 0;

  static Config from_json_text(const std::string& text);
  std::string to_json_text() const;
  // Hash of the protocol block; compared inside HELLO.
  Sha256Digest agreement_hash() const;
  void validate() const;

  bool test_mode() const { return seed != 0 || zero_noise; }
};

struct Report {
  Party role = Party::kPublisher;
  bool oracle = false;  // plaintext reference run; role is reported as such
  double dp_lift = 0.0, dp_se = 0.0;
  double ci_lower = 0.0, ci_upper = 0.0;
  uint64_t n_t = 0, n_c = 0;
  uint64_t spine_rows = 0;
  double rho1 = 0.0, rho2 = 0.0, alpha = 0.0;
  uint64_t r_bound = 0;
  uint32_t shards = 0, workers = 0, noise_k = 0, max_conversions = 0;
  uint64_t ms_total = 0, ms_pid = 0, ms_shards = 0, ms_agg = 0;
  data::IngestWarnings warnings;

  // Test-mode extras; never populated on a real run.
  bool test_mode = false;
  uint64_t seed = 0;
  bool zero_noise = false;
  // Per-shard XOR shares of the six aggregates (publisher: masks,
  // advertiser: masked words). XORing both reports' entries reconstructs the
  // pre-noise aggregates, which is exactly why they only exist in test mode.
  std::vector<std::array<uint64_t, 6>> shard_shares;

  std::string to_json_text() const;
};

// Where the party's channels come from. worker(i) is called from the main
// thread only, before the shard stage fans out.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual net::Channel& control() = 0;
  virtual net::Channel& worker(uint32_t idx) = 0;
};

// TCP transport over one advertiser port. The publisher dials one connection
// per channel; the first frame on each identifies it (worker index, or the
// control sentinel), and both sides fold that frame into the channel
// transcript like any other.
class TcpTransport final : public Transport {
 public:
  // Publisher side: dials host:port per channel.
  TcpTransport(std::string host, uint16_t port);
  // Advertiser side: accepts from an already-bound listener.
  explicit TcpTransport(net::TcpListener& listener);
  ~TcpTransport() override;

  net::Channel& control() override;
  net::Channel& worker(uint32_t idx) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// In-process pair; index 0 is the control channel.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
make_local_transport_pair(uint32_t workers);

// Runs the full pipeline as one party: identity join, sharded masked
// aggregation under 2PC, noised release, covert noise checks. Writes the
// report file only if everything (including the peer's view) succeeded.
Report run_pipeline(const Config& cfg, Party me, Transport& tp);

// Both parties in-process (publisher on a second thread). Tests and bench.
std::pair<Report, Report> run_local_pair(const Config& pub_cfg,
                                         const Config& adv_cfg);

// Plaintext reference of the whole pipeline over both files in one process:
// same join-on-id semantics, same estimator, same noise shape (one Gaussian
// draw per statistic on the 2^-16 grid), no masking and no 2PC. Used for
// equivalence testing and as the operator's sanity check.
Report run_oracle(const Config& cfg, const std::string& publisher_csv,
                  const std::string& advertiser_csv);

// Identity join only: HELLO plus the join, then a summary of what matched.
struct MatchSummary {
  Party role = Party::kPublisher;
  uint64_t own_rows = 0;
  uint64_t spine_rows = 0;
  Sha256Digest spine_hash{};

  std::string to_json_text() const;
};

MatchSummary run_match(const Config& cfg, Party me, Transport& tp);

struct BenchCase {
  uint32_t shards = 1;
  uint32_t workers = 1;
};

struct BenchResult {
  uint32_t shards = 0;
  uint32_t workers = 0;
  uint64_t rows = 0;      // spine rows
  uint64_t wall_ms = 0;   // external wall clock around the pair
};

// Generates one synthetic dataset, then runs the in-process pipeline once
// per case. Same data for every case.
std::vector<BenchResult> run_bench(const data::SynthSpec& data_spec,
                                   const Config& base_cfg,
                                   std::span<const BenchCase> cases);

std::string bench_csv(std::span<const BenchResult> results);

}  // namespace privlift::orch
