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

#include "core/orchestrator.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "core/builder_agg.hpp"
#include "core/builder_lift.hpp"
#include "core/dp.hpp"
#include "core/errors.hpp"
#include "core/fixed.hpp"
#include "core/twopc.hpp"
#include "core/wire.hpp"

namespace privlift::orch {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

uint64_t ms_between(Clock::time_point a, Clock::time_point b) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count());
}

constexpr char kHelloMagic[8] = {'P', 'L', 'I', 'F', 'T', '0', '0', '1'};
constexpr uint32_t kControlIdx = 0xffffffffu;

[[noreturn]] void bad_config(const std::string& why) {
  throw ProtocolError(Errc::kBadInput, "config: " + why);
}

// On our own failure, tell the peer why before unwinding. A peer-signalled
// failure or a dead channel needs no echo.
template <typename Fn>
auto notify_peer_on_failure(Transport& tp, Fn&& fn) {
  try {
    return fn();
  } catch (const ProtocolError& e) {
    if (e.code() != Errc::kPeerAbort && e.code() != Errc::kChannelClosed) {
      try {
        tp.control().send_abort(e.what());
      } catch (...) {
      }
    }
    throw;
  }
}

std::string hex_digest(const Sha256Digest& d) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint8_t b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ProtocolError(Errc::kIo, "cannot write " + path);
  out << text << "\n";
  if (!out) throw ProtocolError(Errc::kIo, "short write to " + path);
}

}  // namespace

Config Config::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_config(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_config("top level must be an object");
  Config c;
  for (const auto& [key, value] : j.items()) {
    auto want_uint = [&](uint64_t lo, uint64_t hi) -> uint64_t {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        bad_config(key + " must be an integer");
      }
      int64_t v = value.get<int64_t>();
      if (v < 0 || static_cast<uint64_t>(v) < lo ||
          static_cast<uint64_t>(v) > hi) {
        bad_config(key + " out of range");
      }
      return static_cast<uint64_t>(v);
    };
    auto want_double = [&]() -> double {
      if (!value.is_number()) bad_config(key + " must be a number");
      return value.get<double>();
    };
    auto want_string = [&]() -> std::string {
      if (!value.is_string()) bad_config(key + " must be a string");
      return value.get<std::string>();
    };
    if (key == "shards") {
      c.shards = static_cast<uint32_t>(want_uint(1, 4096));
    } else if (key == "workers") {
      c.workers = static_cast<uint32_t>(want_uint(1, 64));
    } else if (key == "max_conversions") {
      c.max_conversions = static_cast<uint32_t>(want_uint(1, 16));
    } else if (key == "r_bound") {
      c.r_bound = want_uint(1, kMaxConvValue);
    } else if (key == "rho1") {
      c.rho1 = want_double();
    } else if (key == "rho2") {
      c.rho2 = want_double();
    } else if (key == "alpha") {
      c.alpha = want_double();
    } else if (key == "noise_k") {
      c.noise_k = static_cast<uint32_t>(want_uint(2, 4096));
    } else if (key == "zero_noise") {
      if (!value.is_boolean()) bad_config("zero_noise must be a boolean");
      c.zero_noise = value.get<bool>();
    } else if (key == "seed") {
      c.seed = want_uint(0, UINT64_MAX);
    } else if (key == "input_csv") {
      c.input_csv = want_string();
    } else if (key == "out_report") {
      c.out_report = want_string();
    } else if (key == "host") {
      c.host = want_string();
    } else if (key == "port") {
      c.port = static_cast<uint16_t>(want_uint(0, 65535));
    } else {
      bad_config("unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string Config::to_json_text() const {
  json j;
  j["shards"] = shards;
  j["workers"] = workers;
  j["max_conversions"] = max_conversions;
  j["r_bound"] = r_bound;
  j["rho1"] = rho1;
  j["rho2"] = rho2;
  j["alpha"] = alpha;
  j["noise_k"] = noise_k;
  j["zero_noise"] = zero_noise;
  j["seed"] = seed;
  j["input_csv"] = input_csv;
  j["out_report"] = out_report;
  j["host"] = host;
  j["port"] = port;
  return j.dump(2);
}

Sha256Digest Config::agreement_hash() const {
  json j;
  j["v"] = "privlift/agreement/v1";
  j["shards"] = shards;
  j["workers"] = workers;
  j["max_conversions"] = max_conversions;
  j["r_bound"] = r_bound;
  j["rho1"] = rho1;
  j["rho2"] = rho2;
  j["alpha"] = alpha;
  j["noise_k"] = noise_k;
  j["zero_noise"] = zero_noise;
  std::string s = j.dump();
  return sha256({reinterpret_cast<const uint8_t*>(s.data()), s.size()});
}

void Config::validate() const {
  if (shards < 1 || shards > 4096) bad_config("shards must be in [1, 4096]");
  if (workers < 1 || workers > 64) bad_config("workers must be in [1, 64]");
  if (max_conversions < 1 || max_conversions > 16) {
    bad_config("max_conversions must be in [1, 16]");
  }
  if (r_bound < 1 || r_bound > kMaxConvValue) {
    bad_config("r_bound must be in [1, 2^20]");
  }
  if (!(rho1 > 0.0 && rho1 <= 1000.0) || !(rho2 > 0.0 && rho2 <= 1000.0)) {
    bad_config("rho budgets must be in (0, 1000]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) bad_config("alpha must be in (0, 1)");
  if (noise_k < 2 || noise_k > 4096) bad_config("noise_k must be in [2, 4096]");
}

std::string Report::to_json_text() const {
  json j;
  j["schema_version"] = 1;
  j["role"] = oracle ? "oracle"
                     : (role == Party::kPublisher ? "publisher" : "advertiser");
  j["dp_lift"] = dp_lift;
  j["dp_se"] = dp_se;
  j["ci_lower"] = ci_lower;
  j["ci_upper"] = ci_upper;
  j["n_t"] = n_t;
  j["n_c"] = n_c;
  j["n_source"] = "publisher_clear";
  j["rho1"] = rho1;
  j["rho2"] = rho2;
  j["alpha"] = alpha;
  j["r_bound"] = r_bound;
  j["noise_check"] = "pass";
  j["noise_provenance"] = "peer";
  json run;
  run["shards"] = shards;
  run["workers"] = workers;
  run["noise_k"] = noise_k;
  run["max_conversions"] = max_conversions;
  run["spine_rows"] = spine_rows;
  json dur;
  dur["total"] = ms_total;
  dur["pid"] = ms_pid;
  dur["shards"] = ms_shards;
  dur["agg"] = ms_agg;
  run["durations_ms"] = dur;
  json warn;
  warn["capped_values"] = warnings.capped_values;
  warn["ignored_squares"] = warnings.ignored_squares;
  warn["truncated_users"] = warnings.truncated_users;
  run["warnings"] = warn;
  j["run"] = run;
  if (test_mode) {
    json tm;
    tm["watermark"] = "TEST MODE - NOT PRIVATE";
    tm["seed"] = seed;
    tm["zero_noise"] = zero_noise;
    json shares = json::array();
    for (const auto& s : shard_shares) {
      shares.push_back(std::vector<uint64_t>(s.begin(), s.end()));
    }
    tm["shard_shares"] = shares;
    j["test_mode"] = tm;
  }
  return j.dump(2);
}

// ---- transports ----

struct TcpTransport::Impl {
  bool dialer = false;
  std::string host;
  uint16_t port = 0;
  net::TcpListener* listener = nullptr;
  std::map<uint32_t, std::unique_ptr<net::Channel>> chans;

  net::Channel& get(uint32_t idx) {
    if (auto it = chans.find(idx); it != chans.end()) return *it->second;
    if (dialer) {
      auto ch = net::TcpChannel::connect(host, port);
      WireWriter w;
      w.u32(idx);
      ch->send(net::MsgType::kShareNotify, w.view());
      return *chans.emplace(idx, std::move(ch)).first->second;
    }
    for (;;) {
      auto ch = listener->accept_one();
      auto payload = ch->expect(net::MsgType::kShareNotify);
      WireReader rd(payload);
      uint32_t got = rd.u32();
      rd.expect_end();
      if (!chans.emplace(got, std::move(ch)).second) {
        throw ProtocolError(Errc::kMalformedMessage,
                            "duplicate channel announcement");
      }
      if (got == idx) return *chans[idx];
    }
  }
};

TcpTransport::TcpTransport(std::string host, uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  impl_->dialer = true;
  impl_->host = std::move(host);
  impl_->port = port;
}

TcpTransport::TcpTransport(net::TcpListener& listener)
    : impl_(std::make_unique<Impl>()) {
  impl_->listener = &listener;
}

TcpTransport::~TcpTransport() = default;

net::Channel& TcpTransport::control() { return impl_->get(kControlIdx); }
net::Channel& TcpTransport::worker(uint32_t idx) { return impl_->get(idx); }

namespace {

class LocalTransport final : public Transport {
 public:
  explicit LocalTransport(std::vector<std::unique_ptr<net::Channel>> chans)
      : chans_(std::move(chans)) {}
  net::Channel& control() override { return *chans_[0]; }
  net::Channel& worker(uint32_t idx) override { return *chans_.at(idx + 1); }

 private:
  std::vector<std::unique_ptr<net::Channel>> chans_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
make_local_transport_pair(uint32_t workers) {
  std::vector<std::unique_ptr<net::Channel>> a, b;
  for (uint32_t i = 0; i < workers + 1; ++i) {
    auto [ca, cb] = net::make_local_channel_pair();
    a.push_back(std::move(ca));
    b.push_back(std::move(cb));
  }
  return {std::make_unique<LocalTransport>(std::move(a)),
          std::make_unique<LocalTransport>(std::move(b))};
}

// ---- pipeline ----

namespace {

struct ShardOutcome {
  Sha256Digest transcript{};
  std::array<uint64_t, 6> share{};
};

void hello_exchange(net::Channel& control, Party me, const Config& cfg) {
  WireWriter w;
  w.bytes({reinterpret_cast<const uint8_t*>(kHelloMagic), 8});
  w.u8(static_cast<uint8_t>(me));
  w.bytes(cfg.agreement_hash());
  auto check = [&](std::span<const uint8_t> payload) {
    WireReader rd(payload);
    auto magic = rd.bytes(8);
    uint8_t peer_role = rd.u8();
    auto hash = rd.bytes(32);
    rd.expect_end();
    if (std::memcmp(magic.data(), kHelloMagic, 8) != 0) {
      throw ProtocolError(Errc::kHelloMismatch, "peer is not speaking v001");
    }
    if (peer_role != static_cast<uint8_t>(pid::other_party(me))) {
      throw ProtocolError(Errc::kHelloMismatch,
                          "both parties configured with the same role");
    }
    auto own = cfg.agreement_hash();
    if (!std::equal(hash.begin(), hash.end(), own.begin())) {
      throw ProtocolError(Errc::kHelloMismatch,
                          "parties disagree on protocol parameters");
    }
  };
  if (me == Party::kPublisher) {
    control.send(net::MsgType::kHello, w.view());
    check(control.expect(net::MsgType::kHello));
  } else {
    check(control.expect(net::MsgType::kHello));
    control.send(net::MsgType::kHello, w.view());
  }
}

Report run_pipeline_inner(const Config& cfg, Party me, Transport& tp) {
  const bool is_pub = me == Party::kPublisher;
  const auto t_start = Clock::now();

  // Own data, before any network traffic.
  data::IngestWarnings warn;
  std::vector<data::PublisherRow> pub_rows;
  std::vector<data::AdvertiserRow> adv_rows;
  std::vector<std::string> ids;
  if (is_pub) {
    pub_rows = data::load_publisher_csv(cfg.input_csv, warn);
    ids.reserve(pub_rows.size());
    for (const auto& r : pub_rows) ids.push_back(r.id);
  } else {
    adv_rows = data::load_advertiser_csv(cfg.input_csv, warn);
    data::truncate_conversions(adv_rows, cfg.max_conversions, warn);
    ids.reserve(adv_rows.size());
    for (const auto& r : adv_rows) ids.push_back(r.id);
  }

  Csprng entropy = cfg.seed ? Csprng::from_seed64(cfg.seed) : Csprng();
  Csprng root = entropy.fork(is_pub ? "publisher" : "advertiser");

  net::Channel& control = tp.control();
  hello_exchange(control, me, cfg);

  // Identity join.
  const auto t_pid = Clock::now();
  Csprng pid_rng = root.fork("pid");
  pid::PidResult join = pid::run_private_id(control, me, ids, pid_rng);
  const uint64_t spine_rows = join.spine.size();
  const auto t_pid_done = Clock::now();

  // Arm sizes travel in the clear (the publisher holds them outright and the
  // released estimate depends on them); both sides enforce the floors.
  uint64_t n_t = 0, n_c = 0, adv_users = 0;
  if (is_pub) {
    for (const auto& r : pub_rows) (r.test_flag ? n_t : n_c)++;
    WireWriter w;
    w.u64(n_t);
    w.u64(n_c);
    control.send(net::MsgType::kAggPreflight, w.view());
    auto reply = control.expect(net::MsgType::kAggPreflight);
    WireReader rd(reply);
    adv_users = rd.u64();
    rd.expect_end();
  } else {
    auto msg = control.expect(net::MsgType::kAggPreflight);
    WireReader rd(msg);
    n_t = rd.u64();
    n_c = rd.u64();
    rd.expect_end();
    adv_users = adv_rows.size();
    WireWriter w;
    w.u64(adv_users);
    control.send(net::MsgType::kAggPreflight, w.view());
  }
  if (n_t < 2 || n_c < 2) {
    throw ProtocolError(Errc::kPreflightFailed,
                        "arm too small for a variance estimate (n_t=" +
                            std::to_string(n_t) +
                            ", n_c=" + std::to_string(n_c) + ")");
  }
  if (adv_users < 1) {
    throw ProtocolError(Errc::kPreflightFailed, "advertiser dataset is empty");
  }

  // Shard stage. Spine row j goes to shard j mod S; every shard pads to the
  // same row count so all shards share one circuit.
  const auto t_shards = Clock::now();
  const uint32_t S = cfg.shards;
  const uint32_t W = cfg.workers;
  const uint32_t rows_per_shard =
      static_cast<uint32_t>((spine_rows + S - 1) / S);
  const auto layout = circuit::LiftShardLayout::make(
      rows_per_shard, cfg.max_conversions, cfg.r_bound);
  const circuit::Circuit shard_circuit =
      circuit::build_lift_shard_circuit(layout);

  std::vector<circuit::LiftPublisherRow> pub_aligned;
  std::vector<circuit::LiftAdvertiserRow> adv_aligned;
  if (is_pub) {
    pub_aligned.resize(spine_rows);
    for (size_t i = 0; i < pub_rows.size(); ++i) {
      auto& a = pub_aligned[join.row_to_spine[i]];
      a.opportunity_ts = pub_rows[i].opportunity_ts;
      a.is_test = pub_rows[i].test_flag != 0;
      a.present = true;
    }
  } else {
    adv_aligned.resize(spine_rows);
    for (size_t i = 0; i < adv_rows.size(); ++i) {
      auto& a = adv_aligned[join.row_to_spine[i]];
      a.conversions.reserve(adv_rows[i].conversions.size());
      for (const auto& cv : adv_rows[i].conversions) {
        a.conversions.emplace_back(cv.ts, cv.value);
      }
      a.present = true;
    }
  }

  std::vector<std::array<uint64_t, 6>> masks;
  if (is_pub) {
    Csprng mask_rng = root.fork("masks");
    masks.resize(S);
    for (auto& m : masks) {
      for (auto& w : m) w = mask_rng.next_u64();
    }
  }
  std::vector<Csprng> shard_rngs;
  shard_rngs.reserve(S);
  {
    Csprng shard_root = root.fork("shards");
    for (uint32_t s = 0; s < S; ++s) {
      shard_rngs.push_back(shard_root.fork("shard-" + std::to_string(s)));
    }
  }

  std::vector<net::Channel*> worker_ch(W);
  for (uint32_t w = 0; w < W; ++w) worker_ch[w] = &tp.worker(w);

  std::vector<ShardOutcome> outcomes(S);
  std::vector<std::exception_ptr> worker_err(W);
  auto worker_fn = [&](uint32_t w) {
    try {
      for (uint32_t s = w; s < S; s += W) {
        std::vector<uint8_t> bits;
        if (is_pub) {
          std::vector<circuit::LiftPublisherRow> rows(rows_per_shard);
          uint32_t n = 0;
          for (uint64_t j = s; j < spine_rows; j += S) {
            rows[n++] = pub_aligned[j];
          }
          bits = circuit::pack_lift_garbler_bits(layout, rows, masks[s]);
        } else {
          std::vector<circuit::LiftAdvertiserRow> rows(rows_per_shard);
          uint32_t n = 0;
          for (uint64_t j = s; j < spine_rows; j += S) {
            rows[n++] = adv_aligned[j];
          }
          bits = circuit::pack_lift_evaluator_bits(layout, rows);
        }
        auto res = twopc::run_2pc(
            *worker_ch[w], shard_circuit,
            is_pub ? circuit::Role::kGarbler : circuit::Role::kEvaluator, bits,
            shard_rngs[s]);
        outcomes[s].transcript = res.transcript;
        if (is_pub) {
          outcomes[s].share = masks[s];
        } else {
          auto words = res.outputs.as_u64_words("masked_aggregates");
          std::copy(words.begin(), words.end(), outcomes[s].share.begin());
        }
      }
    } catch (...) {
      worker_err[w] = std::current_exception();
    }
  };
  if (W == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(W);
    for (uint32_t w = 0; w < W; ++w) pool.emplace_back(worker_fn, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : worker_err) {
    if (e) std::rethrow_exception(e);
  }
  const auto t_shards_done = Clock::now();

  // Bind every worker-channel transcript to the control session.
  {
    WireWriter w;
    w.u32(S);
    for (const auto& o : outcomes) w.bytes(o.transcript);
    std::vector<uint8_t> peer;
    if (is_pub) {
      control.send(net::MsgType::kShareNotify, w.view());
      peer = control.expect(net::MsgType::kShareNotify);
    } else {
      peer = control.expect(net::MsgType::kShareNotify);
      control.send(net::MsgType::kShareNotify, w.view());
    }
    WireReader rd(peer);
    if (rd.u32() != S) {
      throw ProtocolError(Errc::kBindingMismatch, "shard count mismatch");
    }
    for (uint32_t s = 0; s < S; ++s) {
      auto d = rd.bytes(32);
      if (!std::equal(d.begin(), d.end(), outcomes[s].transcript.begin())) {
        throw ProtocolError(
            Errc::kTranscriptMismatch,
            "shard " + std::to_string(s) + " transcripts diverge");
      }
    }
    rd.expect_end();
  }

  // Aggregation and noised release.
  const auto t_agg = Clock::now();
  circuit::AggregationParams ap;
  ap.shards = S;
  ap.noise_k = cfg.noise_k;
  ap.total_rows = spine_rows;
  ap.r_bound = cfg.r_bound;
  const circuit::Circuit agg_circuit = circuit::build_aggregation_circuit(ap);

  const auto sens =
      dp::lift_sensitivities(n_t, n_c, static_cast<double>(cfg.r_bound));
  const double sigma1 =
      cfg.zero_noise ? 0.0 : dp::gaussian_sigma(sens.lift, cfg.rho1);
  const double sigma2 =
      cfg.zero_noise ? 0.0 : dp::gaussian_sigma(sens.se, cfg.rho2);
  Csprng noise_rng = root.fork("noise");
  const auto nv_lift = dp::sample_noise_vector(sigma1, cfg.noise_k, noise_rng);
  const auto nv_se = dp::sample_noise_vector(sigma2, cfg.noise_k, noise_rng);
  const uint32_t choice = static_cast<uint32_t>(nv_lift.chosen_index);

  std::vector<uint8_t> agg_bits;
  if (is_pub) {
    circuit::AggGarblerInputs in;
    in.masks.reserve(size_t(S) * 6);
    for (const auto& m : masks) in.masks.insert(in.masks.end(), m.begin(), m.end());
    in.noise_lift = nv_lift.values;
    in.noise_se = nv_se.values;
    in.choice = choice;
    agg_bits = circuit::pack_agg_garbler_bits(ap, in);
  } else {
    circuit::AggEvaluatorInputs in;
    in.masked_words.reserve(size_t(S) * 6);
    for (const auto& o : outcomes) {
      in.masked_words.insert(in.masked_words.end(), o.share.begin(),
                             o.share.end());
    }
    in.noise_lift = nv_lift.values;
    in.noise_se = nv_se.values;
    in.choice = choice;
    agg_bits = circuit::pack_agg_evaluator_bits(ap, in);
  }
  Csprng agg_rng = root.fork("agg");
  auto agg_res = twopc::run_2pc(
      control, agg_circuit,
      is_pub ? circuit::Role::kGarbler : circuit::Role::kEvaluator, agg_bits,
      agg_rng);
  const auto t_agg_done = Clock::now();

  const char* lift_name = is_pub ? "dp_lift_garbler" : "dp_lift_evaluator";
  const char* se_name = is_pub ? "dp_se_garbler" : "dp_se_evaluator";
  const char* rl_name =
      is_pub ? "reveal_evaluator_noise_lift" : "reveal_garbler_noise_lift";
  const char* rs_name =
      is_pub ? "reveal_evaluator_noise_se" : "reveal_garbler_noise_se";
  const int64_t lift_fixed =
      static_cast<int64_t>(agg_res.outputs.as_u64(lift_name));
  const int64_t se_fixed = static_cast<int64_t>(agg_res.outputs.as_u64(se_name));

  // The peer's noise vectors, with the slot we consumed zeroed. They must
  // look like the Gaussian the budget promised; otherwise the release is not
  // covered and we abort with nothing written.
  auto check_reveal = [&](const char* name, double sigma) {
    auto words = agg_res.outputs.as_u64_words(name);
    std::vector<int64_t> v(words.size());
    for (size_t i = 0; i < words.size(); ++i) {
      v[i] = static_cast<int64_t>(words[i]);
    }
    return dp::check_noise_distribution(v, choice, sigma);
  };
  if (!check_reveal(rl_name, sigma1) || !check_reveal(rs_name, sigma2)) {
    throw ProtocolError(Errc::kCovertCheckFailed,
                        "peer noise failed the distribution check");
  }

  // Mutual success confirmation; a failed peer sends ABORT instead.
  {
    WireWriter w;
    w.u8(1);
    std::vector<uint8_t> peer;
    if (is_pub) {
      control.send(net::MsgType::kResult, w.view());
      peer = control.expect(net::MsgType::kResult);
    } else {
      peer = control.expect(net::MsgType::kResult);
      control.send(net::MsgType::kResult, w.view());
    }
    if (peer.size() != 1 || peer[0] != 1) {
      throw ProtocolError(Errc::kMalformedMessage, "bad result confirmation");
    }
  }

  Report rep;
  rep.role = me;
  rep.dp_lift = from_fixed(lift_fixed);
  rep.dp_se = from_fixed(se_fixed);
  const double hw = dp::ci_halfwidth(rep.dp_se, sigma1, cfg.alpha);
  rep.ci_lower = rep.dp_lift - hw;
  rep.ci_upper = rep.dp_lift + hw;
  rep.n_t = n_t;
  rep.n_c = n_c;
  rep.spine_rows = spine_rows;
  rep.rho1 = cfg.rho1;
  rep.rho2 = cfg.rho2;
  rep.alpha = cfg.alpha;
  rep.r_bound = cfg.r_bound;
  rep.shards = S;
  rep.workers = W;
  rep.noise_k = cfg.noise_k;
  rep.max_conversions = cfg.max_conversions;
  rep.warnings = warn;
  if (cfg.seed == 0) {
    const auto t_end = Clock::now();
    rep.ms_total = ms_between(t_start, t_end);
    rep.ms_pid = ms_between(t_pid, t_pid_done);
    rep.ms_shards = ms_between(t_shards, t_shards_done);
    rep.ms_agg = ms_between(t_agg, t_agg_done);
  }
  if (cfg.test_mode()) {
    rep.test_mode = true;
    rep.seed = cfg.seed;
    rep.zero_noise = cfg.zero_noise;
    rep.shard_shares.reserve(S);
    for (const auto& o : outcomes) rep.shard_shares.push_back(o.share);
  }
  if (!cfg.out_report.empty()) {
    write_text_file(cfg.out_report, rep.to_json_text());
  }
  return rep;
}

}  // namespace

Report run_pipeline(const Config& cfg, Party me, Transport& tp) {
  cfg.validate();
  if (cfg.input_csv.empty()) bad_config("input_csv is required");
  return notify_peer_on_failure(tp,
                                [&] { return run_pipeline_inner(cfg, me, tp); });
}

Report run_oracle(const Config& cfg, const std::string& publisher_csv,
                  const std::string& advertiser_csv) {
  cfg.validate();
  const auto t_start = Clock::now();
  data::IngestWarnings warn;
  auto pub_rows = data::load_publisher_csv(publisher_csv, warn);
  auto adv_rows = data::load_advertiser_csv(advertiser_csv, warn);
  data::truncate_conversions(adv_rows, cfg.max_conversions, warn);

  uint64_t n_t = 0, n_c = 0;
  for (const auto& r : pub_rows) (r.test_flag ? n_t : n_c)++;
  if (n_t < 2 || n_c < 2) {
    throw ProtocolError(Errc::kPreflightFailed,
                        "arm too small for a variance estimate (n_t=" +
                            std::to_string(n_t) +
                            ", n_c=" + std::to_string(n_c) + ")");
  }

  const auto agg = data::oracle_aggregates(pub_rows, adv_rows, cfg.r_bound,
                                           cfg.max_conversions);
  const auto est = dp::estimate_from_aggregates(agg);

  const auto sens =
      dp::lift_sensitivities(n_t, n_c, static_cast<double>(cfg.r_bound));
  const double sigma1 =
      cfg.zero_noise ? 0.0 : dp::gaussian_sigma(sens.lift, cfg.rho1);
  const double sigma2 =
      cfg.zero_noise ? 0.0 : dp::gaussian_sigma(sens.se, cfg.rho2);
  Csprng entropy = cfg.seed ? Csprng::from_seed64(cfg.seed) : Csprng();
  Csprng rng = entropy.fork("oracle");
  // One draw per statistic; the vector sampler is reused for its 2^-16 grid.
  const double z1 = from_fixed(dp::sample_noise_vector(sigma1, 2, rng).values[0]);
  const double z2 = from_fixed(dp::sample_noise_vector(sigma2, 2, rng).values[0]);

  std::unordered_set<std::string> uni;
  for (const auto& r : pub_rows) uni.insert(r.id);
  for (const auto& r : adv_rows) uni.insert(r.id);

  Report rep;
  rep.oracle = true;
  rep.dp_lift = est.lift + z1;
  rep.dp_se = est.se + z2;
  const double hw = dp::ci_halfwidth(rep.dp_se, sigma1, cfg.alpha);
  rep.ci_lower = rep.dp_lift - hw;
  rep.ci_upper = rep.dp_lift + hw;
  rep.n_t = n_t;
  rep.n_c = n_c;
  rep.spine_rows = uni.size();
  rep.rho1 = cfg.rho1;
  rep.rho2 = cfg.rho2;
  rep.alpha = cfg.alpha;
  rep.r_bound = cfg.r_bound;
  rep.shards = cfg.shards;
  rep.workers = cfg.workers;
  rep.noise_k = cfg.noise_k;
  rep.max_conversions = cfg.max_conversions;
  rep.warnings = warn;
  if (cfg.seed == 0) rep.ms_total = ms_between(t_start, Clock::now());
  if (cfg.test_mode()) {
    rep.test_mode = true;
    rep.seed = cfg.seed;
    rep.zero_noise = cfg.zero_noise;
  }
  if (!cfg.out_report.empty()) write_text_file(cfg.out_report, rep.to_json_text());
  return rep;
}

std::string MatchSummary::to_json_text() const {
  json j;
  j["role"] = role == Party::kPublisher ? "publisher" : "advertiser";
  j["own_rows"] = own_rows;
  j["spine_rows"] = spine_rows;
  j["spine_hash"] = hex_digest(spine_hash);
  return j.dump(2);
}

MatchSummary run_match(const Config& cfg, Party me, Transport& tp) {
  cfg.validate();
  if (cfg.input_csv.empty()) bad_config("input_csv is required");
  return notify_peer_on_failure(tp, [&] {
    const bool is_pub = me == Party::kPublisher;
    data::IngestWarnings warn;
    std::vector<std::string> ids;
    if (is_pub) {
      for (const auto& r : data::load_publisher_csv(cfg.input_csv, warn)) {
        ids.push_back(r.id);
      }
    } else {
      for (const auto& r : data::load_advertiser_csv(cfg.input_csv, warn)) {
        ids.push_back(r.id);
      }
    }
    Csprng entropy = cfg.seed ? Csprng::from_seed64(cfg.seed) : Csprng();
    Csprng root = entropy.fork(is_pub ? "publisher" : "advertiser");
    net::Channel& control = tp.control();
    hello_exchange(control, me, cfg);
    Csprng pid_rng = root.fork("pid");
    auto join = pid::run_private_id(control, me, ids, pid_rng);
    MatchSummary s;
    s.role = me;
    s.own_rows = ids.size();
    s.spine_rows = join.spine.size();
    s.spine_hash = pid::spine_digest(join.spine);
    if (!cfg.out_report.empty()) {
      write_text_file(cfg.out_report, s.to_json_text());
    }
    return s;
  });
}

std::pair<Report, Report> run_local_pair(const Config& pub_cfg,
                                         const Config& adv_cfg) {
  auto [pt, at] = make_local_transport_pair(
      std::max(pub_cfg.workers, adv_cfg.workers));
  Report pub_rep, adv_rep;
  std::exception_ptr pub_err, adv_err;
  std::thread th([&, tp = std::move(pt)]() mutable {
    try {
      pub_rep = run_pipeline(pub_cfg, Party::kPublisher, *tp);
    } catch (...) {
      pub_err = std::current_exception();
    }
    // Drop the transport now so a stuck peer sees closed channels.
    tp.reset();
  });
  {
    auto tp = std::move(at);
    try {
      adv_rep = run_pipeline(adv_cfg, Party::kAdvertiser, *tp);
    } catch (...) {
      adv_err = std::current_exception();
    }
  }
  th.join();
  if (pub_err) std::rethrow_exception(pub_err);
  if (adv_err) std::rethrow_exception(adv_err);
  return {std::move(pub_rep), std::move(adv_rep)};
}

std::vector<BenchResult> run_bench(const data::SynthSpec& data_spec,
                                   const Config& base_cfg,
                                   std::span<const BenchCase> cases) {
  namespace fs = std::filesystem;
  const std::string tag = "privlift-bench-" + std::to_string(::getpid()) +
                          "-" + std::to_string(data_spec.seed);
  const std::string pub_csv = (fs::temp_directory_path() / (tag + "-pub.csv")).string();
  const std::string adv_csv = (fs::temp_directory_path() / (tag + "-adv.csv")).string();
  data::generate_synthetic(data_spec, pub_csv, adv_csv);

  std::vector<BenchResult> out;
  out.reserve(cases.size());
  for (const auto& bc : cases) {
    Config pc = base_cfg, ac = base_cfg;
    pc.shards = ac.shards = bc.shards;
    pc.workers = ac.workers = bc.workers;
    pc.input_csv = pub_csv;
    ac.input_csv = adv_csv;
    pc.out_report.clear();
    ac.out_report.clear();
    const auto t0 = Clock::now();
    auto [pr, ar] = run_local_pair(pc, ac);
    const auto t1 = Clock::now();
    out.push_back(BenchResult{bc.shards, bc.workers, pr.spine_rows,
                              ms_between(t0, t1)});
  }
  std::error_code ec;
  fs::remove(pub_csv, ec);
  fs::remove(adv_csv, ec);
  fs::remove(pub_csv + ".meta.json", ec);
  return out;
}

std::string bench_csv(std::span<const BenchResult> results) {
  std::string out = "shards,workers,rows,wall_ms,ms_per_shard\n";
  for (const auto& r : results) {
    char per_shard[32];
    std::snprintf(per_shard, sizeof(per_shard), "%.2f",
                  static_cast<double>(r.wall_ms) / r.shards);
    out += std::to_string(r.shards) + "," + std::to_string(r.workers) + "," +
           std::to_string(r.rows) + "," + std::to_string(r.wall_ms) + "," +
           per_shard + "\n";
  }
  return out;
}

}  // namespace privlift::orch
