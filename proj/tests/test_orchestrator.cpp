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

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "core/dataset.hpp"
#include "core/dp.hpp"
#include "core/errors.hpp"
#include "core/orchestrator.hpp"

using namespace privlift;
using namespace privlift::orch;
using nlohmann::json;

namespace {

struct SynthFiles {
  std::string pub_csv;
  std::string adv_csv;
  data::SynthMeta meta;
};

SynthFiles make_synth(const std::string& tag, const data::SynthSpec& spec) {
  namespace fs = std::filesystem;
  std::string base = (fs::temp_directory_path() /
                      ("privlift-orch-" + std::to_string(::getpid()) + "-" + tag))
                         .string();
  SynthFiles f;
  f.pub_csv = base + "-pub.csv";
  f.adv_csv = base + "-adv.csv";
  f.meta = data::generate_synthetic(spec, f.pub_csv, f.adv_csv);
  return f;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs both parties over a fresh local transport, capturing each side's
// exception separately (run_local_pair surfaces the publisher's first, which
// is the wrong side to assert on in mismatch tests).
struct PairErrors {
  std::exception_ptr pub, adv;
};

PairErrors run_pair_expecting_failure(const Config& pc, const Config& ac) {
  auto [pt, at] =
      make_local_transport_pair(std::max(pc.workers, ac.workers));
  PairErrors errs;
  std::thread th([&, tp = std::move(pt)]() mutable {
    try {
      run_pipeline(pc, Party::kPublisher, *tp);
    } catch (...) {
      errs.pub = std::current_exception();
    }
    tp.reset();
  });
  {
    auto tp = std::move(at);
    try {
      run_pipeline(ac, Party::kAdvertiser, *tp);
    } catch (...) {
      errs.adv = std::current_exception();
    }
  }
  th.join();
  return errs;
}

Errc code_of(const std::exception_ptr& e) {
  REQUIRE(e);
  try {
    std::rethrow_exception(e);
  } catch (const ProtocolError& pe) {
    return pe.code();
  }
}

}  // namespace

TEST_CASE("config json parsing, defaults, and validation") {
  Config def = Config::from_json_text("{}");
  CHECK(def.shards == 4);
  CHECK(def.workers == 1);
  CHECK(def.max_conversions == 4);
  CHECK(def.r_bound == 100);
  CHECK(def.rho1 == 0.5);
  CHECK(def.alpha == 0.05);
  CHECK(def.noise_k == 64);
  CHECK_FALSE(def.zero_noise);
  CHECK(def.seed == 0);
  CHECK_FALSE(def.test_mode());

  Config c;
  c.shards = 8;
  c.workers = 2;
  c.r_bound = 250;
  c.rho1 = 0.25;
  c.noise_k = 128;
  c.zero_noise = true;
  c.seed = 99;
  c.input_csv = "in.csv";
  c.out_report = "out.json";
  c.port = 31337;
  Config back = Config::from_json_text(c.to_json_text());
  CHECK(back.shards == c.shards);
  CHECK(back.workers == c.workers);
  CHECK(back.r_bound == c.r_bound);
  CHECK(back.rho1 == c.rho1);
  CHECK(back.noise_k == c.noise_k);
  CHECK(back.zero_noise == c.zero_noise);
  CHECK(back.seed == c.seed);
  CHECK(back.input_csv == c.input_csv);
  CHECK(back.out_report == c.out_report);
  CHECK(back.port == c.port);
  CHECK(back.test_mode());

  CHECK_THROWS_AS(Config::from_json_text("[]"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"surprise\": 1}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"shards\": 0}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"workers\": 65}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"noise_k\": 1}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"alpha\": 1.0}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"rho1\": 0.0}"), ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("{\"zero_noise\": 1}"),
                  ProtocolError);
  CHECK_THROWS_AS(Config::from_json_text("not json"), ProtocolError);
}

TEST_CASE("agreement hash covers protocol knobs and nothing local") {
  Config a;
  auto base = a.agreement_hash();

  Config b = a;
  b.seed = 12345;
  b.input_csv = "something.csv";
  b.out_report = "r.json";
  b.host = "10.0.0.1";
  b.port = 4000;
  CHECK(b.agreement_hash() == base);

  for (auto mutate : std::vector<void (*)(Config&)>{
           [](Config& c) { c.shards = 5; },
           [](Config& c) { c.workers = 2; },
           [](Config& c) { c.max_conversions = 3; },
           [](Config& c) { c.r_bound = 99; },
           [](Config& c) { c.rho1 = 0.4; },
           [](Config& c) { c.rho2 = 0.4; },
           [](Config& c) { c.alpha = 0.1; },
           [](Config& c) { c.noise_k = 32; },
           [](Config& c) { c.zero_noise = true; },
       }) {
    Config m = a;
    mutate(m);
    CHECK_FALSE(m.agreement_hash() == base);
  }
}

TEST_CASE("local pair agrees with the plaintext reference when noise is off") {
  data::SynthSpec spec;
  spec.users = 400;
  spec.overlap = 0.5;
  spec.true_lift = 2.0;
  spec.seed = 7;
  spec.r_bound = 100;
  SynthFiles f = make_synth("pair", spec);

  Config cfg;
  cfg.shards = 3;
  cfg.workers = 1;
  cfg.max_conversions = 2;
  cfg.r_bound = 100;
  cfg.zero_noise = true;
  cfg.seed = 11;
  Config pc = cfg, ac = cfg;
  pc.input_csv = f.pub_csv;
  ac.input_csv = f.adv_csv;

  auto [pr, ar] = run_local_pair(pc, ac);

  // Both parties decode the same released statistics.
  CHECK(pr.dp_lift == ar.dp_lift);
  CHECK(pr.dp_se == ar.dp_se);
  CHECK(pr.ci_lower == ar.ci_lower);
  CHECK(pr.ci_upper == ar.ci_upper);
  CHECK(pr.n_t == f.meta.n_t);
  CHECK(pr.n_c == f.meta.n_c);
  CHECK(pr.spine_rows == spec.users + spec.users / 10);
  CHECK(ar.spine_rows == pr.spine_rows);

  Report orc = run_oracle(cfg, f.pub_csv, f.adv_csv);
  const double tol = std::ldexp(1.0, -12);
  CHECK(std::abs(pr.dp_lift - orc.dp_lift) <= tol);
  CHECK(std::abs(pr.dp_se - orc.dp_se) <= tol);
  CHECK(std::abs(pr.ci_lower - orc.ci_lower) <= tol);
  CHECK(std::abs(pr.ci_upper - orc.ci_upper) <= tol);

  // The XOR shares in the two test-mode reports reconstruct the exact
  // pre-noise aggregates of the plaintext join.
  REQUIRE(pr.test_mode);
  REQUIRE(ar.test_mode);
  REQUIRE(pr.shard_shares.size() == cfg.shards);
  REQUIRE(ar.shard_shares.size() == cfg.shards);
  uint64_t tot[6] = {};
  for (uint32_t s = 0; s < cfg.shards; s++) {
    for (int k = 0; k < 6; k++) {
      tot[k] += pr.shard_shares[s][k] ^ ar.shard_shares[s][k];
    }
  }
  data::IngestWarnings warn;
  auto pub_rows = data::load_publisher_csv(f.pub_csv, warn);
  auto adv_rows = data::load_advertiser_csv(f.adv_csv, warn);
  data::truncate_conversions(adv_rows, cfg.max_conversions, warn);
  auto agg = data::oracle_aggregates(pub_rows, adv_rows, cfg.r_bound,
                                     cfg.max_conversions);
  CHECK(tot[0] == agg.n_t);
  CHECK(tot[1] == agg.sum_t);
  CHECK(tot[2] == agg.ssq_t);
  CHECK(tot[3] == agg.n_c);
  CHECK(tot[4] == agg.sum_c);
  CHECK(tot[5] == agg.ssq_c);

  // Zero noise: the release is the exact estimator on those aggregates.
  auto est = dp::estimate_from_aggregates(agg);
  CHECK(std::abs(pr.dp_lift - est.lift) <= tol);
  CHECK(std::abs(pr.dp_se - est.se) <= tol);
}

TEST_CASE("seeded runs reproduce byte-identical reports") {
  data::SynthSpec spec;
  spec.users = 120;
  spec.overlap = 0.6;
  spec.true_lift = 1.0;
  spec.seed = 8;
  SynthFiles f = make_synth("repro", spec);

  Config cfg;
  cfg.shards = 2;
  cfg.max_conversions = 2;
  cfg.seed = 21;  // live noise, fixed entropy
  Config pc = cfg, ac = cfg;
  pc.input_csv = f.pub_csv;
  ac.input_csv = f.adv_csv;

  auto [p1, a1] = run_local_pair(pc, ac);
  auto [p2, a2] = run_local_pair(pc, ac);
  CHECK(p1.to_json_text() == p2.to_json_text());
  CHECK(a1.to_json_text() == a2.to_json_text());
  // Durations are scrubbed so the text can be stable.
  CHECK(p1.ms_total == 0);
  CHECK(p1.ms_pid == 0);

  // Live noise shifts the release away from the plain estimator.
  CHECK(p1.test_mode);
  json j = json::parse(p1.to_json_text());
  CHECK(j["test_mode"]["watermark"] == "TEST MODE - NOT PRIVATE");
}

TEST_CASE("real-mode reports carry no identifiers and no share material") {
  namespace fs = std::filesystem;
  data::SynthSpec spec;
  spec.users = 120;
  spec.overlap = 0.6;
  spec.true_lift = 1.0;
  spec.seed = 9;
  SynthFiles f = make_synth("real", spec);

  std::string base = (fs::temp_directory_path() /
                      ("privlift-orch-rep-" + std::to_string(::getpid())))
                         .string();
  Config cfg;
  cfg.shards = 2;
  cfg.max_conversions = 2;
  Config pc = cfg, ac = cfg;
  pc.input_csv = f.pub_csv;
  pc.out_report = base + "-pub.json";
  ac.input_csv = f.adv_csv;
  ac.out_report = base + "-adv.json";

  auto [pr, ar] = run_local_pair(pc, ac);
  CHECK_FALSE(pr.test_mode);
  CHECK(pr.shard_shares.empty());

  for (const auto& path : {pc.out_report, ac.out_report}) {
    std::string text = slurp(path);
    CHECK(text.find("example.test") == std::string::npos);
    CHECK(text.find("test_mode") == std::string::npos);
    CHECK(text.find("shard_shares") == std::string::npos);
    json j = json::parse(text);
    CHECK(j["schema_version"] == 1);
    CHECK(j["n_source"] == "publisher_clear");
    CHECK(j["run"]["spine_rows"] == pr.spine_rows);
    CHECK(j.contains("ci_lower"));
    CHECK(j["run"]["durations_ms"].contains("total"));
  }
  json jp = json::parse(slurp(pc.out_report));
  json ja = json::parse(slurp(ac.out_report));
  CHECK(jp["role"] == "publisher");
  CHECK(ja["role"] == "advertiser");
  CHECK(jp["dp_lift"] == ja["dp_lift"]);
  fs::remove(pc.out_report);
  fs::remove(ac.out_report);
}

TEST_CASE("hello rejects parameter disagreement") {
  data::SynthSpec spec;
  spec.users = 40;
  spec.overlap = 0.5;
  spec.true_lift = 1.0;
  spec.seed = 10;
  SynthFiles f = make_synth("hello", spec);

  Config pc, ac;
  pc.shards = 2;
  ac.shards = 3;  // protocol disagreement
  pc.max_conversions = ac.max_conversions = 2;
  pc.seed = ac.seed = 5;
  pc.zero_noise = ac.zero_noise = true;
  pc.input_csv = f.pub_csv;
  ac.input_csv = f.adv_csv;

  PairErrors errs = run_pair_expecting_failure(pc, ac);
  CHECK(code_of(errs.adv) == Errc::kHelloMismatch);
  CHECK(code_of(errs.pub) == Errc::kPeerAbort);
}

TEST_CASE("preflight rejects a single-arm publisher dataset") {
  namespace fs = std::filesystem;
  std::string base = (fs::temp_directory_path() /
                      ("privlift-orch-arm-" + std::to_string(::getpid())))
                         .string();
  std::string pub_csv = base + "-pub.csv";
  std::string adv_csv = base + "-adv.csv";
  {
    std::ofstream p(pub_csv);
    p << "id,opportunity_ts,test_flag\n";
    for (int i = 0; i < 6; i++) {
      p << "u" << i << "@x.y," << (1000 + i) << ",1\n";
    }
    std::ofstream a(adv_csv);
    a << "id,conv_ts,conv_value\n";
    a << "u1@x.y,1500,3\n";
  }
  Config pc, ac;
  pc.shards = ac.shards = 1;
  pc.seed = ac.seed = 5;
  pc.zero_noise = ac.zero_noise = true;
  pc.input_csv = pub_csv;
  ac.input_csv = adv_csv;

  PairErrors errs = run_pair_expecting_failure(pc, ac);
  CHECK(code_of(errs.pub) == Errc::kPreflightFailed);
  CHECK(code_of(errs.adv) == Errc::kPeerAbort);
  fs::remove(pub_csv);
  fs::remove(adv_csv);
}

TEST_CASE("true aggregates never appear on the wire") {
  data::SynthSpec spec;
  spec.users = 200;
  spec.overlap = 0.5;
  spec.true_lift = 2.0;
  spec.seed = 12;
  SynthFiles f = make_synth("wire", spec);

  Config cfg;
  cfg.shards = 2;
  cfg.max_conversions = 2;
  cfg.zero_noise = true;
  cfg.seed = 13;
  Config pc = cfg, ac = cfg;
  pc.input_csv = f.pub_csv;
  ac.input_csv = f.adv_csv;

  auto [pt, at] = make_local_transport_pair(1);
  std::mutex mu;
  std::vector<uint8_t> seen;
  size_t frames = 0;
  auto tap = [&](bool outgoing, net::MsgType, std::span<const uint8_t> pl) {
    if (!outgoing) return;  // each direction is some endpoint's outgoing
    std::lock_guard<std::mutex> lk(mu);
    frames++;
    seen.insert(seen.end(), pl.begin(), pl.end());
  };
  for (auto* tp : {pt.get(), at.get()}) {
    tp->control().set_capture(tap);
    tp->worker(0).set_capture(tap);
  }

  std::exception_ptr perr;
  std::thread th([&, tp = std::move(pt)]() mutable {
    try {
      run_pipeline(pc, Party::kPublisher, *tp);
    } catch (...) {
      perr = std::current_exception();
    }
    tp.reset();
  });
  {
    auto tp = std::move(at);
    run_pipeline(ac, Party::kAdvertiser, *tp);
  }
  th.join();
  if (perr) std::rethrow_exception(perr);

  data::IngestWarnings warn;
  auto pub_rows = data::load_publisher_csv(f.pub_csv, warn);
  auto adv_rows = data::load_advertiser_csv(f.adv_csv, warn);
  data::truncate_conversions(adv_rows, cfg.max_conversions, warn);
  auto agg = data::oracle_aggregates(pub_rows, adv_rows, cfg.r_bound,
                                     cfg.max_conversions);

  CHECK(frames > 50);  // the tap actually saw the protocol
  REQUIRE(seen.size() > 4096);

  // Counts travel in the preflight by design; the outcome sums and squares
  // must only ever cross masked. Look for their 8-byte encodings anywhere in
  // any payload.
  for (uint64_t v : {agg.sum_t, agg.ssq_t, agg.sum_c, agg.ssq_c}) {
    REQUIRE(v > 1000);  // distinctive enough for a byte scan
    uint8_t enc[8];
    std::memcpy(enc, &v, 8);
    auto it = std::search(seen.begin(), seen.end(), enc, enc + 8);
    CHECK(it == seen.end());
  }
}

TEST_CASE("match summaries agree across the pair") {
  data::SynthSpec spec;
  spec.users = 60;
  spec.overlap = 0.5;
  spec.true_lift = 1.0;
  spec.seed = 14;
  SynthFiles f = make_synth("match", spec);

  Config pc, ac;
  pc.seed = ac.seed = 15;
  pc.input_csv = f.pub_csv;
  ac.input_csv = f.adv_csv;

  auto [pt, at] = make_local_transport_pair(1);
  MatchSummary ps, as;
  std::exception_ptr perr;
  std::thread th([&, tp = std::move(pt)]() mutable {
    try {
      ps = run_match(pc, Party::kPublisher, *tp);
    } catch (...) {
      perr = std::current_exception();
    }
    tp.reset();
  });
  {
    auto tp = std::move(at);
    as = run_match(ac, Party::kAdvertiser, *tp);
  }
  th.join();
  if (perr) std::rethrow_exception(perr);

  CHECK(ps.own_rows == spec.users);
  CHECK(as.own_rows == f.meta.intersection + spec.users / 10);
  CHECK(ps.spine_rows == spec.users + spec.users / 10);
  CHECK(as.spine_rows == ps.spine_rows);
  CHECK(as.spine_hash == ps.spine_hash);

  json j = json::parse(ps.to_json_text());
  CHECK(j["role"] == "publisher");
  CHECK(j["spine_hash"].get<std::string>().size() == 64);
  CHECK(j["spine_rows"] == ps.spine_rows);
}

TEST_CASE("bench csv reports amortized per-shard cost") {
  std::vector<BenchResult> rs = {{4, 2, 1000, 200}, {1, 1, 1000, 80}};
  std::string csv = bench_csv(rs);
  CHECK(csv == "shards,workers,rows,wall_ms,ms_per_shard\n"
               "4,2,1000,200,50.00\n"
               "1,1,1000,80,80.00\n");
}
