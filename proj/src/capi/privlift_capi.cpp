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

#include "privlift.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/orchestrator.hpp"

struct privlift_config {
  privlift::orch::Config cfg;
};

struct privlift_report {
  privlift::orch::Report rep;
};

namespace {

using privlift::Errc;
using privlift::ProtocolError;
namespace orch = privlift::orch;

thread_local std::string g_last_error;

// Every entry point funnels through here so no exception crosses the C
// boundary and every failure leaves a message behind.
template <typename Fn>
int guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return PRIVLIFT_OK;
  } catch (const ProtocolError& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PRIVLIFT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PRIVLIFT_ERR_INTERNAL;
  }
}

[[noreturn]] void fail(Errc code, const std::string& why) {
  throw ProtocolError(code, why);
}

void require(bool ok, const char* what) {
  if (!ok) fail(Errc::kBadInput, std::string("null argument: ") + what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

orch::Party parse_role(const char* role) {
  require(role != nullptr, "role");
  const std::string r = role;
  if (r == "publisher") return orch::Party::kPublisher;
  if (r == "advertiser") return orch::Party::kAdvertiser;
  fail(Errc::kBadInput, "role must be \"publisher\" or \"advertiser\"");
}

uint32_t parse_u32(std::string_view s, uint32_t lo, uint32_t hi,
                   const char* what) {
  uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < lo || v > hi) {
    fail(Errc::kBadInput, std::string("bad ") + what + " '" + std::string(s) +
                              "'");
  }
  return v;
}

std::vector<orch::BenchCase> parse_sweep(const char* sweep) {
  require(sweep != nullptr, "sweep");
  std::vector<orch::BenchCase> cases;
  std::string_view rest = sweep;
  while (!rest.empty()) {
    const size_t comma = rest.find(',');
    std::string_view tok = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{}
                                           : rest.substr(comma + 1);
    orch::BenchCase c;
    const size_t x = tok.find('x');
    if (x == std::string_view::npos) {
      c.shards = parse_u32(tok, 1, 4096, "shard count");
    } else {
      c.shards = parse_u32(tok.substr(0, x), 1, 4096, "shard count");
      c.workers = parse_u32(tok.substr(x + 1), 1, 64, "worker count");
    }
    cases.push_back(c);
  }
  if (cases.empty()) fail(Errc::kBadInput, "empty bench sweep");
  return cases;
}

// Builds the transport for a TCP run and executes `fn` with it. The
// advertiser's listener must outlive the transport, hence the scoping here.
template <typename Fn>
void with_tcp_transport(const orch::Config& cfg, orch::Party me, Fn&& fn) {
  if (cfg.port == 0) {
    fail(Errc::kBadInput, "config: a nonzero port is required for TCP runs");
  }
  if (me == orch::Party::kPublisher) {
    orch::TcpTransport tp(cfg.host, cfg.port);
    fn(tp);
  } else {
    privlift::net::TcpListener listener(cfg.port);
    orch::TcpTransport tp(listener);
    fn(tp);
  }
}

}  // namespace

extern "C" {

const char* privlift_version(void) { return "1.0.0"; }

const char* privlift_last_error(void) { return g_last_error.c_str(); }

void privlift_string_free(char* s) { std::free(s); }

int privlift_config_parse(const char* json_text, privlift_config** out) {
  return guard([&] {
    require(json_text != nullptr, "json_text");
    require(out != nullptr, "out");
    auto cfg = orch::Config::from_json_text(json_text);
    *out = new privlift_config{std::move(cfg)};
  });
}

int privlift_config_load_file(const char* path, privlift_config** out) {
  return guard([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::kIo, std::string("cannot open ") + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto cfg = orch::Config::from_json_text(buf.str());
    *out = new privlift_config{std::move(cfg)};
  });
}

int privlift_config_default(privlift_config** out) {
  return guard([&] {
    require(out != nullptr, "out");
    *out = new privlift_config{};
  });
}

int privlift_config_set_u64(privlift_config* cfg, const char* key,
                            uint64_t value) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(key != nullptr, "key");
    const std::string k = key;
    auto as_u32 = [&](uint32_t& field) {
      if (value > UINT32_MAX) fail(Errc::kBadInput, "config: " + k + " out of range");
      field = static_cast<uint32_t>(value);
    };
    if (k == "shards") {
      as_u32(cfg->cfg.shards);
    } else if (k == "workers") {
      as_u32(cfg->cfg.workers);
    } else if (k == "max_conversions") {
      as_u32(cfg->cfg.max_conversions);
    } else if (k == "noise_k") {
      as_u32(cfg->cfg.noise_k);
    } else if (k == "r_bound") {
      cfg->cfg.r_bound = value;
    } else if (k == "seed") {
      cfg->cfg.seed = value;
    } else if (k == "port") {
      if (value > 65535) fail(Errc::kBadInput, "config: port out of range");
      cfg->cfg.port = static_cast<uint16_t>(value);
    } else {
      fail(Errc::kBadInput, "config: unknown integer key '" + k + "'");
    }
  });
}

int privlift_config_set_f64(privlift_config* cfg, const char* key,
                            double value) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(key != nullptr, "key");
    const std::string k = key;
    if (k == "rho1") {
      cfg->cfg.rho1 = value;
    } else if (k == "rho2") {
      cfg->cfg.rho2 = value;
    } else if (k == "alpha") {
      cfg->cfg.alpha = value;
    } else {
      fail(Errc::kBadInput, "config: unknown float key '" + k + "'");
    }
  });
}

int privlift_config_set_bool(privlift_config* cfg, const char* key,
                             int value) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(key != nullptr, "key");
    if (std::string(key) == "zero_noise") {
      cfg->cfg.zero_noise = value != 0;
    } else {
      fail(Errc::kBadInput,
           "config: unknown boolean key '" + std::string(key) + "'");
    }
  });
}

int privlift_config_set_str(privlift_config* cfg, const char* key,
                            const char* value) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(key != nullptr, "key");
    require(value != nullptr, "value");
    const std::string k = key;
    if (k == "input_csv") {
      cfg->cfg.input_csv = value;
    } else if (k == "out_report") {
      cfg->cfg.out_report = value;
    } else if (k == "host") {
      cfg->cfg.host = value;
    } else {
      fail(Errc::kBadInput, "config: unknown string key '" + k + "'");
    }
  });
}

int privlift_config_dump(const privlift_config* cfg, char** out_json) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(out_json != nullptr, "out_json");
    *out_json = dup_string(cfg->cfg.to_json_text());
  });
}

void privlift_config_free(privlift_config* cfg) { delete cfg; }

int privlift_report_json(const privlift_report* rep, char** out_json) {
  return guard([&] {
    require(rep != nullptr, "rep");
    require(out_json != nullptr, "out_json");
    *out_json = dup_string(rep->rep.to_json_text());
  });
}

int privlift_report_get(const privlift_report* rep, const char* field,
                        double* out) {
  return guard([&] {
    require(rep != nullptr, "rep");
    require(field != nullptr, "field");
    require(out != nullptr, "out");
    const std::string f = field;
    const auto& r = rep->rep;
    if (f == "dp_lift") {
      *out = r.dp_lift;
    } else if (f == "dp_se") {
      *out = r.dp_se;
    } else if (f == "ci_lower") {
      *out = r.ci_lower;
    } else if (f == "ci_upper") {
      *out = r.ci_upper;
    } else if (f == "n_t") {
      *out = static_cast<double>(r.n_t);
    } else if (f == "n_c") {
      *out = static_cast<double>(r.n_c);
    } else if (f == "spine_rows") {
      *out = static_cast<double>(r.spine_rows);
    } else {
      fail(Errc::kBadInput, "unknown report field '" + f + "'");
    }
  });
}

void privlift_report_free(privlift_report* rep) { delete rep; }

int privlift_synth(uint64_t users, double overlap, double true_lift,
                   uint64_t seed, uint64_t r_bound, const char* publisher_csv,
                   const char* advertiser_csv, char** out_meta_json) {
  return guard([&] {
    require(publisher_csv != nullptr, "publisher_csv");
    require(advertiser_csv != nullptr, "advertiser_csv");
    privlift::data::SynthSpec spec;
    spec.users = users;
    spec.overlap = overlap;
    spec.true_lift = true_lift;
    spec.seed = seed;
    spec.r_bound = r_bound;
    auto meta = privlift::data::generate_synthetic(spec, publisher_csv,
                                                   advertiser_csv);
    if (out_meta_json != nullptr) {
      nlohmann::ordered_json j;
      j["users"] = meta.users;
      j["intersection"] = meta.intersection;
      j["n_t"] = meta.n_t;
      j["n_c"] = meta.n_c;
      j["bonus_value"] = meta.bonus_value;
      j["expected_lift"] = meta.expected_lift;
      *out_meta_json = dup_string(j.dump(2));
    }
  });
}

int privlift_oracle(const privlift_config* cfg, const char* publisher_csv,
                    const char* advertiser_csv, privlift_report** out) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(publisher_csv != nullptr, "publisher_csv");
    require(advertiser_csv != nullptr, "advertiser_csv");
    require(out != nullptr, "out");
    auto rep = orch::run_oracle(cfg->cfg, publisher_csv, advertiser_csv);
    *out = new privlift_report{std::move(rep)};
  });
}

int privlift_match(const privlift_config* cfg, const char* role,
                   char** out_json) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(out_json != nullptr, "out_json");
    const auto me = parse_role(role);
    orch::MatchSummary summary;
    with_tcp_transport(cfg->cfg, me, [&](orch::Transport& tp) {
      summary = orch::run_match(cfg->cfg, me, tp);
    });
    *out_json = dup_string(summary.to_json_text());
  });
}

int privlift_run(const privlift_config* cfg, const char* role,
                 privlift_report** out) {
  return guard([&] {
    require(cfg != nullptr, "cfg");
    require(out != nullptr, "out");
    const auto me = parse_role(role);
    orch::Report rep;
    with_tcp_transport(cfg->cfg, me, [&](orch::Transport& tp) {
      rep = orch::run_pipeline(cfg->cfg, me, tp);
    });
    *out = new privlift_report{std::move(rep)};
  });
}

int privlift_run_local(const privlift_config* publisher_cfg,
                       const privlift_config* advertiser_cfg,
                       privlift_report** publisher_out,
                       privlift_report** advertiser_out) {
  return guard([&] {
    require(publisher_cfg != nullptr, "publisher_cfg");
    require(advertiser_cfg != nullptr, "advertiser_cfg");
    auto [pub, adv] =
        orch::run_local_pair(publisher_cfg->cfg, advertiser_cfg->cfg);
    if (publisher_out != nullptr) {
      *publisher_out = new privlift_report{std::move(pub)};
    }
    if (advertiser_out != nullptr) {
      *advertiser_out = new privlift_report{std::move(adv)};
    }
  });
}

int privlift_bench(const privlift_config* base_cfg, const char* sweep,
                   uint64_t users, double overlap, double true_lift,
                   uint64_t seed, char** out_csv) {
  return guard([&] {
    require(base_cfg != nullptr, "base_cfg");
    require(out_csv != nullptr, "out_csv");
    const auto cases = parse_sweep(sweep);
    privlift::data::SynthSpec spec;
    spec.users = users;
    spec.overlap = overlap;
    spec.true_lift = true_lift;
    spec.seed = seed == 0 ? 1 : seed;
    spec.r_bound = base_cfg->cfg.r_bound;
    orch::Config base = base_cfg->cfg;
    // Bench runs are timing runs; pin the seed so they are repeatable.
    if (base.seed == 0) base.seed = spec.seed;
    auto results = orch::run_bench(spec, base, cases);
    *out_csv = dup_string(orch::bench_csv(results));
  });
}

}  // extern "C"
