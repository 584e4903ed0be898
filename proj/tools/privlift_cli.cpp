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

// Operator front end. Everything substantive lives behind the C API; this
// file only maps subcommands and flags onto it and prints the results.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "privlift.h"

namespace {

// Exits with the C status code on failure, after printing the message.
void check(int status) {
  if (status != PRIVLIFT_OK) {
    std::fprintf(stderr, "error: %s (code %d)\n", privlift_last_error(),
                 status);
    std::exit(status);
  }
}

void print_and_free(char* s) {
  std::fputs(s, stdout);
  std::fputc('\n', stdout);
  privlift_string_free(s);
}

struct ConfigHandle {
  privlift_config* p = nullptr;
  ~ConfigHandle() { privlift_config_free(p); }
};

struct ReportHandle {
  privlift_report* p = nullptr;
  ~ReportHandle() { privlift_report_free(p); }
};

// Flags shared by the commands that take a run configuration. Only flags the
// operator actually passed override the config file.
struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> shards, workers, max_conversions, r_bound, k, seed,
      port;
  std::optional<double> rho1, rho2, alpha;
  bool zero_noise = false;
  std::optional<std::string> input, out, host;
};

void add_common_flags(CLI::App& cmd, CommonOpts& o, bool with_net) {
  cmd.add_option("--config", o.config_path, "Config file (JSON)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--shards", o.shards, "Shard count");
  cmd.add_option("--workers", o.workers, "Concurrent shard sessions");
  cmd.add_option("--max-conversions", o.max_conversions,
                 "Conversion slots per user (K)");
  cmd.add_option("--r-bound", o.r_bound, "Per-user outcome clamp (R)");
  cmd.add_option("--k", o.k, "Covert-check noise vector length");
  cmd.add_option("--rho1", o.rho1, "zCDP budget for the lift estimate");
  cmd.add_option("--rho2", o.rho2, "zCDP budget for the standard error");
  cmd.add_option("--alpha", o.alpha, "CI significance level");
  cmd.add_option("--seed", o.seed,
                 "Deterministic run (test mode, watermarked report)");
  cmd.add_flag("--zero-noise", o.zero_noise,
               "Disable noise (test mode, watermarked report)");
  cmd.add_option("--out", o.out, "Write the result to this file");
  if (with_net) {
    cmd.add_option("--input", o.input, "Own dataset CSV");
    cmd.add_option("--host", o.host, "Peer host (publisher side)");
    cmd.add_option("--port", o.port, "Advertiser TCP port");
  }
}

privlift_config* make_config(const CommonOpts& o) {
  privlift_config* cfg = nullptr;
  if (!o.config_path.empty()) {
    check(privlift_config_load_file(o.config_path.c_str(), &cfg));
  } else {
    check(privlift_config_default(&cfg));
  }
  auto set_u64 = [&](const char* key, const std::optional<uint64_t>& v) {
    if (v) check(privlift_config_set_u64(cfg, key, *v));
  };
  auto set_f64 = [&](const char* key, const std::optional<double>& v) {
    if (v) check(privlift_config_set_f64(cfg, key, *v));
  };
  auto set_str = [&](const char* key, const std::optional<std::string>& v) {
    if (v) check(privlift_config_set_str(cfg, key, v->c_str()));
  };
  set_u64("shards", o.shards);
  set_u64("workers", o.workers);
  set_u64("max_conversions", o.max_conversions);
  set_u64("r_bound", o.r_bound);
  set_u64("noise_k", o.k);
  set_u64("seed", o.seed);
  set_u64("port", o.port);
  set_f64("rho1", o.rho1);
  set_f64("rho2", o.rho2);
  set_f64("alpha", o.alpha);
  if (o.zero_noise) check(privlift_config_set_bool(cfg, "zero_noise", 1));
  set_str("input_csv", o.input);
  set_str("out_report", o.out);
  set_str("host", o.host);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privlift: private lift measurement for randomized trials"};
  app.set_version_flag("--version", privlift_version());
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate a linked synthetic dataset with a planted lift");
  uint64_t sy_users = 10000, sy_seed = 1, sy_r_bound = 100;
  double sy_overlap = 0.6, sy_lift = 2.0;
  std::string sy_pub, sy_adv;
  synth->add_option("--users", sy_users, "Publisher user count");
  synth->add_option("--overlap", sy_overlap, "Fraction present on both sides")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--true-lift", sy_lift, "Planted expected lift");
  synth->add_option("--seed", sy_seed, "Generator seed");
  synth->add_option("--r-bound", sy_r_bound, "Per-user outcome clamp (R)");
  synth->add_option("--out-publisher", sy_pub, "Publisher CSV path")
      ->required();
  synth->add_option("--out-advertiser", sy_adv, "Advertiser CSV path")
      ->required();

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "Plaintext reference run over both CSVs (no cryptography)");
  std::string or_pub, or_adv;
  CommonOpts or_opts;
  oracle->add_option("publisher_csv", or_pub, "Publisher CSV")->required();
  oracle->add_option("advertiser_csv", or_adv, "Advertiser CSV")->required();
  add_common_flags(*oracle, or_opts, /*with_net=*/false);

  // match
  auto* match = app.add_subcommand(
      "match", "Identity join only; prints the match summary");
  std::string ma_role;
  CommonOpts ma_opts;
  match->add_option("--role", ma_role, "publisher or advertiser")->required();
  add_common_flags(*match, ma_opts, /*with_net=*/true);

  // run
  auto* run = app.add_subcommand(
      "run", "Full two-party pipeline over TCP (one role per process)");
  std::string ru_role;
  CommonOpts ru_opts;
  run->add_option("--role", ru_role, "publisher or advertiser")->required();
  add_common_flags(*run, ru_opts, /*with_net=*/true);

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Timing sweep over shard/worker cases on synthetic data");
  std::string be_sweep = "1x1,2x1,4x1";
  uint64_t be_users = 10000, be_seed = 1;
  double be_overlap = 0.6, be_lift = 2.0;
  CommonOpts be_opts;
  bench->add_option("--sweep", be_sweep,
                    "Comma list of SHARDSxWORKERS cases (\"4\" = \"4x1\")");
  bench->add_option("--users", be_users, "Synthetic user count");
  bench->add_option("--overlap", be_overlap, "Synthetic overlap")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--true-lift", be_lift, "Planted lift");
  bench->add_option("--bench-seed", be_seed, "Dataset seed");
  add_common_flags(*bench, be_opts, /*with_net=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : PRIVLIFT_ERR_BAD_INPUT;
  }

  if (synth->parsed()) {
    char* meta = nullptr;
    check(privlift_synth(sy_users, sy_overlap, sy_lift, sy_seed, sy_r_bound,
                         sy_pub.c_str(), sy_adv.c_str(), &meta));
    print_and_free(meta);
    return 0;
  }

  if (oracle->parsed()) {
    ConfigHandle cfg{make_config(or_opts)};
    ReportHandle rep;
    check(privlift_oracle(cfg.p, or_pub.c_str(), or_adv.c_str(), &rep.p));
    char* json = nullptr;
    check(privlift_report_json(rep.p, &json));
    print_and_free(json);
    return 0;
  }

  if (match->parsed()) {
    ConfigHandle cfg{make_config(ma_opts)};
    char* json = nullptr;
    check(privlift_match(cfg.p, ma_role.c_str(), &json));
    print_and_free(json);
    return 0;
  }

  if (run->parsed()) {
    ConfigHandle cfg{make_config(ru_opts)};
    ReportHandle rep;
    check(privlift_run(cfg.p, ru_role.c_str(), &rep.p));
    char* json = nullptr;
    check(privlift_report_json(rep.p, &json));
    print_and_free(json);
    return 0;
  }

  if (bench->parsed()) {
    ConfigHandle cfg{make_config(be_opts)};
    char* csv = nullptr;
    check(privlift_bench(cfg.p, be_sweep.c_str(), be_users, be_overlap,
                         be_lift, be_seed, &csv));
    print_and_free(csv);
    return 0;
  }

  return PRIVLIFT_ERR_BAD_INPUT;
}
