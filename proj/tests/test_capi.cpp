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

// Exercises the shared library strictly through its C surface, the way an
// external client would.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include <doctest.h>
#include <json.hpp>

#include "privlift.h"

using nlohmann::json;

namespace {

struct ConfigDeleter {
  void operator()(privlift_config* c) const { privlift_config_free(c); }
};
struct ReportDeleter {
  void operator()(privlift_report* r) const { privlift_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { privlift_string_free(s); }
};
using ConfigPtr = std::unique_ptr<privlift_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<privlift_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

ConfigPtr parse_config(const std::string& text) {
  privlift_config* raw = nullptr;
  REQUIRE(privlift_config_parse(text.c_str(), &raw) == PRIVLIFT_OK);
  return ConfigPtr(raw);
}

std::string temp_path(const std::string& tag) {
  namespace fs = std::filesystem;
  return (fs::temp_directory_path() /
          ("privlift-capi-" + std::to_string(::getpid()) + "-" + tag))
      .string();
}

double get_field(const privlift_report* rep, const char* field) {
  double v = 0.0;
  REQUIRE(privlift_report_get(rep, field, &v) == PRIVLIFT_OK);
  return v;
}

struct SynthPaths {
  std::string pub, adv;
};

SynthPaths synth(const std::string& tag, uint64_t users, uint64_t seed) {
  SynthPaths p{temp_path(tag + "-pub.csv"), temp_path(tag + "-adv.csv")};
  int rc = privlift_synth(users, 0.5, 2.0, seed, 100, p.pub.c_str(),
                          p.adv.c_str(), nullptr);
  REQUIRE(rc == PRIVLIFT_OK);
  return p;
}

}  // namespace

TEST_CASE("version and error strings have static storage") {
  CHECK(std::strcmp(privlift_version(), "1.0.0") == 0);
  CHECK(std::strcmp(privlift_last_error(), "") == 0);
  // Free functions tolerate NULL like their libc counterparts.
  privlift_string_free(nullptr);
  privlift_config_free(nullptr);
  privlift_report_free(nullptr);
}

TEST_CASE("null arguments are rejected with a message") {
  privlift_config* cfg = nullptr;
  CHECK(privlift_config_parse(nullptr, &cfg) == PRIVLIFT_ERR_BAD_INPUT);
  CHECK(std::string(privlift_last_error()).find("null argument") !=
        std::string::npos);
  CHECK(privlift_config_parse("{}", nullptr) == PRIVLIFT_ERR_BAD_INPUT);

  double v = 0.0;
  CHECK(privlift_report_get(nullptr, "dp_lift", &v) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_run(nullptr, "publisher", nullptr) ==
        PRIVLIFT_ERR_BAD_INPUT);

  // A successful call clears the sticky message.
  ConfigPtr ok = parse_config("{}");
  CHECK(std::string(privlift_last_error()).empty());
}

TEST_CASE("config parse, overrides, and dump round trip") {
  ConfigPtr cfg = parse_config("{\"shards\": 2, \"alpha\": 0.1}");
  CHECK(privlift_config_set_u64(cfg.get(), "shards", 8) == PRIVLIFT_OK);
  CHECK(privlift_config_set_u64(cfg.get(), "seed", 42) == PRIVLIFT_OK);
  CHECK(privlift_config_set_f64(cfg.get(), "rho1", 0.25) == PRIVLIFT_OK);
  CHECK(privlift_config_set_bool(cfg.get(), "zero_noise", 1) == PRIVLIFT_OK);
  CHECK(privlift_config_set_str(cfg.get(), "input_csv", "a.csv") ==
        PRIVLIFT_OK);

  char* raw = nullptr;
  REQUIRE(privlift_config_dump(cfg.get(), &raw) == PRIVLIFT_OK);
  StringPtr dumped(raw);
  json j = json::parse(raw);
  CHECK(j["shards"] == 8);
  CHECK(j["alpha"] == 0.1);
  CHECK(j["seed"] == 42);
  CHECK(j["rho1"] == 0.25);
  CHECK(j["zero_noise"] == true);
  CHECK(j["input_csv"] == "a.csv");

  CHECK(privlift_config_set_u64(cfg.get(), "rho1", 1) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_config_set_f64(cfg.get(), "shards", 1.0) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_config_set_bool(cfg.get(), "verbose", 1) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_config_set_str(cfg.get(), "mystery", "x") ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_config_set_u64(cfg.get(), "port", 70000) ==
        PRIVLIFT_ERR_BAD_INPUT);

  privlift_config* bad = nullptr;
  CHECK(privlift_config_parse("{\"surprise\": 1}", &bad) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(bad == nullptr);
}

TEST_CASE("config files load from disk") {
  std::string path = temp_path("cfg.json");
  {
    std::ofstream out(path);
    out << "{\"shards\": 7, \"noise_k\": 16}\n";
  }
  privlift_config* raw = nullptr;
  REQUIRE(privlift_config_load_file(path.c_str(), &raw) == PRIVLIFT_OK);
  ConfigPtr cfg(raw);
  char* text = nullptr;
  REQUIRE(privlift_config_dump(cfg.get(), &text) == PRIVLIFT_OK);
  StringPtr dumped(text);
  json j = json::parse(text);
  CHECK(j["shards"] == 7);
  CHECK(j["noise_k"] == 16);
  std::filesystem::remove(path);

  privlift_config* missing = nullptr;
  CHECK(privlift_config_load_file("/nonexistent/cfg.json", &missing) ==
        PRIVLIFT_ERR_IO);
}

TEST_CASE("synth writes metadata and the oracle reads it back") {
  std::string pub = temp_path("so-pub.csv");
  std::string adv = temp_path("so-adv.csv");
  char* meta_raw = nullptr;
  REQUIRE(privlift_synth(200, 0.5, 2.0, 3, 100, pub.c_str(), adv.c_str(),
                         &meta_raw) == PRIVLIFT_OK);
  StringPtr meta(meta_raw);
  json m = json::parse(meta_raw);
  CHECK(m["users"] == 200);
  CHECK(m["intersection"] == 100);
  CHECK(m["n_t"].get<uint64_t>() + m["n_c"].get<uint64_t>() == 200);
  CHECK(std::filesystem::exists(pub + ".meta.json"));

  ConfigPtr cfg = parse_config(
      "{\"max_conversions\": 2, \"zero_noise\": true, \"seed\": 5}");
  privlift_report* rep_raw = nullptr;
  REQUIRE(privlift_oracle(cfg.get(), pub.c_str(), adv.c_str(), &rep_raw) ==
          PRIVLIFT_OK);
  ReportPtr rep(rep_raw);

  CHECK(get_field(rep.get(), "n_t") == m["n_t"].get<double>());
  CHECK(get_field(rep.get(), "n_c") == m["n_c"].get<double>());
  CHECK(get_field(rep.get(), "spine_rows") == 220.0);
  double lift = get_field(rep.get(), "dp_lift");
  CHECK(std::isfinite(lift));
  // Zero noise on a planted effect of 2: the estimate sits near it.
  CHECK(lift > 0.5);
  CHECK(lift < 3.5);
  CHECK(get_field(rep.get(), "ci_lower") <= lift);
  CHECK(get_field(rep.get(), "ci_upper") >= lift);

  // Field accessors agree with the serialized report.
  char* text = nullptr;
  REQUIRE(privlift_report_json(rep.get(), &text) == PRIVLIFT_OK);
  StringPtr jtext(text);
  json j = json::parse(text);
  CHECK(j["role"] == "oracle");
  CHECK(j["dp_lift"].get<double>() == lift);
  CHECK(j["dp_se"].get<double>() == get_field(rep.get(), "dp_se"));

  double v = 0.0;
  CHECK(privlift_report_get(rep.get(), "lift_lower_bound", &v) ==
        PRIVLIFT_ERR_BAD_INPUT);
}

TEST_CASE("oracle refuses an undersized arm") {
  std::string pub = temp_path("small-pub.csv");
  std::string adv = temp_path("small-adv.csv");
  {
    std::ofstream p(pub);
    p << "id,opportunity_ts,test_flag\n";
    p << "a@x.y,1000,1\nb@x.y,1000,1\nc@x.y,1000,0\n";  // n_c = 1
    std::ofstream a(adv);
    a << "id,conv_ts,conv_value\n";
  }
  ConfigPtr cfg = parse_config("{}");
  privlift_report* rep = nullptr;
  CHECK(privlift_oracle(cfg.get(), pub.c_str(), adv.c_str(), &rep) ==
        PRIVLIFT_ERR_PREFLIGHT_FAILED);
  CHECK(rep == nullptr);
  CHECK(std::string(privlift_last_error()).find("arm") != std::string::npos);
  std::filesystem::remove(pub);
  std::filesystem::remove(adv);
}

TEST_CASE("in-process run matches the oracle with noise off") {
  SynthPaths p = synth("local", 200, 4);
  const std::string base =
      "{\"shards\": 2, \"max_conversions\": 2, \"zero_noise\": true, "
      "\"seed\": 6}";
  ConfigPtr pc = parse_config(base);
  ConfigPtr ac = parse_config(base);
  REQUIRE(privlift_config_set_str(pc.get(), "input_csv", p.pub.c_str()) ==
          PRIVLIFT_OK);
  REQUIRE(privlift_config_set_str(ac.get(), "input_csv", p.adv.c_str()) ==
          PRIVLIFT_OK);

  privlift_report *pr_raw = nullptr, *ar_raw = nullptr;
  REQUIRE(privlift_run_local(pc.get(), ac.get(), &pr_raw, &ar_raw) ==
          PRIVLIFT_OK);
  ReportPtr pr(pr_raw), ar(ar_raw);

  CHECK(get_field(pr.get(), "dp_lift") == get_field(ar.get(), "dp_lift"));
  CHECK(get_field(pr.get(), "dp_se") == get_field(ar.get(), "dp_se"));

  ConfigPtr oc = parse_config(base);
  privlift_report* orep_raw = nullptr;
  REQUIRE(privlift_oracle(oc.get(), p.pub.c_str(), p.adv.c_str(),
                          &orep_raw) == PRIVLIFT_OK);
  ReportPtr orep(orep_raw);
  const double tol = std::ldexp(1.0, -12);
  CHECK(std::abs(get_field(pr.get(), "dp_lift") -
                 get_field(orep.get(), "dp_lift")) <= tol);
  CHECK(std::abs(get_field(pr.get(), "dp_se") -
                 get_field(orep.get(), "dp_se")) <= tol);

  // Output pointers are optional.
  REQUIRE(privlift_run_local(pc.get(), ac.get(), nullptr, nullptr) ==
          PRIVLIFT_OK);
}

TEST_CASE("two-party run over tcp") {
  SynthPaths p = synth("tcp", 80, 7);
  const uint16_t port =
      static_cast<uint16_t>(29000 + (::getpid() % 1000));
  const std::string base =
      "{\"shards\": 1, \"max_conversions\": 2, \"zero_noise\": true, "
      "\"seed\": 8, \"port\": " +
      std::to_string(port) + "}";
  ConfigPtr pc = parse_config(base);
  ConfigPtr ac = parse_config(base);
  REQUIRE(privlift_config_set_str(pc.get(), "input_csv", p.pub.c_str()) ==
          PRIVLIFT_OK);
  REQUIRE(privlift_config_set_str(ac.get(), "input_csv", p.adv.c_str()) ==
          PRIVLIFT_OK);

  privlift_report* ar_raw = nullptr;
  int adv_rc = -1;
  std::thread adv([&] {
    adv_rc = privlift_run(ac.get(), "advertiser", &ar_raw);
  });
  privlift_report* pr_raw = nullptr;
  int pub_rc = privlift_run(pc.get(), "publisher", &pr_raw);
  adv.join();

  REQUIRE(adv_rc == PRIVLIFT_OK);
  REQUIRE(pub_rc == PRIVLIFT_OK);
  ReportPtr pr(pr_raw), ar(ar_raw);
  CHECK(get_field(pr.get(), "dp_lift") == get_field(ar.get(), "dp_lift"));
  CHECK(get_field(pr.get(), "n_t") >= 2.0);
  CHECK(get_field(pr.get(), "spine_rows") == 88.0);

  // Roles and ports are validated before any networking.
  privlift_report* rep = nullptr;
  CHECK(privlift_run(pc.get(), "mallory", &rep) == PRIVLIFT_ERR_BAD_INPUT);
  ConfigPtr noport = parse_config("{\"input_csv\": \"x.csv\"}");
  privlift_config_set_str(noport.get(), "input_csv", p.pub.c_str());
  CHECK(privlift_run(noport.get(), "publisher", &rep) ==
        PRIVLIFT_ERR_BAD_INPUT);
}

TEST_CASE("identity match over tcp") {
  SynthPaths p = synth("match", 60, 9);
  const uint16_t port =
      static_cast<uint16_t>(30000 + (::getpid() % 1000));
  const std::string base = "{\"port\": " + std::to_string(port) + "}";
  ConfigPtr pc = parse_config(base);
  ConfigPtr ac = parse_config(base);
  REQUIRE(privlift_config_set_str(pc.get(), "input_csv", p.pub.c_str()) ==
          PRIVLIFT_OK);
  REQUIRE(privlift_config_set_str(ac.get(), "input_csv", p.adv.c_str()) ==
          PRIVLIFT_OK);

  char* aj_raw = nullptr;
  int adv_rc = -1;
  std::thread adv(
      [&] { adv_rc = privlift_match(ac.get(), "advertiser", &aj_raw); });
  char* pj_raw = nullptr;
  int pub_rc = privlift_match(pc.get(), "publisher", &pj_raw);
  adv.join();

  REQUIRE(adv_rc == PRIVLIFT_OK);
  REQUIRE(pub_rc == PRIVLIFT_OK);
  StringPtr aj(aj_raw), pj(pj_raw);
  json ja = json::parse(aj_raw);
  json jp = json::parse(pj_raw);
  CHECK(jp["role"] == "publisher");
  CHECK(ja["role"] == "advertiser");
  CHECK(jp["spine_rows"] == 66);
  CHECK(jp["spine_rows"] == ja["spine_rows"]);
  CHECK(jp["spine_hash"] == ja["spine_hash"]);
  CHECK(jp["own_rows"] == 60);
}

TEST_CASE("bench sweep yields one csv row per case") {
  ConfigPtr cfg = parse_config(
      "{\"max_conversions\": 2, \"zero_noise\": true, \"seed\": 2}");
  char* csv_raw = nullptr;
  REQUIRE(privlift_bench(cfg.get(), "1x1,2", 60, 0.5, 1.0, 2, &csv_raw) ==
          PRIVLIFT_OK);
  StringPtr csv(csv_raw);
  std::string text = csv_raw;
  CHECK(text.rfind("shards,workers,rows,wall_ms,ms_per_shard\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("\n1,1,66,") != std::string::npos);
  CHECK(text.find("\n2,1,66,") != std::string::npos);

  char* out = nullptr;
  CHECK(privlift_bench(cfg.get(), "", 60, 0.5, 1.0, 2, &out) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_bench(cfg.get(), "0x1", 60, 0.5, 1.0, 2, &out) ==
        PRIVLIFT_ERR_BAD_INPUT);
  CHECK(privlift_bench(cfg.get(), "4xbig", 60, 0.5, 1.0, 2, &out) ==
        PRIVLIFT_ERR_BAD_INPUT);
}
