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

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace privlift::data {

namespace {

// Base outcome behavior, identical in both arms: up to two conversions of
// modest value scattered around the opportunity (some land before it and must
// not be credited).
constexpr uint64_t kBaseMaxConvs = 2;
constexpr uint64_t kBaseMaxValue = 40;

std::string user_id(uint64_t i) { return "u" + std::to_string(i) + "@example.test"; }

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ProtocolError(Errc::kIo, "cannot write " + path);
  out << body;
  if (!out) throw ProtocolError(Errc::kIo, "short write to " + path);
}

}  // namespace

SynthMeta generate_synthetic(const SynthSpec& spec,
                             const std::string& out_publisher,
                             const std::string& out_advertiser) {
  if (spec.users < 10) {
    throw ProtocolError(Errc::kBadInput, "synthetic trial needs >= 10 users");
  }
  if (!(spec.overlap > 0.0 && spec.overlap <= 1.0)) {
    throw ProtocolError(Errc::kBadInput, "overlap must be in (0, 1]");
  }
  if (spec.true_lift < 0.0) {
    throw ProtocolError(Errc::kBadInput, "true_lift must be non-negative");
  }
  const int64_t bonus = std::llround(spec.true_lift / spec.overlap);
  // If the clamp can ever bite, the planted lift stops being exact.
  if (kBaseMaxConvs * kBaseMaxValue + static_cast<uint64_t>(bonus) >
      spec.r_bound) {
    throw ProtocolError(Errc::kBadInput,
                        "true_lift/overlap too large for r_bound " +
                            std::to_string(spec.r_bound) +
                            "; raise r_bound or lower the lift");
  }

  Csprng root = Csprng::from_seed64(spec.seed);
  Csprng arm_rng = root.fork("arms");
  Csprng member_rng = root.fork("membership");
  Csprng conv_rng = root.fork("conversions");

  const uint64_t n = spec.users;
  const uint64_t inter =
      static_cast<uint64_t>(std::llround(spec.overlap * n));

  // Balanced arms with random membership: shuffle, alternate.
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (uint64_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[arm_rng.below(i)]);
  }
  std::vector<uint8_t> test(n);
  for (uint64_t i = 0; i < n; ++i) test[order[i]] = i & 1;

  // Exact intersection size, membership independent of arms.
  std::iota(order.begin(), order.end(), 0u);
  for (uint64_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[member_rng.below(i)]);
  }
  std::vector<uint8_t> in_both(n, 0);
  for (uint64_t i = 0; i < inter; ++i) in_both[order[i]] = 1;

  SynthMeta meta;
  meta.users = n;
  meta.intersection = inter;
  meta.bonus_value = bonus;

  std::string pub = "id,opportunity_ts,test_flag\n";
  std::string adv = "id,conv_ts,conv_value\n";
  uint64_t bonus_users = 0;
  for (uint64_t i = 0; i < n; ++i) {
    const uint32_t opp = 1000 + static_cast<uint32_t>(conv_rng.below(1000));
    pub += user_id(i);
    pub += ',';
    pub += std::to_string(opp);
    pub += test[i] ? ",1\n" : ",0\n";
    if (test[i]) {
      meta.n_t++;
    } else {
      meta.n_c++;
    }
    if (!in_both[i]) continue;
    const uint64_t base = conv_rng.below(kBaseMaxConvs + 1);
    for (uint64_t c = 0; c < base; ++c) {
      // Window straddles the opportunity; roughly half never count.
      const uint32_t ts =
          opp - 500 + static_cast<uint32_t>(conv_rng.below(1001));
      const uint64_t value = 1 + conv_rng.below(kBaseMaxValue);
      adv += user_id(i);
      adv += ',';
      adv += std::to_string(ts);
      adv += ',';
      adv += std::to_string(value);
      adv += '\n';
    }
    if (test[i] && bonus > 0) {
      const uint32_t ts = opp + 1 + static_cast<uint32_t>(conv_rng.below(500));
      adv += user_id(i);
      adv += ',';
      adv += std::to_string(ts);
      adv += ',';
      adv += std::to_string(bonus);
      adv += '\n';
      bonus_users++;
    }
  }
  // Advertiser-only users exercise the non-joined part of the spine.
  const uint64_t extras = n / 10;
  for (uint64_t i = 0; i < extras; ++i) {
    adv += "x" + std::to_string(i) + "@example.test";
    adv += ',';
    adv += std::to_string(1000 + conv_rng.below(1000));
    adv += ',';
    adv += std::to_string(1 + conv_rng.below(kBaseMaxValue));
    adv += '\n';
  }

  meta.expected_lift =
      meta.n_t == 0 ? 0.0
                    : static_cast<double>(bonus) * bonus_users / meta.n_t;

  write_file(out_publisher, pub);
  write_file(out_advertiser, adv);

  nlohmann::ordered_json j;
  j["users"] = meta.users;
  j["intersection"] = meta.intersection;
  j["n_t"] = meta.n_t;
  j["n_c"] = meta.n_c;
  j["bonus_value"] = meta.bonus_value;
  j["bonus_users"] = bonus_users;
  j["expected_lift"] = meta.expected_lift;
  j["seed"] = spec.seed;
  write_file(out_publisher + ".meta.json", j.dump(2) + "\n");
  return meta;
}

}  // namespace privlift::data
