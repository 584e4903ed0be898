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
#include <string>
#include <vector>

#include "core/dp.hpp"

namespace privlift::data {

struct Conversion {
  uint32_t ts = 0;
  uint32_t value = 0;  // whole outcome units, capped at ingest
};

struct PublisherRow {
  std::string id;  // normalized
  uint32_t opportunity_ts = 0;
  uint8_t test_flag = 0;  // 1 = test arm
};

struct AdvertiserRow {
  std::string id;  // normalized
  std::vector<Conversion> conversions;  // sorted by ts, input order on ties
};

// Non-fatal ingest observations, surfaced in logs and reports.
struct IngestWarnings {
  uint64_t capped_values = 0;     // conversion values clamped to the cap
  uint64_t ignored_squares = 0;   // stale precomputed squares, recomputed
  uint64_t truncated_users = 0;   // users holding more than K conversions

  void merge(const IngestWarnings& o) {
    capped_values += o.capped_values;
    ignored_squares += o.ignored_squares;
    truncated_users += o.truncated_users;
  }
};

// CSV `id,opportunity_ts,test_flag` with that exact header. One row per
// user; duplicate ids are an error (an opportunity log is deduplicated
// upstream, and silently keeping one row would bias the arm counts).
std::vector<PublisherRow> load_publisher_csv(const std::string& path,
                                             IngestWarnings& warn);

// CSV `id,conv_ts,conv_value[,conv_value_sq]` with that exact header. One
// row per conversion, any order; rows group by id. The optional square
// column is validated and recomputed, never trusted.
std::vector<AdvertiserRow> load_advertiser_csv(const std::string& path,
                                               IngestWarnings& warn);

// Keeps each user's earliest `max_conversions` conversions by timestamp.
// Later ones can never enter the circuit, which fixes the per-user
// contribution bound the DP accounting relies on.
void truncate_conversions(std::vector<AdvertiserRow>& rows,
                          uint32_t max_conversions, IngestWarnings& warn);

// Clear-data reference for the whole private pipeline: join on normalized
// id, count every publisher row in its arm, credit conversions strictly
// after the opportunity, clamp per-user outcomes at r_bound.
dp::Aggregates oracle_aggregates(const std::vector<PublisherRow>& pub,
                                 const std::vector<AdvertiserRow>& adv,
                                 uint64_t r_bound, uint32_t max_conversions);

// Synthetic two-party trial with a planted treatment effect. Wilful
// whole-unit bonus sizing keeps the planted expected lift exact; the
// generator refuses parameter combinations where the clamp could bite.
struct SynthSpec {
  uint64_t users = 10000;
  double overlap = 0.6;     // fraction of users present on both sides
  double true_lift = 2.0;   // planted expected per-user lift, outcome units
  uint64_t seed = 1;
  uint64_t r_bound = 100;
};

struct SynthMeta {
  uint64_t users = 0;
  uint64_t intersection = 0;
  uint64_t n_t = 0, n_c = 0;
  int64_t bonus_value = 0;
  double expected_lift = 0.0;  // realized: bonus * |test ∩ both| / n_t
};

// Writes the two CSVs plus `<out_publisher>.meta.json` describing the
// planted effect. Returns the meta.
SynthMeta generate_synthetic(const SynthSpec& spec,
                             const std::string& out_publisher,
                             const std::string& out_advertiser);

}  // namespace privlift::data
