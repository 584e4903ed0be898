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

#include "core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/fixed.hpp"
#include "core/group.hpp"

namespace privlift::data {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

uint64_t parse_u64(std::string_view s, const std::string& path, size_t lineno,
                   const char* what) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ProtocolError(Errc::kBadInput, path + ":" + std::to_string(lineno) +
                                             ": bad " + what + " '" +
                                             std::string(s) + "'");
  }
  return v;
}

uint32_t parse_ts(std::string_view s, const std::string& path, size_t lineno) {
  uint64_t v = parse_u64(s, path, lineno, "timestamp");
  // 0 is reserved for padded rows inside the circuit.
  if (v == 0 || v > UINT32_MAX) {
    throw ProtocolError(Errc::kBadInput, path + ":" + std::to_string(lineno) +
                                             ": timestamp out of range");
  }
  return static_cast<uint32_t>(v);
}

// Reads one logical line, tolerating CRLF endings.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::vector<PublisherRow> load_publisher_csv(const std::string& path,
                                             IngestWarnings&) {
  std::ifstream in(path);
  if (!in) throw ProtocolError(Errc::kIo, "cannot open " + path);
  std::string line;
  if (!next_line(in, line) || line != "id,opportunity_ts,test_flag") {
    throw ProtocolError(Errc::kBadInput,
                        path + ": expected header id,opportunity_ts,test_flag");
  }
  std::vector<PublisherRow> rows;
  std::unordered_set<std::string> seen;
  size_t lineno = 1;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 3) {
      throw ProtocolError(Errc::kBadInput, path + ":" +
                                               std::to_string(lineno) +
                                               ": expected 3 fields");
    }
    PublisherRow r;
    r.id = group::normalize_identifier(f[0]);
    if (r.id.empty()) {
      throw ProtocolError(Errc::kBadInput,
                          path + ":" + std::to_string(lineno) + ": empty id");
    }
    if (!seen.insert(r.id).second) {
      throw ProtocolError(Errc::kBadInput, path + ":" +
                                               std::to_string(lineno) +
                                               ": duplicate id " + r.id);
    }
    r.opportunity_ts = parse_ts(f[1], path, lineno);
    if (f[2] != "0" && f[2] != "1") {
      throw ProtocolError(Errc::kBadInput, path + ":" +
                                               std::to_string(lineno) +
                                               ": test_flag must be 0 or 1");
    }
    r.test_flag = f[2] == "1" ? 1 : 0;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AdvertiserRow> load_advertiser_csv(const std::string& path,
                                               IngestWarnings& warn) {
  std::ifstream in(path);
  if (!in) throw ProtocolError(Errc::kIo, "cannot open " + path);
  std::string line;
  bool has_sq;
  if (!next_line(in, line)) {
    throw ProtocolError(Errc::kBadInput, path + ": empty file");
  }
  if (line == "id,conv_ts,conv_value") {
    has_sq = false;
  } else if (line == "id,conv_ts,conv_value,conv_value_sq") {
    has_sq = true;
  } else {
    throw ProtocolError(
        Errc::kBadInput,
        path + ": expected header id,conv_ts,conv_value[,conv_value_sq]");
  }
  std::vector<AdvertiserRow> rows;
  std::unordered_map<std::string, size_t> index;
  size_t lineno = 1;
  const size_t want = has_sq ? 4 : 3;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != want) {
      throw ProtocolError(Errc::kBadInput,
                          path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(want) + " fields");
    }
    std::string id = group::normalize_identifier(f[0]);
    if (id.empty()) {
      throw ProtocolError(Errc::kBadInput,
                          path + ":" + std::to_string(lineno) + ": empty id");
    }
    Conversion c;
    c.ts = parse_ts(f[1], path, lineno);
    uint64_t value = parse_u64(f[2], path, lineno, "conv_value");
    if (has_sq) {
      uint64_t sq = parse_u64(f[3], path, lineno, "conv_value_sq");
      // Derived columns go stale; recompute and count the disagreement.
      if (sq != value * value) warn.ignored_squares++;
    }
    if (value > kMaxConvValue) {
      value = kMaxConvValue;
      warn.capped_values++;
    }
    c.value = static_cast<uint32_t>(value);
    auto [it, inserted] = index.try_emplace(id, rows.size());
    if (inserted) {
      rows.push_back(AdvertiserRow{id, {}});
    }
    rows[it->second].conversions.push_back(c);
  }
  for (auto& r : rows) {
    std::stable_sort(
        r.conversions.begin(), r.conversions.end(),
        [](const Conversion& a, const Conversion& b) { return a.ts < b.ts; });
  }
  return rows;
}

void truncate_conversions(std::vector<AdvertiserRow>& rows,
                          uint32_t max_conversions, IngestWarnings& warn) {
  for (auto& r : rows) {
    if (r.conversions.size() > max_conversions) {
      r.conversions.resize(max_conversions);
      warn.truncated_users++;
    }
  }
}

dp::Aggregates oracle_aggregates(const std::vector<PublisherRow>& pub,
                                 const std::vector<AdvertiserRow>& adv,
                                 uint64_t r_bound, uint32_t max_conversions) {
  std::unordered_map<std::string_view, const AdvertiserRow*> by_id;
  by_id.reserve(adv.size());
  for (const auto& r : adv) by_id.emplace(r.id, &r);
  dp::Aggregates a;
  for (const auto& p : pub) {
    uint64_t y = 0;
    if (auto it = by_id.find(p.id); it != by_id.end()) {
      const auto& convs = it->second->conversions;
      size_t k = std::min<size_t>(convs.size(), max_conversions);
      for (size_t i = 0; i < k; ++i) {
        if (convs[i].ts > p.opportunity_ts) y += convs[i].value;
      }
      y = std::min(y, r_bound);
    }
    if (p.test_flag) {
      a.n_t++;
      a.sum_t += y;
      a.ssq_t += y * y;
    } else {
      a.n_c++;
      a.sum_c += y;
      a.ssq_c += y * y;
    }
  }
  return a;
}

}  // namespace privlift::data
