/*
 * Copyright 2026 The dsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <tuple>

#include "dsim/config.hpp"
#include "dsim/workload.hpp"

namespace dsim::testing {

/// Small integer-valued configuration used by the hand-built schedules:
/// 256-byte pages of four lines, a 16 B/ns link with 100 ns latency.
inline SimConfig tiny_config(Scheme scheme) {
  SimConfig c;
  c.scheme = scheme;
  c.line_size_bytes = 64;
  c.page_size_bytes = 256;
  c.footprint_pages = 2;
  c.local_mem_fraction = 1.0;
  c.llc_capacity_lines = 16;
  c.llc_associativity = 4;
  c.bus_bandwidth_bytes_per_ns = 16.0;
  c.net_bandwidth_factor = 1.0;
  c.net_latency_ns = 100.0;
  c.header_bytes = 16;
  c.llc_hit_latency_ns = 1.0;
  c.local_mem_latency_ns = 10.0;
  c.mc_dram_latency_ns = 20.0;
  c.max_outstanding_per_core = 1;
  c.compression_enabled = false;
  return c;
}

/// (think_ns, addr, is_write) triples.
inline AccessTrace make_trace(std::uint64_t footprint_pages,
                              std::initializer_list<std::tuple<std::uint64_t, Addr, bool>> rows) {
  AccessTrace t;
  t.footprint_pages = footprint_pages;
  for (const auto& [think, addr, w] : rows) t.records.push_back({think, addr, w});
  return t;
}

/// Directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path() / "dsim-test-XXXXXX";
    std::string s = base.string();
    path_ = std::filesystem::path(mkdtemp(s.data()));
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dsim::testing
