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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsim {

/// Raised for malformed inputs: bad config documents, trace files, specs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when simulator state contradicts itself (a model bug, not a user
/// error): duplicate page install, reply without an inflight entry, ...
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Addr = std::uint64_t;
using PageId = std::uint64_t;
using LineIndex = std::uint32_t;
using McIndex = std::uint32_t;

/// Simulated time in nanoseconds.
using TimeNs = double;

enum class Scheme { Local, Page, PageFree, CacheLine, CacheLinePage, DaeMon };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

enum class Granularity { LineOnly, PageOnly, Both };

std::string_view to_string(Granularity g);
Granularity granularity_from_string(std::string_view name);

/// How the selection unit maps inflight-buffer utilization to a decision.
///   Table:        page_util >= hi -> LineOnly; sub_util >= hi -> PageOnly;
///                 otherwise Both.
///   LowThreshold: Both only when both utilizations are <= lo; otherwise
///                 LineOnly.
enum class SelectionVariant { Table, LowThreshold };

struct SimConfig {
  std::uint32_t line_size_bytes = 64;
  std::uint32_t page_size_bytes = 4096;
  std::uint64_t footprint_pages = 16384;
  double local_mem_fraction = 0.20;
  std::uint64_t llc_capacity_lines = 16384;
  std::uint32_t llc_associativity = 16;
  std::uint32_t num_cores = 1;
  std::uint32_t num_mcs = 1;
  double bus_bandwidth_bytes_per_ns = 16.0;
  double net_bandwidth_factor = 4.0;
  double net_latency_ns = 100.0;
  double local_mem_latency_ns = 60.0;
  double llc_hit_latency_ns = 10.0;
  double mc_dram_latency_ns = 60.0;
  std::uint32_t header_bytes = 16;
  /// Largest slice of a packet the link serializes per grant; 0 sends whole
  /// packets. A packet is delivered when its last slice finishes.
  std::uint32_t link_segment_bytes = 256;
  Scheme scheme = Scheme::DaeMon;

  std::uint32_t daemon_weight_sub = 3;
  std::uint32_t daemon_weight_page = 1;
  std::uint32_t daemon_sub_capacity = 64;
  std::uint32_t daemon_page_capacity = 16;
  double daemon_threshold_lo = 0.25;
  double daemon_threshold_hi = 0.75;
  SelectionVariant daemon_selection_variant = SelectionVariant::Table;
  /// Bypasses the selection unit; used to reduce DaeMon to the baselines.
  std::optional<Granularity> daemon_forced_decision;
  /// Collapses DaeMon's two link channels into one FIFO.
  bool daemon_single_channel = false;
  bool critical_line_on_inflight_page = true;

  bool compression_enabled = true;
  double comp_latency_ns = 250.0;
  double decomp_latency_ns = 250.0;

  std::uint32_t max_outstanding_per_core = 4;
  std::uint64_t seed = 1;

  /// Bytes per nanosecond on each CC<->MC link direction.
  double net_bandwidth_bytes_per_ns() const {
    return bus_bandwidth_bytes_per_ns / net_bandwidth_factor;
  }
  std::uint32_t lines_per_page() const { return page_size_bytes / line_size_bytes; }
  std::uint64_t local_capacity_pages() const;
  std::uint64_t footprint_bytes() const {
    return footprint_pages * static_cast<std::uint64_t>(page_size_bytes);
  }

  /// Throws Error naming the offending field and constraint.
  void validate() const;
};

/// Parses a flat JSON object whose keys are SimConfig field names. Absent
/// keys keep their defaults; unknown keys are rejected. The result is
/// validated.
SimConfig parse_config(std::string_view text);
SimConfig load_config_file(const std::string& path);

/// Serializes every field, so that parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

bool operator==(const SimConfig& a, const SimConfig& b);

struct AddressParts {
  PageId page_id = 0;
  LineIndex line_in_page = 0;
  std::uint32_t offset_in_line = 0;

  friend bool operator==(const AddressParts&, const AddressParts&) = default;
};

AddressParts addr_decompose(Addr addr, const SimConfig& cfg);
Addr addr_compose(const AddressParts& parts, const SimConfig& cfg);

/// Page-granularity striping across memory components.
inline McIndex page_to_mc(PageId page, std::uint32_t num_mcs) {
  return static_cast<McIndex>(page % num_mcs);
}

}  // namespace dsim
