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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dsim/config.hpp"

namespace dsim {

enum class ServedBy : std::uint8_t { Llc, LocalMem, LineReply, PageReply };
inline constexpr std::size_t kNumServedBy = 4;
std::string_view to_string(ServedBy s);

struct CoreStats {
  std::uint64_t accesses = 0;
  std::uint64_t completed = 0;
  /// Time the core could not issue: waiting for a free outstanding slot,
  /// plus draining after its last issue.
  double total_mem_stall_ns = 0.0;
  /// Sum over accesses of (completion - issue).
  double total_access_latency_ns = 0.0;
  /// Completion time of the core's last access; the job's elapsed time.
  double elapsed_ns = 0.0;

  friend bool operator==(const CoreStats&, const CoreStats&) = default;
};

struct RunStats {
  double elapsed_ns = 0.0;
  std::vector<CoreStats> cores;

  // Network, indexed by ChannelName / PacketKind.
  std::array<std::uint64_t, 2> network_bytes{};
  std::array<std::uint64_t, 2> network_payload_bytes{};
  std::uint64_t free_ride_bytes = 0;
  std::array<std::uint64_t, 5> packets{};

  std::uint64_t llc_hits = 0;
  std::uint64_t llc_misses = 0;
  std::uint64_t llc_evictions = 0;
  std::uint64_t llc_writebacks_absorbed = 0;
  std::uint64_t llc_writebacks_dropped = 0;
  std::uint64_t local_hits = 0;
  std::uint64_t local_misses = 0;
  std::uint64_t page_evictions = 0;
  std::uint64_t page_writebacks = 0;

  std::array<std::uint64_t, kNumServedBy> served_by{};

  // DaeMon selection unit, indexed by Granularity.
  std::array<std::uint64_t, 3> decisions{};
  std::uint64_t stalls = 0;
  /// Inflight buffer occupancy sampled at every selection decision; index is
  /// the occupancy.
  std::vector<std::uint64_t> sub_occupancy_hist;
  std::vector<std::uint64_t> page_occupancy_hist;
  /// Link queue occupancy at grant time, summed over links (log2 buckets).
  std::array<std::uint64_t, 16> link_queue_hist{};

  std::uint64_t total_accesses() const;
  std::uint64_t total_completed() const;
  double total_mem_stall_ns() const;
  double total_access_latency_ns() const;
  std::uint64_t decisions_of(Granularity g) const { return decisions[static_cast<int>(g)]; }

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

/// elapsed / baseline elapsed. Throws Error if the baseline is 0 while the
/// run is not.
double slowdown(const RunStats& stats, const RunStats& baseline);
double slowdown(double elapsed_ns, double baseline_elapsed_ns);

/// exp(mean(log(r))). Throws Error on empty input or non-positive ratios.
double geomean(std::span<const double> ratios);

}  // namespace dsim
