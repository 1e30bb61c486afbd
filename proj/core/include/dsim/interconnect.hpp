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
#include <deque>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "dsim/config.hpp"

namespace dsim {

enum class PacketKind : std::uint8_t { LineRequest, PageRequest, LineReply, PageReply, PageWriteback };

std::string_view to_string(PacketKind k);
inline constexpr std::size_t kNumPacketKinds = 5;

/// Logical traffic class. Line kinds travel on the sub-block channel, page
/// kinds on the page channel. On an unpartitioned link both classes share
/// one FIFO but are still accounted separately.
enum class ChannelName : std::uint8_t { SubBlock = 0, Page = 1 };

std::string_view to_string(ChannelName c);

inline constexpr ChannelName channel_for(PacketKind k) {
  return (k == PacketKind::LineRequest || k == PacketKind::LineReply) ? ChannelName::SubBlock
                                                                      : ChannelName::Page;
}

inline constexpr std::uint32_t kComputeComponent = 0;
/// Component id of memory component `mc` (the CC is component 0).
inline constexpr std::uint32_t mc_component(McIndex mc) { return mc + 1; }

struct Packet {
  PacketKind kind = PacketKind::LineRequest;
  PageId page_id = 0;
  LineIndex line_in_page = 0;  // meaningful for line kinds only
  std::uint32_t payload_bytes = 0;
  std::uint32_t header_bytes = 0;
  TimeNs enqueue_time_ns = 0.0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t job_id = 0;

  std::uint64_t total_bytes() const { return std::uint64_t{payload_bytes} + header_bytes; }
};

/// Time to deliver `total_bytes` across one link hop. A free ride pays only
/// propagation latency (no serialization, no link occupancy).
TimeNs transfer_duration(std::uint64_t total_bytes, const SimConfig& cfg, bool free_ride);

struct Grant {
  TimeNs time_ns;
  ChannelName channel;
  PacketKind kind;
  std::uint64_t bytes;
};

void write_grant_log_csv(std::ostream& out, const std::vector<Grant>& log);

/// One slice of a packet handed to the serializer. `last` marks the slice
/// that completes the packet.
struct LinkGrant {
  Packet packet;
  std::uint64_t bytes = 0;
  bool last = true;
};

/// One direction of a CC<->MC link: two channels, a byte-based weighted
/// deficit round-robin arbiter, and a single serializer. Packets longer than
/// `segment_bytes` are serialized in slices, each arbitrated separately.
class LinkState {
 public:
  struct Params {
    double bandwidth_bytes_per_ns = 1.0;
    TimeNs latency_ns = 0.0;
    bool partitioned = false;
    std::uint32_t weight_sub = 1;
    std::uint32_t weight_page = 1;
    /// Deficit credit per unit of weight; a full LineReply should fit in one.
    std::uint64_t quantum_unit_bytes = 80;
    /// 0 sends each packet in one grant.
    std::uint64_t segment_bytes = 0;
  };

  explicit LinkState(const Params& p);

  /// Channels are unbounded; `channel` is ignored on an unpartitioned link.
  void enqueue(ChannelName channel, Packet pkt, TimeNs now);

  /// Picks the next slice. Must only be called when the serializer is free
  /// (now >= busy_until); throws InternalError otherwise. On a grant,
  /// busy_until becomes now + serialization time of the slice.
  std::optional<LinkGrant> arbitrate(TimeNs now);

  bool has_pending() const { return !fifo_[0].empty() || !fifo_[1].empty(); }
  std::size_t queued(ChannelName c) const;
  TimeNs busy_until() const { return busy_until_; }
  TimeNs serialization_time(std::uint64_t bytes) const {
    return static_cast<double>(bytes) / params_.bandwidth_bytes_per_ns;
  }
  TimeNs latency() const { return params_.latency_ns; }
  bool partitioned() const { return params_.partitioned; }

  std::uint64_t bytes_granted(ChannelName c) const { return bytes_[static_cast<int>(c)]; }
  std::uint64_t grants(ChannelName c) const { return grants_[static_cast<int>(c)]; }

  void set_grant_logging(bool on) { log_grants_ = on; }
  const std::vector<Grant>& grant_log() const { return grant_log_; }

  /// Histogram of total queued packets observed at each grant, in log2
  /// buckets: [0], [1], [2,3], [4,7], ...
  static constexpr std::size_t kOccupancyBuckets = 16;
  const std::array<std::uint64_t, kOccupancyBuckets>& occupancy_histogram() const {
    return occupancy_hist_;
  }

 private:
  struct Entry {
    Packet pkt;
    std::uint64_t remaining;
  };

  std::uint64_t next_slice(const Entry& e) const;
  int pick_partitioned();
  LinkGrant take(int queue);
  void record_grant(const LinkGrant& g, TimeNs now);

  Params params_;
  std::array<std::deque<Entry>, 2> fifo_;
  std::array<std::int64_t, 2> deficit_{0, 0};
  std::array<std::int64_t, 2> quantum_{0, 0};
  int current_ = 0;
  bool fresh_visit_ = true;
  TimeNs busy_until_ = 0.0;

  std::array<std::uint64_t, 2> bytes_{0, 0};
  std::array<std::uint64_t, 2> grants_{0, 0};
  std::array<std::uint64_t, kOccupancyBuckets> occupancy_hist_{};
  bool log_grants_ = false;
  std::vector<Grant> grant_log_;
};

}  // namespace dsim
