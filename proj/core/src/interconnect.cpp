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

#include "dsim/interconnect.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

namespace dsim {

std::string_view to_string(PacketKind k) {
  switch (k) {
    case PacketKind::LineRequest: return "line_request";
    case PacketKind::PageRequest: return "page_request";
    case PacketKind::LineReply: return "line_reply";
    case PacketKind::PageReply: return "page_reply";
    case PacketKind::PageWriteback: return "page_writeback";
  }
  return "?";
}

std::string_view to_string(ChannelName c) {
  return c == ChannelName::SubBlock ? "sub_block" : "page";
}

TimeNs transfer_duration(std::uint64_t total_bytes, const SimConfig& cfg, bool free_ride) {
  if (free_ride) return cfg.net_latency_ns;
  return cfg.net_latency_ns + static_cast<double>(total_bytes) / cfg.net_bandwidth_bytes_per_ns();
}

void write_grant_log_csv(std::ostream& out, const std::vector<Grant>& log) {
  out << "time_ns,channel,kind,bytes\n";
  for (const auto& g : log)
    out << g.time_ns << ',' << to_string(g.channel) << ',' << to_string(g.kind) << ',' << g.bytes
        << '\n';
}

LinkState::LinkState(const Params& p) : params_(p) {
  if (!(p.bandwidth_bytes_per_ns > 0.0)) throw Error("link: bandwidth must be > 0");
  if (p.weight_sub == 0 || p.weight_page == 0) throw Error("link: weights must be >= 1");
  quantum_[0] = static_cast<std::int64_t>(p.weight_sub * p.quantum_unit_bytes);
  quantum_[1] = static_cast<std::int64_t>(p.weight_page * p.quantum_unit_bytes);
}

void LinkState::enqueue(ChannelName channel, Packet pkt, TimeNs now) {
  pkt.enqueue_time_ns = now;
  const auto bytes = pkt.total_bytes();
  fifo_[params_.partitioned ? static_cast<int>(channel) : 0].push_back(Entry{pkt, bytes});
}

std::size_t LinkState::queued(ChannelName c) const {
  if (!params_.partitioned) {
    std::size_t n = 0;
    for (const auto& e : fifo_[0]) n += channel_for(e.pkt.kind) == c;
    return n;
  }
  return fifo_[static_cast<int>(c)].size();
}

std::uint64_t LinkState::next_slice(const Entry& e) const {
  if (params_.segment_bytes == 0) return e.remaining;
  return std::min(e.remaining, params_.segment_bytes);
}

std::optional<LinkGrant> LinkState::arbitrate(TimeNs now) {
  if (now < busy_until_) throw InternalError("link: arbitrate called while serializer busy");
  if (!has_pending()) return std::nullopt;

  LinkGrant g = take(params_.partitioned ? pick_partitioned() : 0);
  record_grant(g, now);
  busy_until_ = now + serialization_time(g.bytes);
  return g;
}

LinkGrant LinkState::take(int queue) {
  auto& q = fifo_[queue];
  Entry& e = q.front();
  LinkGrant g{e.pkt, next_slice(e), false};
  e.remaining -= g.bytes;
  if (e.remaining == 0) {
    g.last = true;
    q.pop_front();
  }
  return g;
}

// Deficit round robin over the two channels. A channel earns its quantum once
// per visit and keeps sending while its head slice fits in the deficit; an
// empty channel forfeits its deficit. Since at least one channel is non-empty
// the loop always ends with a choice, which makes the arbiter work-conserving.
int LinkState::pick_partitioned() {
  for (;;) {
    const auto& q = fifo_[current_];
    if (q.empty()) {
      deficit_[current_] = 0;
      current_ ^= 1;
      fresh_visit_ = true;
      continue;
    }
    if (fresh_visit_) {
      deficit_[current_] += quantum_[current_];
      fresh_visit_ = false;
    }
    const auto bytes = static_cast<std::int64_t>(next_slice(q.front()));
    if (bytes <= deficit_[current_]) {
      deficit_[current_] -= bytes;
      return current_;
    }
    current_ ^= 1;
    fresh_visit_ = true;
  }
}

void LinkState::record_grant(const LinkGrant& g, TimeNs now) {
  const auto c = channel_for(g.packet.kind);
  bytes_[static_cast<int>(c)] += g.bytes;
  grants_[static_cast<int>(c)] += 1;
  // Occupancy includes the packet being granted.
  const std::uint64_t occ = fifo_[0].size() + fifo_[1].size() + (g.last ? 1 : 0);
  std::size_t bucket = std::bit_width(occ);
  if (bucket >= kOccupancyBuckets) bucket = kOccupancyBuckets - 1;
  occupancy_hist_[bucket] += 1;
  if (log_grants_) grant_log_.push_back(Grant{now, c, g.packet.kind, g.bytes});
}

}  // namespace dsim
