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
#include <deque>
#include <limits>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dsim/config.hpp"
#include "dsim/hierarchy.hpp"
#include "dsim/interconnect.hpp"
#include "dsim/stats.hpp"
#include "dsim/workload.hpp"

namespace dsim {

using DemandId = std::uint64_t;

/// One memory access in flight, from issue to completion.
struct Demand {
  std::uint32_t core = 0;
  std::uint64_t index = 0;  // position in the core's trace
  PageId page = 0;
  LineIndex line = 0;
  bool is_write = false;
  TimeNs issue_ns = 0.0;
  bool completed = false;
  TimeNs completion_ns = 0.0;
  ServedBy served_by = ServedBy::Llc;
};

struct DemandOutcome {
  DemandId demand = 0;
  TimeNs completion_time_ns = 0.0;
  ServedBy served_by = ServedBy::Llc;
};

enum class InflightLevel { Line, Page };

struct InflightKey {
  InflightLevel level = InflightLevel::Page;
  PageId page = 0;
  LineIndex line = 0;  // ignored for page keys

  static InflightKey line_key(PageId p, LineIndex l) { return {InflightLevel::Line, p, l}; }
  static InflightKey page_key(PageId p) { return {InflightLevel::Page, p, 0}; }
};

enum class CoalesceResult { Issued, Attached, Full };

/// Inflight sub-block and page buffers. Each key has at most one entry;
/// later misses to an inflight key attach as waiters instead of issuing.
class InflightState {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  InflightState(std::size_t sub_capacity, std::size_t page_capacity, std::uint32_t lines_per_page);

  /// Attached if an entry exists; otherwise Issued (new entry) when the
  /// buffer has room, Full when it does not.
  CoalesceResult coalesce_or_issue(const InflightKey& key, DemandId waiter);

  /// Removes the entry and returns its waiters in attach order. Throws
  /// InternalError if there is no entry.
  std::vector<DemandId> take(const InflightKey& key);

  /// Waiters of inflight line entries of `page`, entries left in place.
  std::vector<DemandId> line_waiters_of_page(PageId page) const;

  bool contains(const InflightKey& key) const;
  std::size_t occupancy(InflightLevel level) const;
  std::size_t capacity(InflightLevel level) const;
  bool has_space(InflightLevel level) const { return occupancy(level) < capacity(level); }
  double utilization(InflightLevel level) const;

 private:
  std::uint64_t line_slot(PageId p, LineIndex l) const { return p * lines_per_page_ + l; }

  std::size_t sub_capacity_;
  std::size_t page_capacity_;
  std::uint32_t lines_per_page_;
  std::unordered_map<std::uint64_t, std::vector<DemandId>> sub_;
  std::unordered_map<PageId, std::vector<DemandId>> page_;
  std::unordered_map<PageId, std::uint32_t> sub_lines_per_page_;
};

/// The selection unit: maps instantaneous buffer utilizations to a
/// granularity. Pure.
Granularity select_granularity(double sub_util, double page_util, double threshold_lo,
                               double threshold_hi,
                               SelectionVariant variant = SelectionVariant::Table);

struct PagePayload {
  std::uint32_t payload_bytes = 0;
  TimeNs added_latency_ns = 0.0;  // compression at the sender
};

/// Wire size of a page after link compression. With compression disabled
/// the page travels whole and no latency is added.
PagePayload compress_page_payload(PageId page, const CompressibilityMap* cmap,
                                  const SimConfig& cfg);

/// Services the engine provides to a policy. All calls happen on the event
/// loop at the current simulated time.
class PolicyHost {
 public:
  virtual ~PolicyHost() = default;
  virtual TimeNs now() const = 0;
  virtual const SimConfig& config() const = 0;
  virtual Llc& llc() = 0;
  virtual LocalPageCache& local_cache() = 0;
  virtual RunStats& stats() = 0;
  virtual Demand& demand(DemandId id) = 0;
  /// Queues `pkt` on the CC->MC direction of the page's link at time `at`.
  virtual void send_to_mc(Packet pkt, TimeNs at) = 0;
  /// Marks the demand complete at `at` (>= now). Completing twice is an
  /// InternalError; policies check Demand::completed first.
  virtual void complete(DemandId id, TimeNs at, ServedBy by) = 0;
};

/// Common state machine shared by all six schemes: LLC-side arrival
/// handling, page installs, writebacks and completion bookkeeping. Subclasses
/// decide what an LLC miss does.
class Policy {
 public:
  Policy(PolicyHost& host, const CompressibilityMap* cmap, std::size_t sub_capacity,
         std::size_t page_capacity);
  virtual ~Policy() = default;

  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  virtual Scheme scheme() const = 0;

  /// Entry point for a demand that missed in the LLC.
  virtual void handle_demand(DemandId id) = 0;

  /// LineReply reached the CC: fill LLC, complete pending line waiters.
  std::vector<DemandOutcome> handle_line_reply(const Packet& pkt);
  /// PageReply reached the CC and has been decompressed: install into local
  /// memory, emit a writeback for a dirty victim, complete page waiters and
  /// still-pending line waiters of that page.
  std::vector<DemandOutcome> handle_page_install(const Packet& pkt);

  /// Dirty LLC victims are absorbed by a resident local page, else dropped.
  virtual void handle_llc_victim(const Victim& v);

  /// Reply size and sender-side latency for a page fetched from an MC.
  virtual PagePayload page_reply_payload(PageId page) const;
  /// Receiver-side latency before a PageReply can be installed.
  virtual TimeNs page_decompress_latency() const { return 0.0; }
  /// Page-kind packets skip the link (propagation latency only).
  virtual bool page_free_ride() const { return false; }
  /// Whether links use separate sub-block and page channels.
  virtual bool partitioned_link() const { return false; }

  const InflightState& inflight() const { return inflight_; }
  std::size_t stalled() const { return stalled_.size(); }

 protected:
  void send_request(PacketKind kind, const Demand& d);
  void complete_local_hit(DemandId id);
  /// Re-attempts stalled demands once an inflight entry frees up.
  void retry_stalled();
  /// Issue attempt for a stalled demand; returns false if it must keep
  /// waiting. Only schemes with bounded buffers stall.
  virtual bool retry_demand(DemandId) { return true; }
  void stall(DemandId id) { stalled_.push_back(id); }

  PolicyHost& host_;
  const CompressibilityMap* cmap_;
  InflightState inflight_;

 private:
  std::deque<DemandId> stalled_;
};

std::unique_ptr<Policy> make_policy(Scheme scheme, PolicyHost& host,
                                    const CompressibilityMap* cmap);

}  // namespace dsim
