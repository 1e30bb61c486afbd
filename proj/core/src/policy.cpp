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

#include "dsim/policy.hpp"

#include <cmath>

namespace dsim {

// ---------------------------------------------------------------------------
// InflightState

InflightState::InflightState(std::size_t sub_capacity, std::size_t page_capacity,
                             std::uint32_t lines_per_page)
    : sub_capacity_(sub_capacity), page_capacity_(page_capacity), lines_per_page_(lines_per_page) {
  if (sub_capacity == 0 || page_capacity == 0)
    throw Error("inflight buffers need a capacity of at least 1");
}

CoalesceResult InflightState::coalesce_or_issue(const InflightKey& key, DemandId waiter) {
  if (key.level == InflightLevel::Line) {
    const auto slot = line_slot(key.page, key.line);
    if (auto it = sub_.find(slot); it != sub_.end()) {
      it->second.push_back(waiter);
      return CoalesceResult::Attached;
    }
    if (sub_.size() >= sub_capacity_) return CoalesceResult::Full;
    sub_.emplace(slot, std::vector<DemandId>{waiter});
    ++sub_lines_per_page_[key.page];
    return CoalesceResult::Issued;
  }
  if (auto it = page_.find(key.page); it != page_.end()) {
    it->second.push_back(waiter);
    return CoalesceResult::Attached;
  }
  if (page_.size() >= page_capacity_) return CoalesceResult::Full;
  page_.emplace(key.page, std::vector<DemandId>{waiter});
  return CoalesceResult::Issued;
}

std::vector<DemandId> InflightState::take(const InflightKey& key) {
  std::vector<DemandId> out;
  if (key.level == InflightLevel::Line) {
    auto it = sub_.find(line_slot(key.page, key.line));
    if (it == sub_.end())
      throw InternalError("line reply for page " + std::to_string(key.page) + " line " +
                          std::to_string(key.line) + " has no inflight entry");
    out = std::move(it->second);
    sub_.erase(it);
    auto pc = sub_lines_per_page_.find(key.page);
    if (--pc->second == 0) sub_lines_per_page_.erase(pc);
    return out;
  }
  auto it = page_.find(key.page);
  if (it == page_.end())
    throw InternalError("page reply for page " + std::to_string(key.page) +
                        " has no inflight entry");
  out = std::move(it->second);
  page_.erase(it);
  return out;
}

std::vector<DemandId> InflightState::line_waiters_of_page(PageId page) const {
  std::vector<DemandId> out;
  if (!sub_lines_per_page_.count(page)) return out;
  for (LineIndex l = 0; l < lines_per_page_; ++l) {
    auto it = sub_.find(line_slot(page, l));
    if (it != sub_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

bool InflightState::contains(const InflightKey& key) const {
  if (key.level == InflightLevel::Line) return sub_.count(line_slot(key.page, key.line)) != 0;
  return page_.count(key.page) != 0;
}

std::size_t InflightState::occupancy(InflightLevel level) const {
  return level == InflightLevel::Line ? sub_.size() : page_.size();
}

std::size_t InflightState::capacity(InflightLevel level) const {
  return level == InflightLevel::Line ? sub_capacity_ : page_capacity_;
}

double InflightState::utilization(InflightLevel level) const {
  const auto cap = capacity(level);
  if (cap == kUnbounded) return 0.0;
  return static_cast<double>(occupancy(level)) / static_cast<double>(cap);
}

// ---------------------------------------------------------------------------
// Selection and compression

Granularity select_granularity(double sub_util, double page_util, double threshold_lo,
                               double threshold_hi, SelectionVariant variant) {
  if (variant == SelectionVariant::LowThreshold) {
    return (sub_util <= threshold_lo && page_util <= threshold_lo) ? Granularity::Both
                                                                   : Granularity::LineOnly;
  }
  if (page_util >= threshold_hi) return Granularity::LineOnly;
  if (sub_util >= threshold_hi) return Granularity::PageOnly;
  return Granularity::Both;
}

PagePayload compress_page_payload(PageId page, const CompressibilityMap* cmap,
                                  const SimConfig& cfg) {
  if (!cfg.compression_enabled) return {cfg.page_size_bytes, 0.0};
  if (cmap == nullptr) throw Error("compression enabled but no compressibility map supplied");
  const double ratio = cmap->ratio(page);
  const auto bytes = static_cast<std::uint32_t>(
      std::ceil(static_cast<double>(cfg.page_size_bytes) / ratio));
  return {bytes, cfg.comp_latency_ns};
}

// ---------------------------------------------------------------------------
// Policy base

Policy::Policy(PolicyHost& host, const CompressibilityMap* cmap, std::size_t sub_capacity,
               std::size_t page_capacity)
    : host_(host),
      cmap_(cmap),
      inflight_(sub_capacity, page_capacity, host.config().lines_per_page()) {}

void Policy::send_request(PacketKind kind, const Demand& d) {
  const auto& cfg = host_.config();
  Packet pkt;
  pkt.kind = kind;
  pkt.page_id = d.page;
  pkt.line_in_page = d.line;
  pkt.payload_bytes = 0;
  pkt.header_bytes = cfg.header_bytes;
  pkt.src = kComputeComponent;
  pkt.dst = mc_component(page_to_mc(d.page, cfg.num_mcs));
  pkt.job_id = d.core;
  host_.send_to_mc(pkt, host_.now());
}

void Policy::complete_local_hit(DemandId id) {
  host_.stats().local_hits += 1;
  host_.complete(id, host_.now() + host_.config().local_mem_latency_ns, ServedBy::LocalMem);
}

void Policy::handle_llc_victim(const Victim& v) {
  auto& st = host_.stats();
  st.llc_evictions += 1;
  if (!v.dirty) return;
  if (host_.local_cache().mark_dirty(v.page_id))
    st.llc_writebacks_absorbed += 1;
  else
    st.llc_writebacks_dropped += 1;
}

PagePayload Policy::page_reply_payload(PageId) const {
  return {host_.config().page_size_bytes, 0.0};
}

std::vector<DemandOutcome> Policy::handle_line_reply(const Packet& pkt) {
  const TimeNs now = host_.now();
  if (auto victim = host_.llc().fill(pkt.page_id, pkt.line_in_page, false))
    handle_llc_victim(*victim);

  std::vector<DemandOutcome> done;
  for (DemandId w : inflight_.take(InflightKey::line_key(pkt.page_id, pkt.line_in_page))) {
    if (host_.demand(w).completed) continue;
    host_.complete(w, now, ServedBy::LineReply);
    done.push_back({w, now, ServedBy::LineReply});
  }
  retry_stalled();
  return done;
}

std::vector<DemandOutcome> Policy::handle_page_install(const Packet& pkt) {
  const TimeNs now = host_.now();
  const auto& cfg = host_.config();
  auto& st = host_.stats();

  auto waiters = inflight_.take(InflightKey::page_key(pkt.page_id));

  if (auto victim = host_.local_cache().insert(pkt.page_id, false)) {
    st.page_evictions += 1;
    if (victim->dirty) {
      st.page_writebacks += 1;
      const PagePayload wb = page_reply_payload(victim->page_id);
      Packet out;
      out.kind = PacketKind::PageWriteback;
      out.page_id = victim->page_id;
      out.payload_bytes = wb.payload_bytes;
      out.header_bytes = cfg.header_bytes;
      out.src = kComputeComponent;
      out.dst = mc_component(page_to_mc(victim->page_id, cfg.num_mcs));
      out.job_id = pkt.job_id;
      host_.send_to_mc(out, now + wb.added_latency_ns);
    }
  }

  std::vector<DemandOutcome> done;
  auto finish = [&](DemandId w) {
    if (host_.demand(w).completed) return;
    host_.complete(w, now, ServedBy::PageReply);
    done.push_back({w, now, ServedBy::PageReply});
  };
  for (DemandId w : waiters) finish(w);
  for (DemandId w : inflight_.line_waiters_of_page(pkt.page_id)) finish(w);

  retry_stalled();
  return done;
}

void Policy::retry_stalled() {
  for (std::size_t n = stalled_.size(); n > 0; --n) {
    DemandId id = stalled_.front();
    stalled_.pop_front();
    if (!retry_demand(id)) stalled_.push_back(id);
  }
}

// ---------------------------------------------------------------------------
// Schemes

namespace {

constexpr auto kUnbounded = InflightState::kUnbounded;

/// Monolithic reference: every LLC miss is a local-memory access.
class LocalPolicy final : public Policy {
 public:
  LocalPolicy(PolicyHost& host, const CompressibilityMap* cmap)
      : Policy(host, cmap, kUnbounded, kUnbounded) {}

  Scheme scheme() const override { return Scheme::Local; }

  void handle_demand(DemandId id) override {
    host_.stats().local_hits += 1;
    host_.complete(id, host_.now() + host_.config().local_mem_latency_ns, ServedBy::LocalMem);
  }

  void handle_llc_victim(const Victim& v) override {
    host_.stats().llc_evictions += 1;
    if (v.dirty) host_.stats().llc_writebacks_absorbed += 1;
  }
};

/// Page granularity via local memory. PageFree is the same policy with page
/// transfers riding the link for free.
class PagePolicy final : public Policy {
 public:
  PagePolicy(PolicyHost& host, const CompressibilityMap* cmap, bool free_ride)
      : Policy(host, cmap, kUnbounded, kUnbounded), free_ride_(free_ride) {}

  Scheme scheme() const override { return free_ride_ ? Scheme::PageFree : Scheme::Page; }
  bool page_free_ride() const override { return free_ride_; }

  void handle_demand(DemandId id) override {
    const Demand& d = host_.demand(id);
    if (host_.local_cache().lookup(d.page, true) == Presence::Present) {
      complete_local_hit(id);
      return;
    }
    host_.stats().local_misses += 1;
    if (inflight_.coalesce_or_issue(InflightKey::page_key(d.page), id) == CoalesceResult::Issued)
      send_request(PacketKind::PageRequest, d);
  }

 private:
  bool free_ride_;
};

/// Line granularity straight into the LLC; local memory is bypassed.
class CacheLinePolicy final : public Policy {
 public:
  CacheLinePolicy(PolicyHost& host, const CompressibilityMap* cmap)
      : Policy(host, cmap, kUnbounded, kUnbounded) {}

  Scheme scheme() const override { return Scheme::CacheLine; }

  void handle_demand(DemandId id) override {
    const Demand& d = host_.demand(id);
    if (inflight_.coalesce_or_issue(InflightKey::line_key(d.page, d.line), id) ==
        CoalesceResult::Issued)
      send_request(PacketKind::LineRequest, d);
  }
};

/// Both granularities on one shared FIFO; the demand completes on whichever
/// reply lands first.
class CacheLinePagePolicy final : public Policy {
 public:
  CacheLinePagePolicy(PolicyHost& host, const CompressibilityMap* cmap)
      : Policy(host, cmap, kUnbounded, kUnbounded) {}

  Scheme scheme() const override { return Scheme::CacheLinePage; }

  void handle_demand(DemandId id) override {
    const Demand& d = host_.demand(id);
    if (host_.local_cache().lookup(d.page, true) == Presence::Present) {
      complete_local_hit(id);
      return;
    }
    host_.stats().local_misses += 1;
    if (inflight_.coalesce_or_issue(InflightKey::line_key(d.page, d.line), id) ==
        CoalesceResult::Issued)
      send_request(PacketKind::LineRequest, d);
    if (inflight_.coalesce_or_issue(InflightKey::page_key(d.page), id) == CoalesceResult::Issued)
      send_request(PacketKind::PageRequest, d);
  }
};

class DaemonPolicy final : public Policy {
 public:
  DaemonPolicy(PolicyHost& host, const CompressibilityMap* cmap)
      : Policy(host, cmap, host.config().daemon_sub_capacity,
               host.config().daemon_page_capacity) {}

  Scheme scheme() const override { return Scheme::DaeMon; }
  bool partitioned_link() const override { return !host_.config().daemon_single_channel; }

  PagePayload page_reply_payload(PageId page) const override {
    return compress_page_payload(page, cmap_, host_.config());
  }

  TimeNs page_decompress_latency() const override {
    const auto& cfg = host_.config();
    return cfg.compression_enabled ? cfg.decomp_latency_ns : 0.0;
  }

  void handle_demand(DemandId id) override {
    const Demand& d = host_.demand(id);
    if (host_.local_cache().lookup(d.page, true) == Presence::Present) {
      complete_local_hit(id);
      return;
    }
    host_.stats().local_misses += 1;
    if (!try_remote(id)) {
      host_.stats().stalls += 1;
      stall(id);
    }
  }

 protected:
  bool retry_demand(DemandId id) override {
    const Demand& d = host_.demand(id);
    if (host_.llc().contains(d.page, d.line)) {
      host_.complete(id, host_.now(), ServedBy::Llc);
      return true;
    }
    if (host_.local_cache().lookup(d.page, true) == Presence::Present) {
      complete_local_hit(id);
      return true;
    }
    return try_remote(id);
  }

 private:
  Granularity decide() {
    const auto& cfg = host_.config();
    auto& st = host_.stats();
    const auto sub_occ = inflight_.occupancy(InflightLevel::Line);
    const auto page_occ = inflight_.occupancy(InflightLevel::Page);
    if (st.sub_occupancy_hist.empty()) {
      st.sub_occupancy_hist.assign(cfg.daemon_sub_capacity + 1, 0);
      st.page_occupancy_hist.assign(cfg.daemon_page_capacity + 1, 0);
    }
    st.sub_occupancy_hist[sub_occ] += 1;
    st.page_occupancy_hist[page_occ] += 1;

    const Granularity g =
        cfg.daemon_forced_decision
            ? *cfg.daemon_forced_decision
            : select_granularity(inflight_.utilization(InflightLevel::Line),
                                 inflight_.utilization(InflightLevel::Page),
                                 cfg.daemon_threshold_lo, cfg.daemon_threshold_hi,
                                 cfg.daemon_selection_variant);
    st.decisions[static_cast<int>(g)] += 1;
    return g;
  }

  // Returns false when nothing could be issued or attached (backpressure).
  bool try_remote(DemandId id) {
    const Demand& d = host_.demand(id);
    const auto line_key = InflightKey::line_key(d.page, d.line);
    const auto page_key = InflightKey::page_key(d.page);
    const Granularity decision = decide();

    const bool line_inflight = inflight_.contains(line_key);
    const bool page_inflight = inflight_.contains(page_key);
    bool want_line = decision != Granularity::PageOnly;
    bool want_page = decision != Granularity::LineOnly;

    // The page is already on its way: ride it, and optionally race the
    // critical line ahead of it.
    if (page_inflight) {
      want_page = false;
      if (!host_.config().critical_line_on_inflight_page) want_line = false;
    }
    if (line_inflight) want_line = false;

    const bool line_space = inflight_.has_space(InflightLevel::Line);
    const bool page_space = inflight_.has_space(InflightLevel::Page);
    if (want_line && !line_space) want_line = false;  // Both degrades to page
    if (want_page && !page_space) want_page = false;  // Both degrades to line

    if (!(line_inflight || page_inflight || want_line || want_page)) return false;

    // Line before page, matching the shared-FIFO baseline's issue order.
    if (line_inflight || want_line) {
      if (inflight_.coalesce_or_issue(line_key, id) == CoalesceResult::Issued)
        send_request(PacketKind::LineRequest, d);
    }
    if (page_inflight || want_page) {
      if (inflight_.coalesce_or_issue(page_key, id) == CoalesceResult::Issued)
        send_request(PacketKind::PageRequest, d);
    }
    return true;
  }
};

}  // namespace

std::unique_ptr<Policy> make_policy(Scheme scheme, PolicyHost& host,
                                    const CompressibilityMap* cmap) {
  switch (scheme) {
    case Scheme::Local: return std::make_unique<LocalPolicy>(host, cmap);
    case Scheme::Page: return std::make_unique<PagePolicy>(host, cmap, false);
    case Scheme::PageFree: return std::make_unique<PagePolicy>(host, cmap, true);
    case Scheme::CacheLine: return std::make_unique<CacheLinePolicy>(host, cmap);
    case Scheme::CacheLinePage: return std::make_unique<CacheLinePagePolicy>(host, cmap);
    case Scheme::DaeMon: return std::make_unique<DaemonPolicy>(host, cmap);
  }
  throw Error("unknown scheme");
}

}  // namespace dsim
