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

#include "dsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "dsim/hierarchy.hpp"
#include "dsim/policy.hpp"

namespace dsim {

std::string_view to_string(ServedBy s) {
  switch (s) {
    case ServedBy::Llc: return "llc";
    case ServedBy::LocalMem: return "local_mem";
    case ServedBy::LineReply: return "line_reply";
    case ServedBy::PageReply: return "page_reply";
  }
  return "?";
}

std::uint64_t RunStats::total_accesses() const {
  std::uint64_t n = 0;
  for (const auto& c : cores) n += c.accesses;
  return n;
}

std::uint64_t RunStats::total_completed() const {
  std::uint64_t n = 0;
  for (const auto& c : cores) n += c.completed;
  return n;
}

double RunStats::total_mem_stall_ns() const {
  double s = 0.0;
  for (const auto& c : cores) s += c.total_mem_stall_ns;
  return s;
}

double RunStats::total_access_latency_ns() const {
  double s = 0.0;
  for (const auto& c : cores) s += c.total_access_latency_ns;
  return s;
}

double slowdown(double elapsed_ns, double baseline_elapsed_ns) {
  if (baseline_elapsed_ns == 0.0) {
    if (elapsed_ns == 0.0) return 1.0;
    throw Error("slowdown: baseline elapsed time is 0");
  }
  return elapsed_ns / baseline_elapsed_ns;
}

double slowdown(const RunStats& stats, const RunStats& baseline) {
  return slowdown(stats.elapsed_ns, baseline.elapsed_ns);
}

double geomean(std::span<const double> ratios) {
  if (ratios.empty()) throw Error("geomean: empty input");
  double log_sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw Error("geomean: ratios must be > 0");
    log_sum += std::log(r);
  }
  return std::exp(log_sum / static_cast<double>(ratios.size()));
}

namespace {

enum class EventKind : std::uint8_t {
  CoreIssue,    // index = core
  MissStart,    // demand
  DemandDone,   // demand
  LinkIdle,     // index = link
  Enqueue,      // index = link, pkt
  Delivered,    // pkt
  PageInstall,  // pkt
};

struct Event {
  TimeNs time;
  std::uint64_t seq;
  EventKind kind;
  std::uint32_t index;
  DemandId demand;
  Packet pkt;
};

struct LaterFirst {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct CoreState {
  const AccessTrace* trace = nullptr;
  std::size_t next = 0;
  std::uint32_t outstanding = 0;
  TimeNs ready_ns = 0.0;       // earliest issue time of `next`
  TimeNs last_issue_ns = 0.0;
  bool waiting_for_slot = false;
};

class Simulator final : public PolicyHost {
 public:
  Simulator(const SimConfig& cfg, std::span<const AccessTrace> traces,
            const CompressibilityMap* cmap, const RunOptions& options)
      : cfg_(cfg),
        options_(options),
        llc_(cfg.llc_capacity_lines, cfg.llc_associativity, cfg.lines_per_page()),
        local_(cfg.local_capacity_pages()),
        cores_(traces.size()) {
    policy_ = make_policy(cfg.scheme, *this, cmap);

    LinkState::Params lp;
    lp.bandwidth_bytes_per_ns = cfg.net_bandwidth_bytes_per_ns();
    lp.latency_ns = cfg.net_latency_ns;
    lp.partitioned = policy_->partitioned_link();
    lp.weight_sub = cfg.daemon_weight_sub;
    lp.weight_page = cfg.daemon_weight_page;
    lp.quantum_unit_bytes = std::uint64_t{cfg.line_size_bytes} + cfg.header_bytes;
    lp.segment_bytes = cfg.link_segment_bytes;
    links_.reserve(2 * cfg.num_mcs);
    for (std::uint32_t i = 0; i < 2 * cfg.num_mcs; ++i) links_.emplace_back(lp);
    kick_pending_.assign(links_.size(), false);

    stats_.cores.resize(traces.size());
    std::size_t total = 0;
    for (std::size_t c = 0; c < traces.size(); ++c) {
      cores_[c].trace = &traces[c];
      stats_.cores[c].accesses = traces[c].size();
      total += traces[c].size();
    }
    demands_.reserve(total);
    if (options_.record_completions) {
      completions_.resize(traces.size());
      for (std::size_t c = 0; c < traces.size(); ++c)
        completions_[c].assign(traces[c].size(), 0.0);
    }
  }

  RunOutput run() {
    for (std::uint32_t c = 0; c < cores_.size(); ++c) {
      auto& core = cores_[c];
      if (core.trace->empty()) continue;
      core.ready_ns = static_cast<double>(core.trace->records[0].think_ns);
      schedule(core.ready_ns, EventKind::CoreIssue, c);
    }

    while (!events_.empty()) {
      Event e = events_.top();
      events_.pop();
      if (e.time < now_) throw InternalError("event scheduled in the past");
      now_ = e.time;
      dispatch(e);
    }

    for (std::size_t c = 0; c < cores_.size(); ++c) {
      auto& cs = stats_.cores[c];
      if (cs.completed != cs.accesses)
        throw InternalError("simulation ended with incomplete accesses on core " +
                            std::to_string(c));
      if (cs.accesses > 0) cs.total_mem_stall_ns += cs.elapsed_ns - cores_[c].last_issue_ns;
      stats_.elapsed_ns = std::max(stats_.elapsed_ns, cs.elapsed_ns);
    }
    for (const auto& link : links_) {
      const auto& h = link.occupancy_histogram();
      for (std::size_t i = 0; i < h.size(); ++i) stats_.link_queue_hist[i] += h[i];
    }

    RunOutput out;
    out.stats = std::move(stats_);
    out.completion_ns = std::move(completions_);
    out.grant_log = std::move(grants_);
    return out;
  }

  // PolicyHost
  TimeNs now() const override { return now_; }
  const SimConfig& config() const override { return cfg_; }
  Llc& llc() override { return llc_; }
  LocalPageCache& local_cache() override { return local_; }
  RunStats& stats() override { return stats_; }
  Demand& demand(DemandId id) override { return demands_.at(id); }

  void send_to_mc(Packet pkt, TimeNs at) override {
    transmit(link_index(page_to_mc(pkt.page_id, cfg_.num_mcs), false), pkt, at);
  }

  void complete(DemandId id, TimeNs at, ServedBy by) override {
    Demand& d = demands_.at(id);
    if (d.completed) throw InternalError("demand completed twice");
    d.completed = true;
    d.completion_ns = at;
    d.served_by = by;
    stats_.served_by[static_cast<int>(by)] += 1;
    Event e{};
    e.kind = EventKind::DemandDone;
    e.demand = id;
    push(at, e);
  }

 private:
  static std::size_t link_index(McIndex mc, bool to_cc) { return 2 * std::size_t{mc} + to_cc; }

  void push(TimeNs at, Event e) {
    e.time = at;
    e.seq = next_seq_++;
    events_.push(std::move(e));
  }

  void schedule(TimeNs at, EventKind kind, std::uint32_t index, DemandId demand = 0) {
    Event e{};
    e.kind = kind;
    e.index = index;
    e.demand = demand;
    push(at, e);
  }

  void schedule_packet(TimeNs at, EventKind kind, std::uint32_t index, const Packet& pkt) {
    Event e{};
    e.kind = kind;
    e.index = index;
    e.pkt = pkt;
    push(at, e);
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::CoreIssue: on_core_issue(e.index); break;
      case EventKind::MissStart: policy_->handle_demand(e.demand); break;
      case EventKind::DemandDone: on_demand_done(e.demand); break;
      case EventKind::LinkIdle: on_link_idle(e.index); break;
      case EventKind::Enqueue: enqueue_now(e.index, e.pkt); break;
      case EventKind::Delivered: on_delivered(e.pkt); break;
      case EventKind::PageInstall: policy_->handle_page_install(e.pkt); break;
    }
  }

  void on_core_issue(std::uint32_t c) {
    auto& core = cores_[c];
    auto& cs = stats_.cores[c];
    const AccessRecord& rec = core.trace->records[core.next];
    if (rec.addr >= cfg_.footprint_bytes())
      throw Error("core " + std::to_string(c) + " access " + std::to_string(core.next) +
                  ": address " + std::to_string(rec.addr) + " outside footprint");

    cs.total_mem_stall_ns += now_ - core.ready_ns;
    core.last_issue_ns = now_;

    const AddressParts parts = addr_decompose(rec.addr, cfg_);
    const DemandId id = demands_.size();
    Demand d;
    d.core = c;
    d.index = core.next;
    d.page = parts.page_id;
    d.line = parts.line_in_page;
    d.is_write = rec.is_write;
    d.issue_ns = now_;
    demands_.push_back(d);
    core.outstanding += 1;
    core.next += 1;

    if (llc_.access(d.page, d.line, d.is_write) == LlcResult::Hit) {
      stats_.llc_hits += 1;
      complete(id, now_ + cfg_.llc_hit_latency_ns, ServedBy::Llc);
    } else {
      stats_.llc_misses += 1;
      schedule(now_ + cfg_.llc_hit_latency_ns, EventKind::MissStart, c, id);
    }

    if (core.next < core.trace->size()) {
      core.ready_ns = now_ + static_cast<double>(core.trace->records[core.next].think_ns);
      if (core.outstanding < cfg_.max_outstanding_per_core)
        schedule(core.ready_ns, EventKind::CoreIssue, c);
      else
        core.waiting_for_slot = true;
    }
  }

  void on_demand_done(DemandId id) {
    const Demand& d = demands_[id];
    auto& core = cores_[d.core];
    auto& cs = stats_.cores[d.core];
    core.outstanding -= 1;
    cs.completed += 1;
    cs.total_access_latency_ns += now_ - d.issue_ns;
    cs.elapsed_ns = std::max(cs.elapsed_ns, now_);
    if (options_.record_completions) completions_[d.core][d.index] = now_;

    if (auto victim = llc_.fill(d.page, d.line, d.is_write)) policy_->handle_llc_victim(*victim);

    if (core.waiting_for_slot) {
      core.waiting_for_slot = false;
      schedule(std::max(now_, core.ready_ns), EventKind::CoreIssue, d.core);
    }
  }

  void transmit(std::size_t link, const Packet& pkt, TimeNs at) {
    if (at > now_)
      schedule_packet(at, EventKind::Enqueue, static_cast<std::uint32_t>(link), pkt);
    else
      enqueue_now(link, pkt);
  }

  void enqueue_now(std::size_t link, Packet pkt) {
    pkt.enqueue_time_ns = now_;
    if (policy_->page_free_ride() && channel_for(pkt.kind) == ChannelName::Page) {
      stats_.free_ride_bytes += pkt.total_bytes();
      stats_.packets[static_cast<int>(pkt.kind)] += 1;
      schedule_packet(now_ + transfer_duration(pkt.total_bytes(), cfg_, true),
                      EventKind::Delivered, 0, pkt);
      return;
    }
    links_[link].enqueue(channel_for(pkt.kind), pkt, now_);
    kick(link);
  }

  void kick(std::size_t link) {
    if (kick_pending_[link]) return;
    kick_pending_[link] = true;
    schedule(std::max(now_, links_[link].busy_until()), EventKind::LinkIdle,
             static_cast<std::uint32_t>(link));
  }

  void on_link_idle(std::uint32_t idx) {
    kick_pending_[idx] = false;
    auto& link = links_[idx];
    auto g = link.arbitrate(now_);
    if (!g) return;
    const Packet& pkt = g->packet;
    const auto ch = static_cast<int>(channel_for(pkt.kind));
    stats_.network_bytes[ch] += g->bytes;
    if (options_.record_grants) grants_.push_back(Grant{now_, channel_for(pkt.kind), pkt.kind, g->bytes});
    if (g->last) {
      stats_.network_payload_bytes[ch] += pkt.payload_bytes;
      stats_.packets[static_cast<int>(pkt.kind)] += 1;
      schedule_packet(link.busy_until() + link.latency(), EventKind::Delivered, idx, pkt);
    }
    if (link.has_pending()) kick(idx);
  }

  void on_delivered(const Packet& pkt) {
    if (pkt.dst == kComputeComponent) {
      if (pkt.kind == PacketKind::LineReply) {
        policy_->handle_line_reply(pkt);
      } else if (pkt.kind == PacketKind::PageReply) {
        schedule_packet(now_ + policy_->page_decompress_latency(), EventKind::PageInstall, 0,
                        pkt);
      } else {
        throw InternalError("request packet delivered to the compute component");
      }
      return;
    }

    const McIndex mc = pkt.dst - 1;
    Packet reply;
    reply.page_id = pkt.page_id;
    reply.line_in_page = pkt.line_in_page;
    reply.header_bytes = cfg_.header_bytes;
    reply.src = pkt.dst;
    reply.dst = kComputeComponent;
    reply.job_id = pkt.job_id;
    switch (pkt.kind) {
      case PacketKind::LineRequest: {
        reply.kind = PacketKind::LineReply;
        reply.payload_bytes = cfg_.line_size_bytes;
        transmit(link_index(mc, true), reply,
                 now_ + mc_service_time(McRequestKind::Line, cfg_));
        break;
      }
      case PacketKind::PageRequest: {
        const PagePayload payload = policy_->page_reply_payload(pkt.page_id);
        reply.kind = PacketKind::PageReply;
        reply.payload_bytes = payload.payload_bytes;
        transmit(link_index(mc, true), reply,
                 now_ + mc_service_time(McRequestKind::Page, cfg_) + payload.added_latency_ns);
        break;
      }
      case PacketKind::PageWriteback: break;  // absorbed by the MC
      default: throw InternalError("reply packet delivered to a memory component");
    }
  }

  const SimConfig& cfg_;
  RunOptions options_;
  Llc llc_;
  LocalPageCache local_;
  std::unique_ptr<Policy> policy_;
  std::vector<LinkState> links_;
  std::vector<bool> kick_pending_;
  std::vector<CoreState> cores_;
  std::vector<Demand> demands_;
  RunStats stats_;
  std::vector<std::vector<TimeNs>> completions_;
  std::vector<Grant> grants_;

  std::priority_queue<Event, std::vector<Event>, LaterFirst> events_;
  std::uint64_t next_seq_ = 0;
  TimeNs now_ = 0.0;
};

void check_inputs(const SimConfig& cfg, std::span<const AccessTrace> traces,
                  const CompressibilityMap* cmap) {
  cfg.validate();
  if (traces.size() != cfg.num_cores)
    throw Error("run_simulation: got " + std::to_string(traces.size()) + " traces for " +
                std::to_string(cfg.num_cores) + " cores");
  if (cfg.scheme == Scheme::DaeMon && cfg.compression_enabled) {
    if (cmap == nullptr) throw Error("run_simulation: compression enabled without a map");
    if (cmap->size() < cfg.footprint_pages)
      throw Error("run_simulation: compressibility map covers " + std::to_string(cmap->size()) +
                  " of " + std::to_string(cfg.footprint_pages) + " pages");
  }
}

}  // namespace

RunOutput run_simulation_detailed(const SimConfig& cfg, std::span<const AccessTrace> traces,
                                  const CompressibilityMap* cmap, const RunOptions& options) {
  check_inputs(cfg, traces, cmap);
  Simulator sim(cfg, traces, cmap, options);
  return sim.run();
}

RunStats run_simulation(const SimConfig& cfg, std::span<const AccessTrace> traces,
                        const CompressibilityMap* cmap) {
  return run_simulation_detailed(cfg, traces, cmap, RunOptions{}).stats;
}

}  // namespace dsim
