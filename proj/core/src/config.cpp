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

#include "dsim/config.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "config_json.hpp"

namespace dsim {

namespace {

using nlohmann::json;

struct SchemeName {
  Scheme scheme;
  std::string_view name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::Local, "local"},
    {Scheme::Page, "page"},
    {Scheme::PageFree, "page_free"},
    {Scheme::CacheLine, "cache_line"},
    {Scheme::CacheLinePage, "cache_line_page"},
    {Scheme::DaeMon, "daemon"},
};

[[noreturn]] void reject(std::string_view field, std::string_view constraint) {
  throw Error("config: " + std::string(field) + ": " + std::string(constraint));
}

template <typename T>
T get_as(const json& value, std::string_view key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    reject(key, "wrong value type");
  }
}

std::uint64_t get_count(const json& value, std::string_view key) {
  if (!value.is_number_integer()) reject(key, "expected a non-negative integer");
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  auto v = value.get<std::int64_t>();
  if (v < 0) reject(key, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::uint32_t get_u32(const json& value, std::string_view key) {
  auto v = get_count(value, key);
  if (v > UINT32_MAX) reject(key, "value out of range");
  return static_cast<std::uint32_t>(v);
}

double get_double(const json& value, std::string_view key) {
  if (!value.is_number()) reject(key, "expected a number");
  return value.get<double>();
}

std::pair<json, json> get_pair(const json& value, std::string_view key) {
  if (!value.is_array() || value.size() != 2) reject(key, "expected a two-element array");
  return {value[0], value[1]};
}

bool is_pow2(std::uint64_t v) { return v != 0 && std::has_single_bit(v); }

}  // namespace

std::string_view to_string(Scheme s) {
  for (const auto& e : kSchemeNames)
    if (e.scheme == s) return e.name;
  return "?";
}

Scheme scheme_from_string(std::string_view name) {
  for (const auto& e : kSchemeNames)
    if (e.name == name) return e.scheme;
  throw Error("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::LineOnly: return "line_only";
    case Granularity::PageOnly: return "page_only";
    case Granularity::Both: return "both";
  }
  return "?";
}

Granularity granularity_from_string(std::string_view name) {
  if (name == "line_only") return Granularity::LineOnly;
  if (name == "page_only") return Granularity::PageOnly;
  if (name == "both") return Granularity::Both;
  throw Error("unknown granularity '" + std::string(name) + "'");
}

std::uint64_t SimConfig::local_capacity_pages() const {
  auto cap = static_cast<std::uint64_t>(
      std::ceil(local_mem_fraction * static_cast<double>(footprint_pages)));
  return cap == 0 ? 1 : cap;
}

void SimConfig::validate() const {
  if (!is_pow2(line_size_bytes)) reject("line_size_bytes", "not a power of two");
  if (!is_pow2(page_size_bytes) || page_size_bytes % line_size_bytes != 0)
    reject("page_size_bytes", "not a power of two / not divisible by line size");
  if (footprint_pages < 1) reject("footprint_pages", "must be >= 1");
  if (!(local_mem_fraction > 0.0 && local_mem_fraction <= 1.0))
    reject("local_mem_fraction", "must be in (0, 1]");
  if (llc_capacity_lines < 1) reject("llc_capacity_lines", "must be >= 1");
  if (llc_associativity < 1) reject("llc_associativity", "must be >= 1");
  if (llc_capacity_lines % llc_associativity != 0)
    reject("llc_capacity_lines", "must be a multiple of llc_associativity");
  if (num_cores < 1) reject("num_cores", "must be >= 1");
  if (num_mcs < 1) reject("num_mcs", "must be >= 1");
  if (!(bus_bandwidth_bytes_per_ns > 0.0) || !std::isfinite(bus_bandwidth_bytes_per_ns))
    reject("bus_bandwidth_bytes_per_ns", "must be > 0");
  if (!(net_bandwidth_factor >= 1.0) || !std::isfinite(net_bandwidth_factor))
    reject("net_bandwidth_factor", "must be >= 1 (network never faster than bus)");
  const std::pair<const char*, double> latencies[] = {
      {"net_latency_ns", net_latency_ns},         {"local_mem_latency_ns", local_mem_latency_ns},
      {"llc_hit_latency_ns", llc_hit_latency_ns}, {"mc_dram_latency_ns", mc_dram_latency_ns},
      {"comp_latency_ns", comp_latency_ns},       {"decomp_latency_ns", decomp_latency_ns},
  };
  for (const auto& [name, v] : latencies)
    if (!(v >= 0.0) || !std::isfinite(v)) reject(name, "must be >= 0");
  if (daemon_weight_sub < 1 || daemon_weight_page < 1)
    reject("daemon_weights", "weights must be positive integers");
  if (daemon_sub_capacity < 1 || daemon_page_capacity < 1)
    reject("daemon_buffer_capacity", "capacities must be >= 1");
  if (!(daemon_threshold_lo > 0.0 && daemon_threshold_lo < 1.0) ||
      !(daemon_threshold_hi > 0.0 && daemon_threshold_hi < 1.0))
    reject("daemon_thresholds", "both thresholds must be in (0, 1)");
  if (!(daemon_threshold_lo < daemon_threshold_hi))
    reject("daemon_thresholds", "lo must be < hi");
  if (max_outstanding_per_core < 1) reject("max_outstanding_per_core", "must be >= 1");
}

namespace detail {

void apply_config_json(const json& doc, SimConfig& c) {
  if (!doc.is_object()) throw Error("config: document must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "line_size_bytes") c.line_size_bytes = get_u32(v, key);
    else if (key == "page_size_bytes") c.page_size_bytes = get_u32(v, key);
    else if (key == "footprint_pages") c.footprint_pages = get_count(v, key);
    else if (key == "local_mem_fraction") c.local_mem_fraction = get_double(v, key);
    else if (key == "llc_capacity_lines") c.llc_capacity_lines = get_count(v, key);
    else if (key == "llc_associativity") c.llc_associativity = get_u32(v, key);
    else if (key == "num_cores") c.num_cores = get_u32(v, key);
    else if (key == "num_mcs") c.num_mcs = get_u32(v, key);
    else if (key == "bus_bandwidth_bytes_per_ns") c.bus_bandwidth_bytes_per_ns = get_double(v, key);
    else if (key == "net_bandwidth_factor") c.net_bandwidth_factor = get_double(v, key);
    else if (key == "net_latency_ns") c.net_latency_ns = get_double(v, key);
    else if (key == "local_mem_latency_ns") c.local_mem_latency_ns = get_double(v, key);
    else if (key == "llc_hit_latency_ns") c.llc_hit_latency_ns = get_double(v, key);
    else if (key == "mc_dram_latency_ns") c.mc_dram_latency_ns = get_double(v, key);
    else if (key == "header_bytes") c.header_bytes = get_u32(v, key);
    else if (key == "link_segment_bytes") c.link_segment_bytes = get_u32(v, key);
    else if (key == "scheme") c.scheme = scheme_from_string(get_as<std::string>(v, key));
    else if (key == "daemon_weights") {
      auto [s, p] = get_pair(v, key);
      c.daemon_weight_sub = get_u32(s, key);
      c.daemon_weight_page = get_u32(p, key);
    } else if (key == "daemon_buffer_capacity") {
      auto [s, p] = get_pair(v, key);
      c.daemon_sub_capacity = get_u32(s, key);
      c.daemon_page_capacity = get_u32(p, key);
    } else if (key == "daemon_thresholds") {
      auto [lo, hi] = get_pair(v, key);
      c.daemon_threshold_lo = get_double(lo, key);
      c.daemon_threshold_hi = get_double(hi, key);
    } else if (key == "daemon_selection_variant") {
      auto name = get_as<std::string>(v, key);
      if (name == "table") c.daemon_selection_variant = SelectionVariant::Table;
      else if (name == "low_threshold") c.daemon_selection_variant = SelectionVariant::LowThreshold;
      else reject(key, "expected \"table\" or \"low_threshold\"");
    } else if (key == "daemon_forced_decision") {
      if (v.is_null()) c.daemon_forced_decision.reset();
      else c.daemon_forced_decision = granularity_from_string(get_as<std::string>(v, key));
    } else if (key == "daemon_single_channel") c.daemon_single_channel = get_as<bool>(v, key);
    else if (key == "critical_line_on_inflight_page") c.critical_line_on_inflight_page = get_as<bool>(v, key);
    else if (key == "compression_enabled") c.compression_enabled = get_as<bool>(v, key);
    else if (key == "comp_latency_ns") c.comp_latency_ns = get_double(v, key);
    else if (key == "decomp_latency_ns") c.decomp_latency_ns = get_double(v, key);
    else if (key == "max_outstanding_per_core") c.max_outstanding_per_core = get_u32(v, key);
    else if (key == "seed") c.seed = get_count(v, key);
    else throw Error("config: unknown key '" + key + "'");
  }
}

json config_to_json(const SimConfig& c) {
  json j;
  j["line_size_bytes"] = c.line_size_bytes;
  j["page_size_bytes"] = c.page_size_bytes;
  j["footprint_pages"] = c.footprint_pages;
  j["local_mem_fraction"] = c.local_mem_fraction;
  j["llc_capacity_lines"] = c.llc_capacity_lines;
  j["llc_associativity"] = c.llc_associativity;
  j["num_cores"] = c.num_cores;
  j["num_mcs"] = c.num_mcs;
  j["bus_bandwidth_bytes_per_ns"] = c.bus_bandwidth_bytes_per_ns;
  j["net_bandwidth_factor"] = c.net_bandwidth_factor;
  j["net_latency_ns"] = c.net_latency_ns;
  j["local_mem_latency_ns"] = c.local_mem_latency_ns;
  j["llc_hit_latency_ns"] = c.llc_hit_latency_ns;
  j["mc_dram_latency_ns"] = c.mc_dram_latency_ns;
  j["header_bytes"] = c.header_bytes;
  j["link_segment_bytes"] = c.link_segment_bytes;
  j["scheme"] = std::string(to_string(c.scheme));
  j["daemon_weights"] = {c.daemon_weight_sub, c.daemon_weight_page};
  j["daemon_buffer_capacity"] = {c.daemon_sub_capacity, c.daemon_page_capacity};
  j["daemon_thresholds"] = {c.daemon_threshold_lo, c.daemon_threshold_hi};
  j["daemon_selection_variant"] =
      c.daemon_selection_variant == SelectionVariant::Table ? "table" : "low_threshold";
  if (c.daemon_forced_decision)
    j["daemon_forced_decision"] = std::string(to_string(*c.daemon_forced_decision));
  else
    j["daemon_forced_decision"] = nullptr;
  j["daemon_single_channel"] = c.daemon_single_channel;
  j["critical_line_on_inflight_page"] = c.critical_line_on_inflight_page;
  j["compression_enabled"] = c.compression_enabled;
  j["comp_latency_ns"] = c.comp_latency_ns;
  j["decomp_latency_ns"] = c.decomp_latency_ns;
  j["max_outstanding_per_core"] = c.max_outstanding_per_core;
  j["seed"] = c.seed;
  return j;
}

}  // namespace detail

SimConfig parse_config(std::string_view text) {
  json doc;
  std::string_view trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
    trimmed.remove_prefix(1);
  if (trimmed.empty()) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(std::string("config: malformed document: ") + e.what());
    }
  }
  SimConfig cfg;
  detail::apply_config_json(doc, cfg);
  cfg.validate();
  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string serialize_config(const SimConfig& cfg) { return detail::config_to_json(cfg).dump(2); }

bool operator==(const SimConfig& a, const SimConfig& b) {
  return detail::config_to_json(a) == detail::config_to_json(b);
}

AddressParts addr_decompose(Addr addr, const SimConfig& cfg) {
  AddressParts p;
  p.page_id = addr / cfg.page_size_bytes;
  p.line_in_page = static_cast<LineIndex>((addr % cfg.page_size_bytes) / cfg.line_size_bytes);
  p.offset_in_line = static_cast<std::uint32_t>(addr % cfg.line_size_bytes);
  return p;
}

Addr addr_compose(const AddressParts& parts, const SimConfig& cfg) {
  return parts.page_id * cfg.page_size_bytes +
         static_cast<Addr>(parts.line_in_page) * cfg.line_size_bytes + parts.offset_in_line;
}

}  // namespace dsim
