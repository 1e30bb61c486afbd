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

#include "dsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "config_json.hpp"
#include "dsim/engine.hpp"

namespace dsim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void spec_error(const std::string& what) { throw Error("experiment spec: " + what); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      spec_error(where + ": unknown key '" + key + "'");
  }
}

WorkloadParams parse_params(const json& j, const std::string& where) {
  if (!j.is_object()) spec_error(where + ": params must be an object");
  check_keys(j,
             {"num_accesses", "spatial_locality", "zipf_alpha", "write_fraction",
              "think_ns_mean", "footprint_pages"},
             where + ".params");
  WorkloadParams p;
  try {
    if (j.contains("num_accesses")) p.num_accesses = j["num_accesses"].get<std::uint64_t>();
    if (j.contains("spatial_locality")) p.spatial_locality = j["spatial_locality"].get<double>();
    if (j.contains("zipf_alpha")) p.zipf_alpha = j["zipf_alpha"].get<double>();
    if (j.contains("write_fraction")) p.write_fraction = j["write_fraction"].get<double>();
    if (j.contains("think_ns_mean")) p.think_ns_mean = j["think_ns_mean"].get<double>();
    if (j.contains("footprint_pages"))
      p.footprint_pages = j["footprint_pages"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    spec_error(where + ".params: " + e.what());
  }
  p.validate();
  return p;
}

CompressibilityDist parse_dist(const json& j, const std::string& where) {
  if (j.is_object() && j.size() == 1 && j.contains("constant") && j["constant"].is_number())
    return CompressibilityDist::constant(j["constant"].get<double>());
  if (j.is_object() && j.size() == 1 && j.contains("uniform") && j["uniform"].is_array() &&
      j["uniform"].size() == 2)
    return CompressibilityDist::uniform(j["uniform"][0].get<double>(),
                                        j["uniform"][1].get<double>());
  spec_error(where + ": compressibility must be {\"constant\": c} or {\"uniform\": [lo, hi]}");
}

template <typename T>
std::vector<T> get_list(const json& j, const char* key) {
  if (!j.is_array() || j.empty()) spec_error(std::string(key) + " must be a non-empty array");
  try {
    return j.get<std::vector<T>>();
  } catch (const json::exception& e) {
    spec_error(std::string(key) + ": " + e.what());
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_time(double v) { return fmt("%.3f", v); }
std::string fmt_ratio(double v) { return fmt("%.6f", v); }
std::string fmt_factor(double v) { return fmt("%g", v); }

const WorkloadSpec& find_workload(const ExperimentSpec& spec, const std::string& name) {
  for (const auto& w : spec.workloads)
    if (w.name == name) return w;
  spec_error("unknown workload '" + name + "'");
}

}  // namespace

void ExperimentSpec::validate() const {
  if (workloads.empty()) spec_error("at least one workload is required");
  if (schemes.empty()) spec_error("at least one scheme is required");
  if (net_bandwidth_factors.empty() || num_mcs.empty() || num_cores.empty())
    spec_error("sweep axes must be non-empty");
  if (repetitions < 1) spec_error("repetitions must be >= 1");
  if (normalize && std::find(schemes.begin(), schemes.end(), Scheme::Local) == schemes.end())
    spec_error("normalized metrics require the 'local' scheme in schemes");
  for (std::size_t i = 0; i < workloads.size(); ++i)
    for (std::size_t k = i + 1; k < workloads.size(); ++k)
      if (workloads[i].name == workloads[k].name)
        spec_error("duplicate workload name '" + workloads[i].name + "'");
  for (const auto& w : workloads) {
    if (w.kind == WorkloadSpec::Kind::Mix) {
      if (w.mix.empty()) spec_error("mix '" + w.name + "' has no members");
      for (const auto& m : w.mix)
        if (find_workload(*this, m).kind != WorkloadSpec::Kind::Synthetic)
          spec_error("mix '" + w.name + "': member '" + m + "' is not synthetic");
    }
    if (w.kind == WorkloadSpec::Kind::Traces) {
      if (w.trace_paths.empty()) spec_error("workload '" + w.name + "' has no traces");
      if (!w.compressibility_files.empty() &&
          w.compressibility_files.size() != w.trace_paths.size())
        spec_error("workload '" + w.name + "': need one compressibility file per trace");
    }
  }
  for (auto c : num_cores)
    if (c < 1) spec_error("num_cores values must be >= 1");
  for (auto m : num_mcs)
    if (m < 1) spec_error("num_mcs values must be >= 1");
}

bool is_experiment_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    return false;
  }
  return j.is_object() && (j.contains("workloads") || j.contains("schemes"));
}

ExperimentSpec parse_experiment_spec(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    spec_error(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) spec_error("document must be a JSON object");
  check_keys(doc,
             {"base_config", "workloads", "schemes", "net_bandwidth_factors", "num_mcs",
              "num_cores", "repetitions", "normalize", "output", "format"},
             "top level");

  ExperimentSpec spec;
  if (doc.contains("base_config")) detail::apply_config_json(doc["base_config"], spec.base);
  spec.base.validate();

  if (!doc.contains("workloads") || !doc["workloads"].is_array())
    spec_error("workloads must be an array");
  for (const auto& w : doc["workloads"]) {
    if (!w.is_object() || !w.contains("name") || !w["name"].is_string())
      spec_error("each workload needs a string name");
    WorkloadSpec ws;
    ws.name = w["name"].get<std::string>();
    const std::string where = "workload '" + ws.name + "'";
    check_keys(w, {"name", "params", "seed", "compressibility", "traces",
                   "compressibility_files", "mix"},
               where);
    const int forms = w.contains("params") + w.contains("traces") + w.contains("mix");
    if (forms != 1) spec_error(where + ": exactly one of params, traces, mix is required");
    if (w.contains("params")) {
      ws.kind = WorkloadSpec::Kind::Synthetic;
      ws.params = parse_params(w["params"], where);
    } else if (w.contains("traces")) {
      ws.kind = WorkloadSpec::Kind::Traces;
      for (const auto& p : get_list<std::string>(w["traces"], "traces")) {
        fs::path path(p);
        ws.trace_paths.push_back(path.is_absolute() ? p : (fs::path(base_dir) / path).string());
      }
      if (w.contains("compressibility_files")) {
        for (const auto& p : get_list<std::string>(w["compressibility_files"],
                                                   "compressibility_files")) {
          fs::path path(p);
          ws.compressibility_files.push_back(
              path.is_absolute() ? p : (fs::path(base_dir) / path).string());
        }
      }
    } else {
      ws.kind = WorkloadSpec::Kind::Mix;
      ws.mix = get_list<std::string>(w["mix"], "mix");
    }
    if (w.contains("seed")) {
      if (!w["seed"].is_number_unsigned()) spec_error(where + ": seed must be a non-negative integer");
      ws.seed = w["seed"].get<std::uint64_t>();
    }
    if (w.contains("compressibility")) ws.compressibility = parse_dist(w["compressibility"], where);
    spec.workloads.push_back(std::move(ws));
  }

  if (!doc.contains("schemes")) spec_error("schemes is required");
  for (const auto& s : get_list<std::string>(doc["schemes"], "schemes"))
    spec.schemes.push_back(scheme_from_string(s));

  spec.net_bandwidth_factors =
      doc.contains("net_bandwidth_factors")
          ? get_list<double>(doc["net_bandwidth_factors"], "net_bandwidth_factors")
          : std::vector<double>{spec.base.net_bandwidth_factor};
  spec.num_mcs = doc.contains("num_mcs") ? get_list<std::uint32_t>(doc["num_mcs"], "num_mcs")
                                         : std::vector<std::uint32_t>{spec.base.num_mcs};
  spec.num_cores = doc.contains("num_cores")
                       ? get_list<std::uint32_t>(doc["num_cores"], "num_cores")
                       : std::vector<std::uint32_t>{1};
  if (doc.contains("repetitions")) {
    if (!doc["repetitions"].is_number_unsigned()) spec_error("repetitions must be an integer");
    spec.repetitions = doc["repetitions"].get<std::uint32_t>();
  }
  if (doc.contains("normalize")) {
    if (!doc["normalize"].is_boolean()) spec_error("normalize must be a boolean");
    spec.normalize = doc["normalize"].get<bool>();
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) spec_error("output must be a string");
    fs::path out(doc["output"].get<std::string>());
    spec.output = out.is_absolute() ? out.string() : (fs::path(base_dir) / out).lexically_normal().string();
  }
  if (doc.contains("format")) {
    if (!doc["format"].is_string()) spec_error("format must be a string");
    spec.format = output_format_from_string(doc["format"].get<std::string>());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open experiment spec '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto dir = fs::path(path).parent_path().string();
  try {
    return parse_experiment_spec(ss.str(), dir.empty() ? "." : dir);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "jsonl" || name == "json-lines") return OutputFormat::JsonLines;
  throw Error("unknown output format '" + name + "' (expected csv or jsonl)");
}

WorkloadParams parse_workload_params(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("workload params: malformed document: ") + e.what());
  }
  return parse_params(doc, "workload");
}

JobSet build_jobs(const ExperimentSpec& spec, const WorkloadSpec& workload, std::uint32_t jobs,
                  std::uint32_t rep) {
  const std::uint32_t line = spec.base.line_size_bytes;
  const std::uint32_t page = spec.base.page_size_bytes;
  JobSet set;

  auto add_synthetic = [&](const WorkloadSpec& w, std::uint32_t job) {
    const std::uint64_t base = w.seed + rep;
    AccessTrace t = gen_synthetic_trace(w.params, derive_seed(base, job), line, page);
    set.traces.push_back(relocate(t, set.footprint_pages, page));
    set.cmap.append(gen_compressibility_map(w.params.footprint_pages, w.compressibility,
                                            derive_seed(base, 1000 + job)));
    set.footprint_pages += w.params.footprint_pages;
  };

  switch (workload.kind) {
    case WorkloadSpec::Kind::Synthetic:
      for (std::uint32_t j = 0; j < jobs; ++j) add_synthetic(workload, j);
      break;
    case WorkloadSpec::Kind::Mix:
      for (std::uint32_t j = 0; j < workload.mix.size(); ++j)
        add_synthetic(find_workload(spec, workload.mix[j]), j);
      break;
    case WorkloadSpec::Kind::Traces:
      for (std::size_t j = 0; j < workload.trace_paths.size(); ++j) {
        AccessTrace t = load_trace_file(workload.trace_paths[j], page);
        set.traces.push_back(relocate(t, set.footprint_pages, page));
        if (!workload.compressibility_files.empty())
          set.cmap.append(
              load_compressibility_file(workload.compressibility_files[j], t.footprint_pages));
        else
          set.cmap.append(gen_compressibility_map(t.footprint_pages, workload.compressibility,
                                                  derive_seed(workload.seed + rep, 1000 + j)));
        set.footprint_pages += t.footprint_pages;
      }
      break;
  }
  return set;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const ExperimentOptions& options) {
  spec.validate();

  // Trace sets are shared by every scheme and link configuration.
  struct SetKey {
    std::size_t workload;
    std::uint32_t jobs;
    std::uint32_t rep;
    auto operator<=>(const SetKey&) const = default;
  };
  struct Cell {
    std::size_t workload;
    Scheme scheme;
    double factor;
    std::uint32_t mcs;
    std::uint32_t jobs;
    std::uint32_t rep;
  };

  std::map<SetKey, JobSet> sets;
  std::vector<Cell> cells;
  for (std::size_t w = 0; w < spec.workloads.size(); ++w) {
    const auto& wl = spec.workloads[w];
    std::vector<std::uint32_t> job_axis;
    if (wl.kind == WorkloadSpec::Kind::Synthetic) job_axis = spec.num_cores;
    else if (wl.kind == WorkloadSpec::Kind::Mix)
      job_axis = {static_cast<std::uint32_t>(wl.mix.size())};
    else job_axis = {static_cast<std::uint32_t>(wl.trace_paths.size())};

    for (Scheme s : spec.schemes)
      for (double f : spec.net_bandwidth_factors)
        for (auto m : spec.num_mcs)
          for (auto j : job_axis)
            for (std::uint32_t r = 0; r < spec.repetitions; ++r) {
              cells.push_back({w, s, f, m, j, r});
              SetKey key{w, j, r};
              if (!sets.count(key)) sets.emplace(key, build_jobs(spec, wl, j, r));
            }
  }

  if (options.grant_log && cells.size() != 1)
    throw Error("a grant log can only be recorded for a single-cell run");

  auto describe = [&](const Cell& c) {
    return "cell (workload=" + spec.workloads[c.workload].name +
           ", scheme=" + std::string(to_string(c.scheme)) +
           ", net_bandwidth_factor=" + fmt_factor(c.factor) + ", num_mcs=" +
           std::to_string(c.mcs) + ", num_cores=" + std::to_string(c.jobs) +
           ", rep=" + std::to_string(c.rep) + ")";
  };

  std::vector<ResultRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      try {
        const JobSet& set = sets.at(SetKey{c.workload, c.jobs, c.rep});
        SimConfig cfg = spec.base;
        cfg.scheme = c.scheme;
        cfg.net_bandwidth_factor = c.factor;
        cfg.num_mcs = c.mcs;
        cfg.num_cores = static_cast<std::uint32_t>(set.traces.size());
        cfg.footprint_pages = set.footprint_pages;
        cfg.seed = spec.base.seed + c.rep;

        RunOptions ro;
        ro.record_grants = options.grant_log != nullptr;
        RunOutput out = run_simulation_detailed(cfg, set.traces, &set.cmap, ro);
        if (options.grant_log) *options.grant_log = std::move(out.grant_log);

        ResultRow& row = rows[i];
        row.workload = spec.workloads[c.workload].name;
        row.scheme = c.scheme;
        row.net_bandwidth_factor = c.factor;
        row.num_mcs = c.mcs;
        row.num_cores = cfg.num_cores;
        row.rep = c.rep;
        row.stats = std::move(out.stats);
      } catch (const std::exception& e) {
        errors[i] = std::make_exception_ptr(Error(describe(c) + ": " + e.what()));
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (spec.normalize) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const Cell& c = cells[i];
      const ResultRow* local = nullptr;
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const Cell& b = cells[k];
        if (b.scheme == Scheme::Local && b.workload == c.workload && b.factor == c.factor &&
            b.mcs == c.mcs && b.jobs == c.jobs && b.rep == c.rep) {
          local = &rows[k];
          break;
        }
      }
      if (!local) throw Error(describe(c) + ": no local baseline row");
      rows[i].slowdown = slowdown(rows[i].stats, local->stats);
      double sum = 0.0;
      const auto& jobs = rows[i].stats.cores;
      for (std::size_t j = 0; j < jobs.size(); ++j)
        sum += slowdown(jobs[j].elapsed_ns, local->stats.cores[j].elapsed_ns);
      rows[i].mean_job_slowdown = jobs.empty() ? 1.0 : sum / static_cast<double>(jobs.size());
    }
  }
  return rows;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "workload", "scheme", "net_bandwidth_factor", "num_mcs", "num_cores", "rep",
      "accesses", "elapsed_ns", "slowdown", "mean_job_slowdown", "job_elapsed_ns",
      "total_mem_stall_ns", "total_access_latency_ns", "llc_hits", "llc_misses",
      "local_hits", "local_misses", "llc_evictions", "page_evictions", "page_writebacks",
      "llc_writebacks_absorbed", "llc_writebacks_dropped", "bytes_sub_block", "bytes_page",
      "payload_bytes_sub_block", "payload_bytes_page", "free_ride_bytes",
      "pkts_line_request", "pkts_page_request", "pkts_line_reply", "pkts_page_reply",
      "pkts_page_writeback", "served_llc", "served_local_mem", "served_line_reply",
      "served_page_reply", "decisions_line_only", "decisions_page_only", "decisions_both",
      "stalls"};
  return cols;
}

namespace {

// Cells in result_columns() order; `quoted` marks string-valued cells.
struct Cell {
  std::string text;
  bool quoted = false;
  bool null = false;
};

std::vector<Cell> row_cells(const ResultRow& r) {
  const RunStats& s = r.stats;
  auto u = [](std::uint64_t v) { return Cell{std::to_string(v)}; };
  auto opt = [](const std::optional<double>& v) {
    return v ? Cell{fmt_ratio(*v)} : Cell{"", false, true};
  };
  std::string jobs;
  for (std::size_t j = 0; j < s.cores.size(); ++j) {
    if (j) jobs += ';';
    jobs += fmt_time(s.cores[j].elapsed_ns);
  }
  return {
      Cell{r.workload, true},
      Cell{std::string(to_string(r.scheme)), true},
      Cell{fmt_factor(r.net_bandwidth_factor)},
      u(r.num_mcs),
      u(r.num_cores),
      u(r.rep),
      u(s.total_accesses()),
      Cell{fmt_time(s.elapsed_ns)},
      opt(r.slowdown),
      opt(r.mean_job_slowdown),
      Cell{jobs, true},
      Cell{fmt_time(s.total_mem_stall_ns())},
      Cell{fmt_time(s.total_access_latency_ns())},
      u(s.llc_hits),
      u(s.llc_misses),
      u(s.local_hits),
      u(s.local_misses),
      u(s.llc_evictions),
      u(s.page_evictions),
      u(s.page_writebacks),
      u(s.llc_writebacks_absorbed),
      u(s.llc_writebacks_dropped),
      u(s.network_bytes[0]),
      u(s.network_bytes[1]),
      u(s.network_payload_bytes[0]),
      u(s.network_payload_bytes[1]),
      u(s.free_ride_bytes),
      u(s.packets[0]),
      u(s.packets[1]),
      u(s.packets[2]),
      u(s.packets[3]),
      u(s.packets[4]),
      u(s.served_by[0]),
      u(s.served_by[1]),
      u(s.served_by[2]),
      u(s.served_by[3]),
      u(s.decisions[0]),
      u(s.decisions[1]),
      u(s.decisions[2]),
      u(s.stalls),
  };
}

}  // namespace

void write_results(std::ostream& out, const std::vector<ResultRow>& rows, OutputFormat format) {
  const auto& cols = result_columns();
  if (format == OutputFormat::Csv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
      auto cells = row_cells(r);
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i].text;
      out << '\n';
    }
    return;
  }
  for (const auto& r : rows) {
    auto cells = row_cells(r);
    out << '{';
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << '"' << cols[i] << "\":";
      if (cells[i].null) out << "null";
      else if (cells[i].quoted) out << json(cells[i].text).dump();
      else out << cells[i].text;
    }
    out << "}\n";
  }
}

void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::string& path) {
  if (rows.empty()) throw Error("emit_results: no rows to write");
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write results to '" + path + "'");
    write_results(out, rows, format);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("error writing results to '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move results into place at '" + path + "'");
  }
}

}  // namespace dsim
