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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsim/config.hpp"
#include "dsim/experiment.hpp"
#include "dsim/interconnect.hpp"
#include "dsim/workload.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsim::Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SimulateArgs {
  std::string config;
  std::vector<std::string> traces;
  std::vector<std::string> cmaps;
  std::string out;
  std::string format;
  std::string grant_log;
  unsigned jobs = 1;
};

int run_simulate(const SimulateArgs& a) {
  const std::string text = read_file(a.config);
  dsim::ExperimentSpec spec;
  if (dsim::is_experiment_document(text)) {
    if (!a.traces.empty() || !a.cmaps.empty())
      throw dsim::Error("--trace/--cmap cannot be combined with an experiment spec");
    spec = dsim::load_experiment_spec(a.config);
  } else {
    if (a.traces.empty())
      throw dsim::Error("a plain configuration needs at least one --trace");
    if (!a.cmaps.empty() && a.cmaps.size() != a.traces.size())
      throw dsim::Error("give one --cmap per --trace");
    spec.base = dsim::load_config_file(a.config);
    dsim::WorkloadSpec w;
    w.name = std::filesystem::path(a.traces.front()).stem().string();
    w.kind = dsim::WorkloadSpec::Kind::Traces;
    w.trace_paths = a.traces;
    w.compressibility_files = a.cmaps;
    spec.workloads.push_back(std::move(w));
    spec.schemes = {spec.base.scheme};
    spec.net_bandwidth_factors = {spec.base.net_bandwidth_factor};
    spec.num_mcs = {spec.base.num_mcs};
    spec.num_cores = {static_cast<std::uint32_t>(a.traces.size())};
    spec.normalize = false;
  }
  if (!a.out.empty()) spec.output = a.out;
  if (!a.format.empty()) spec.format = dsim::output_format_from_string(a.format);
  if (spec.output.empty()) throw dsim::Error("no output path (use --out)");

  std::vector<dsim::Grant> grants;
  dsim::ExperimentOptions opts;
  opts.threads = a.jobs;
  if (!a.grant_log.empty()) opts.grant_log = &grants;

  auto rows = dsim::run_experiment(spec, opts);
  dsim::emit_results(rows, spec.format, spec.output);
  if (!a.grant_log.empty()) {
    std::ofstream g(a.grant_log, std::ios::binary | std::ios::trunc);
    if (!g) throw dsim::Error("cannot write grant log '" + a.grant_log + "'");
    dsim::write_grant_log_csv(g, grants);
    if (!g) throw dsim::Error("error writing grant log '" + a.grant_log + "'");
  }
  std::cerr << "dsim: wrote " << rows.size() << " rows to " << spec.output << '\n';
  return 0;
}

struct GenTraceArgs {
  std::string params;
  std::uint64_t seed = 1;
  std::string out;
  std::uint32_t line_size = 64;
  std::uint32_t page_size = 4096;
};

int run_gen_trace(const GenTraceArgs& a) {
  auto params = dsim::parse_workload_params(read_file(a.params));
  auto trace = dsim::gen_synthetic_trace(params, a.seed, a.line_size, a.page_size);
  dsim::write_trace_file(a.out, trace, a.page_size);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsim: trace-driven simulator of data movement in disaggregated memory"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a configuration or experiment spec");
  simulate->add_option("--config", sim.config, "SimConfig or experiment spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--trace", sim.traces, "Trace file, one per core (plain config only)");
  simulate->add_option("--cmap", sim.cmaps, "Compressibility file, one per trace");
  simulate->add_option("--out", sim.out, "Result file (overrides the experiment's output)");
  simulate->add_option("--format", sim.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  simulate->add_option("--grant-log", sim.grant_log, "Write link grants of a single-cell run");
  simulate->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  GenTraceArgs gen;
  auto* gen_trace = app.add_subcommand("gen-trace", "Write a synthetic trace");
  gen_trace->add_option("--params", gen.params, "Workload parameters (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  gen_trace->add_option("--seed", gen.seed, "Generator seed");
  gen_trace->add_option("--out", gen.out, "Trace file")->required();
  gen_trace->add_option("--line-size", gen.line_size, "Line size in bytes");
  gen_trace->add_option("--page-size", gen.page_size, "Page size in bytes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (gen_trace->parsed()) return run_gen_trace(gen);
  } catch (const std::exception& e) {
    std::cerr << "dsim: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
