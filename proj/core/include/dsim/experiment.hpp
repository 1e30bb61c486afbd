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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsim/config.hpp"
#include "dsim/interconnect.hpp"
#include "dsim/stats.hpp"
#include "dsim/workload.hpp"

namespace dsim {

/// A named workload: synthetic parameters, trace files, or a mix of other
/// synthetic workloads run as co-located jobs (one per core).
struct WorkloadSpec {
  enum class Kind { Synthetic, Traces, Mix };

  std::string name;
  Kind kind = Kind::Synthetic;
  WorkloadParams params;
  std::uint64_t seed = 1;
  CompressibilityDist compressibility = CompressibilityDist::constant(1.0);
  std::vector<std::string> trace_paths;          // Traces
  std::vector<std::string> compressibility_files;  // Traces, optional, one per trace
  std::vector<std::string> mix;                  // Mix: names of synthetic workloads
};

enum class OutputFormat { Csv, JsonLines };

struct ExperimentSpec {
  SimConfig base;
  std::vector<WorkloadSpec> workloads;
  std::vector<Scheme> schemes;
  std::vector<double> net_bandwidth_factors;
  std::vector<std::uint32_t> num_mcs;
  /// Jobs per synthetic workload; trace and mix workloads fix their own.
  std::vector<std::uint32_t> num_cores;
  std::uint32_t repetitions = 1;
  bool normalize = true;
  std::string output;
  OutputFormat format = OutputFormat::Csv;

  /// Throws Error on an empty axis, unknown mix member, or normalization
  /// requested without the Local scheme.
  void validate() const;
};

/// Parses the JSON experiment format. Relative trace paths resolve against
/// `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& text, const std::string& base_dir = ".");
ExperimentSpec load_experiment_spec(const std::string& path);

/// True if the JSON document looks like an experiment spec rather than a
/// plain SimConfig.
bool is_experiment_document(const std::string& text);

struct ResultRow {
  std::string workload;
  Scheme scheme = Scheme::Page;
  double net_bandwidth_factor = 1.0;
  std::uint32_t num_mcs = 1;
  std::uint32_t num_cores = 1;
  std::uint32_t rep = 0;
  RunStats stats;
  /// elapsed / Local elapsed for the same workload and axis point.
  std::optional<double> slowdown;
  /// Mean over jobs of job elapsed / the same job's Local elapsed.
  std::optional<double> mean_job_slowdown;
};

struct ExperimentOptions {
  unsigned threads = 1;
  /// Only valid for single-cell experiments.
  std::vector<Grant>* grant_log = nullptr;
};

/// Runs the full cross-product. Rows are ordered by (workload, scheme,
/// bandwidth factor, MCs, cores, rep) in spec declaration order, regardless
/// of thread count. The first failing cell aborts the run with an Error
/// naming that cell.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const ExperimentOptions& options = {});

/// Column names of the result table, in output order.
const std::vector<std::string>& result_columns();

void write_results(std::ostream& out, const std::vector<ResultRow>& rows, OutputFormat format);

/// Writes atomically (temp file + rename). Throws Error for empty `rows` or
/// an unwritable path.
void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::string& path);

OutputFormat output_format_from_string(const std::string& name);

/// Parses a JSON object of WorkloadParams fields; absent fields keep their
/// defaults.
WorkloadParams parse_workload_params(const std::string& text);

/// Synthetic traces for each job of a workload, relocated to disjoint page
/// ranges, plus the matching compressibility map.
struct JobSet {
  std::vector<AccessTrace> traces;
  CompressibilityMap cmap;
  std::uint64_t footprint_pages = 0;
};

JobSet build_jobs(const ExperimentSpec& spec, const WorkloadSpec& workload, std::uint32_t jobs,
                  std::uint32_t rep);

}  // namespace dsim
