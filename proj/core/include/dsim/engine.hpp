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

#include <span>
#include <vector>

#include "dsim/config.hpp"
#include "dsim/interconnect.hpp"
#include "dsim/stats.hpp"
#include "dsim/workload.hpp"

namespace dsim {

struct RunOptions {
  /// Keep the completion time of every access (per core, trace order).
  bool record_completions = false;
  /// Keep every link grant, merged across links in grant order.
  bool record_grants = false;
};

struct RunOutput {
  RunStats stats;
  std::vector<std::vector<TimeNs>> completion_ns;
  std::vector<Grant> grant_log;
};

/// Replays one trace per core through the configured scheme. Each core
/// issues in trace order, waits think_ns between issues and keeps at most
/// max_outstanding_per_core accesses in flight. Deterministic: equal inputs
/// give equal outputs.
///
/// `cmap` may be null unless the scheme compresses pages.
RunStats run_simulation(const SimConfig& cfg, std::span<const AccessTrace> traces,
                        const CompressibilityMap* cmap);

RunOutput run_simulation_detailed(const SimConfig& cfg, std::span<const AccessTrace> traces,
                                  const CompressibilityMap* cmap, const RunOptions& options);

}  // namespace dsim
