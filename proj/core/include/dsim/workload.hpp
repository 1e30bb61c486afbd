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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsim/config.hpp"
#include "dsim/rng.hpp"

namespace dsim {

struct AccessRecord {
  std::uint64_t think_ns = 0;  // gap since the previous access of the same core
  Addr addr = 0;
  bool is_write = false;

  friend bool operator==(const AccessRecord&, const AccessRecord&) = default;
};

struct AccessTrace {
  std::uint64_t footprint_pages = 0;
  std::vector<AccessRecord> records;
  /// 1-based source line of each record when loaded from a file; empty for
  /// generated traces.
  std::vector<std::size_t> source_lines;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct WorkloadParams {
  std::uint64_t num_accesses = 100000;
  /// Probability that the next access is the next sequential line of the
  /// current page (wrapping to line 0).
  double spatial_locality = 0.5;
  /// Skew of cross-page jumps; 0 is uniform.
  double zipf_alpha = 0.8;
  double write_fraction = 0.2;
  double think_ns_mean = 20.0;
  std::uint64_t footprint_pages = 8192;

  void validate() const;
};

/// Draws page ranks from a Zipf(alpha) distribution over [0, n) using
/// precomputed cumulative weights and binary search.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double alpha);
  std::uint64_t sample(Rng& rng) const;
  std::uint64_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

/// Generator rule: record 0 is (page 0, line 0); each later record advances
/// to the next line of the current page with probability spatial_locality,
/// otherwise jumps to a Zipf-drawn page and a uniform line within it.
AccessTrace gen_synthetic_trace(const WorkloadParams& params, std::uint64_t seed,
                                std::uint32_t line_size_bytes = 64,
                                std::uint32_t page_size_bytes = 4096);

/// Text format: `key=value` header lines (footprint_pages required,
/// page_size_bytes optional), then rows `think_ns,addr,R|W`. Lines starting
/// with '#' and blank lines are ignored.
AccessTrace load_trace_file(const std::string& path, std::uint32_t page_size_bytes = 4096);
AccessTrace parse_trace(std::istream& in, std::uint32_t page_size_bytes = 4096,
                        const std::string& source_name = "<trace>");
void write_trace(std::ostream& out, const AccessTrace& trace, std::uint32_t page_size_bytes);
void write_trace_file(const std::string& path, const AccessTrace& trace,
                      std::uint32_t page_size_bytes);

/// Shifts every address by `page_offset` pages; used to give co-running jobs
/// disjoint footprints.
AccessTrace relocate(const AccessTrace& trace, std::uint64_t page_offset,
                     std::uint32_t page_size_bytes);

/// Fraction of records (after the first) that fall in the same page as their
/// predecessor.
double same_page_successor_fraction(const AccessTrace& trace, std::uint32_t page_size_bytes);

class CompressibilityMap {
 public:
  CompressibilityMap() = default;
  explicit CompressibilityMap(std::vector<double> ratios);

  /// Throws Error when the page has no ratio.
  double ratio(PageId page) const;
  std::uint64_t size() const { return ratios_.size(); }
  std::span<const double> ratios() const { return ratios_; }

  /// Concatenation; pages of `other` are numbered after this map's pages.
  void append(const CompressibilityMap& other);

 private:
  std::vector<double> ratios_;
};

struct CompressibilityDist {
  enum class Kind { Constant, Uniform };
  Kind kind = Kind::Constant;
  double lo = 1.0;
  double hi = 1.0;

  static CompressibilityDist constant(double c) { return {Kind::Constant, c, c}; }
  static CompressibilityDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

CompressibilityMap gen_compressibility_map(std::uint64_t footprint_pages,
                                           const CompressibilityDist& dist, std::uint64_t seed);

/// Sidecar format: CSV rows `page_id,ratio`; every page in [0, footprint)
/// must appear.
CompressibilityMap load_compressibility_file(const std::string& path,
                                             std::uint64_t footprint_pages);

}  // namespace dsim
