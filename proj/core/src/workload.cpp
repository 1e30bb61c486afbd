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

#include "dsim/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

namespace dsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void WorkloadParams::validate() const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(spatial_locality)) throw Error("workload: spatial_locality must be in [0, 1]");
  if (!in_unit(write_fraction)) throw Error("workload: write_fraction must be in [0, 1]");
  if (!(zipf_alpha >= 0.0) || !std::isfinite(zipf_alpha))
    throw Error("workload: zipf_alpha must be >= 0");
  if (!(think_ns_mean >= 0.0) || !std::isfinite(think_ns_mean))
    throw Error("workload: think_ns_mean must be >= 0");
  if (footprint_pages == 0 && num_accesses > 0)
    throw Error("workload: footprint_pages must be >= 1 when num_accesses > 0");
}

ZipfSampler::ZipfSampler(std::uint64_t n, double alpha) {
  if (n == 0) throw Error("zipf: empty support");
  cumulative_.resize(n);
  double sum = 0.0;
  for (std::uint64_t r = 0; r < n; ++r) {
    sum += alpha == 0.0 ? 1.0 : std::pow(static_cast<double>(r + 1), -alpha);
    cumulative_[r] = sum;
  }
}

std::uint64_t ZipfSampler::sample(Rng& rng) const {
  const double target = rng.uniform01() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return static_cast<std::uint64_t>(it - cumulative_.begin());
}

AccessTrace gen_synthetic_trace(const WorkloadParams& params, std::uint64_t seed,
                                std::uint32_t line_size_bytes, std::uint32_t page_size_bytes) {
  params.validate();
  if (line_size_bytes == 0 || page_size_bytes % line_size_bytes != 0)
    throw Error("workload: page size must be a multiple of line size");

  AccessTrace trace;
  trace.footprint_pages = params.footprint_pages;
  if (params.num_accesses == 0) return trace;
  trace.records.reserve(params.num_accesses);

  const std::uint32_t lines_per_page = page_size_bytes / line_size_bytes;
  const ZipfSampler zipf(params.footprint_pages, params.zipf_alpha);
  Rng rng(seed);

  PageId page = 0;
  LineIndex line = 0;
  for (std::uint64_t i = 0; i < params.num_accesses; ++i) {
    if (i > 0) {
      if (rng.uniform01() < params.spatial_locality) {
        line = (line + 1) % lines_per_page;
      } else {
        page = zipf.sample(rng);
        line = static_cast<LineIndex>(rng.uniform_below(lines_per_page));
      }
    }
    AccessRecord rec;
    rec.is_write = rng.bernoulli(params.write_fraction);
    rec.think_ns = rng.geometric_with_mean(params.think_ns_mean);
    rec.addr = page * page_size_bytes + static_cast<Addr>(line) * line_size_bytes;
    trace.records.push_back(rec);
  }
  return trace;
}

AccessTrace parse_trace(std::istream& in, std::uint32_t page_size_bytes,
                        const std::string& source_name) {
  AccessTrace trace;
  bool have_footprint = false;
  bool in_body = false;
  std::string raw;
  std::size_t lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    auto eq = line.find('=');
    if (!in_body && eq != std::string_view::npos && line.find(',') == std::string_view::npos) {
      auto key = trim(line.substr(0, eq));
      auto value = line.substr(eq + 1);
      std::uint64_t v = 0;
      if (!parse_number(value, v)) fail_at(source_name, lineno, "malformed header value");
      if (key == "footprint_pages") {
        trace.footprint_pages = v;
        have_footprint = true;
      } else if (key == "page_size_bytes") {
        if (v != page_size_bytes)
          fail_at(source_name, lineno,
                  "page_size_bytes " + std::to_string(v) + " does not match configured " +
                      std::to_string(page_size_bytes));
      } else {
        fail_at(source_name, lineno, "unknown header key '" + std::string(key) + "'");
      }
      continue;
    }

    in_body = true;
    if (!have_footprint) fail_at(source_name, lineno, "missing footprint_pages header");

    auto c1 = line.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      fail_at(source_name, lineno, "malformed row, expected think_ns,addr,R|W");

    AccessRecord rec;
    if (!parse_number(line.substr(0, c1), rec.think_ns))
      fail_at(source_name, lineno, "malformed think_ns");
    if (!parse_number(line.substr(c1 + 1, c2 - c1 - 1), rec.addr))
      fail_at(source_name, lineno, "malformed addr");
    auto rw = trim(line.substr(c2 + 1));
    if (rw == "R" || rw == "r") rec.is_write = false;
    else if (rw == "W" || rw == "w") rec.is_write = true;
    else fail_at(source_name, lineno, "access kind must be R or W");

    if (rec.addr >= trace.footprint_pages * page_size_bytes)
      fail_at(source_name, lineno, "address out of footprint");

    trace.records.push_back(rec);
    trace.source_lines.push_back(lineno);
  }
  if (!have_footprint) throw Error(source_name + ": missing footprint_pages header");
  return trace;
}

AccessTrace load_trace_file(const std::string& path, std::uint32_t page_size_bytes) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file '" + path + "'");
  return parse_trace(in, page_size_bytes, path);
}

void write_trace(std::ostream& out, const AccessTrace& trace, std::uint32_t page_size_bytes) {
  out << "footprint_pages=" << trace.footprint_pages << '\n';
  out << "page_size_bytes=" << page_size_bytes << '\n';
  for (const auto& r : trace.records)
    out << r.think_ns << ',' << r.addr << ',' << (r.is_write ? 'W' : 'R') << '\n';
}

void write_trace_file(const std::string& path, const AccessTrace& trace,
                      std::uint32_t page_size_bytes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file '" + path + "'");
  write_trace(out, trace, page_size_bytes);
  if (!out) throw Error("error writing trace file '" + path + "'");
}

AccessTrace relocate(const AccessTrace& trace, std::uint64_t page_offset,
                     std::uint32_t page_size_bytes) {
  AccessTrace out = trace;
  const Addr shift = page_offset * page_size_bytes;
  for (auto& r : out.records) r.addr += shift;
  out.footprint_pages = trace.footprint_pages + page_offset;
  return out;
}

double same_page_successor_fraction(const AccessTrace& trace, std::uint32_t page_size_bytes) {
  if (trace.size() < 2) return 0.0;
  std::uint64_t same = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace.records[i].addr / page_size_bytes == trace.records[i - 1].addr / page_size_bytes)
      ++same;
  return static_cast<double>(same) / static_cast<double>(trace.size() - 1);
}

CompressibilityMap::CompressibilityMap(std::vector<double> ratios) : ratios_(std::move(ratios)) {
  for (std::size_t i = 0; i < ratios_.size(); ++i)
    if (!(ratios_[i] >= 1.0) || !std::isfinite(ratios_[i]))
      throw Error("compressibility: page " + std::to_string(i) + " has ratio below 1.0");
}

double CompressibilityMap::ratio(PageId page) const {
  if (page >= ratios_.size())
    throw Error("compressibility: page " + std::to_string(page) + " missing from map");
  return ratios_[page];
}

void CompressibilityMap::append(const CompressibilityMap& other) {
  ratios_.insert(ratios_.end(), other.ratios_.begin(), other.ratios_.end());
}

CompressibilityMap gen_compressibility_map(std::uint64_t footprint_pages,
                                           const CompressibilityDist& dist, std::uint64_t seed) {
  std::vector<double> ratios(footprint_pages);
  if (dist.kind == CompressibilityDist::Kind::Constant) {
    if (!(dist.lo >= 1.0)) throw Error("compressibility: ratio below 1.0 requested");
    std::fill(ratios.begin(), ratios.end(), dist.lo);
  } else {
    if (!(dist.lo >= 1.0 && dist.lo <= dist.hi))
      throw Error("compressibility: uniform range must satisfy 1.0 <= lo <= hi");
    Rng rng(seed);
    for (auto& r : ratios) r = dist.lo + (dist.hi - dist.lo) * rng.uniform01();
  }
  return CompressibilityMap(std::move(ratios));
}

CompressibilityMap load_compressibility_file(const std::string& path,
                                             std::uint64_t footprint_pages) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open compressibility file '" + path + "'");
  std::vector<double> ratios(footprint_pages, std::numeric_limits<double>::quiet_NaN());
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line == "page_id,ratio") continue;
    auto comma = line.find(',');
    if (comma == std::string_view::npos) fail_at(path, lineno, "expected page_id,ratio");
    std::uint64_t page = 0;
    double ratio = 0.0;
    if (!parse_number(line.substr(0, comma), page)) fail_at(path, lineno, "malformed page_id");
    if (!parse_number(line.substr(comma + 1), ratio)) fail_at(path, lineno, "malformed ratio");
    if (page >= footprint_pages) fail_at(path, lineno, "page outside footprint");
    if (!(ratio >= 1.0)) fail_at(path, lineno, "ratio below 1.0");
    ratios[page] = ratio;
  }
  for (std::uint64_t p = 0; p < footprint_pages; ++p)
    if (std::isnan(ratios[p]))
      throw Error(path + ": page " + std::to_string(p) + " has no ratio");
  return CompressibilityMap(std::move(ratios));
}

}  // namespace dsim
