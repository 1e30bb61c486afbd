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
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dsim/config.hpp"

namespace dsim {

struct Victim {
  PageId page_id = 0;
  LineIndex line_in_page = 0;  // always 0 for page victims
  bool dirty = false;

  friend bool operator==(const Victim&, const Victim&) = default;
};

/// Empty unless the insert found the cache (or set) full.
using EvictionOutcome = std::optional<Victim>;

enum class LlcResult { Hit, Miss };

/// Set-associative, line-granularity last-level cache with per-set LRU.
class Llc {
 public:
  Llc(std::uint64_t capacity_lines, std::uint32_t associativity, std::uint32_t lines_per_page);

  /// Hit: entry becomes most recent and dirty |= is_write. Miss: no state
  /// change; the caller fills later.
  LlcResult access(PageId page, LineIndex line, bool is_write);

  /// Inserts as most recent, evicting the set's least-recent entry when the
  /// set is full. Filling a resident line refreshes it and yields no victim.
  EvictionOutcome fill(PageId page, LineIndex line, bool dirty);

  bool contains(PageId page, LineIndex line) const;
  std::uint64_t num_sets() const { return sets_.size(); }
  std::uint32_t associativity() const { return assoc_; }
  std::size_t set_occupancy(std::uint64_t set) const { return sets_[set].size(); }
  std::uint64_t set_of(PageId page, LineIndex line) const;

 private:
  struct Entry {
    std::uint64_t key;
    bool dirty;
  };

  std::uint64_t key_of(PageId page, LineIndex line) const {
    return page * lines_per_page_ + line;
  }

  std::uint32_t assoc_;
  std::uint32_t lines_per_page_;
  std::vector<std::vector<Entry>> sets_;  // each ordered most-recent first
};

enum class Presence { Present, Absent };

/// Local DRAM acting as a fully associative, page-granularity LRU cache of
/// remote memory.
class LocalPageCache {
 public:
  explicit LocalPageCache(std::uint64_t capacity_pages);

  Presence lookup(PageId page, bool touch);

  /// Throws InternalError when the page is already resident.
  EvictionOutcome insert(PageId page, bool dirty);

  /// Sets the dirty flag of a resident page without changing recency.
  /// Returns false if the page is not resident.
  bool mark_dirty(PageId page);

  bool contains(PageId page) const { return index_.count(page) != 0; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t occupancy() const { return index_.size(); }

 private:
  struct Entry {
    PageId page;
    bool dirty;
  };

  std::uint64_t capacity_;
  std::list<Entry> lru_;  // most recent first
  std::unordered_map<PageId, std::list<Entry>::iterator> index_;
};

enum class McRequestKind { Line, Page, Writeback };

/// Fixed-latency memory component; no internal queuing.
inline TimeNs mc_service_time(McRequestKind, const SimConfig& cfg) {
  return cfg.mc_dram_latency_ns;
}

}  // namespace dsim
