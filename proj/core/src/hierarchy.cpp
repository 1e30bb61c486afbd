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

#include "dsim/hierarchy.hpp"

#include <algorithm>

namespace dsim {

Llc::Llc(std::uint64_t capacity_lines, std::uint32_t associativity, std::uint32_t lines_per_page)
    : assoc_(associativity), lines_per_page_(lines_per_page) {
  if (associativity == 0 || capacity_lines < associativity || capacity_lines % associativity)
    throw Error("llc: capacity must be a positive multiple of associativity");
  sets_.resize(capacity_lines / associativity);
  for (auto& s : sets_) s.reserve(assoc_);
}

std::uint64_t Llc::set_of(PageId page, LineIndex line) const {
  return key_of(page, line) % sets_.size();
}

LlcResult Llc::access(PageId page, LineIndex line, bool is_write) {
  const auto key = key_of(page, line);
  auto& set = sets_[key % sets_.size()];
  auto it = std::find_if(set.begin(), set.end(), [key](const Entry& e) { return e.key == key; });
  if (it == set.end()) return LlcResult::Miss;
  Entry e = *it;
  e.dirty = e.dirty || is_write;
  set.erase(it);
  set.insert(set.begin(), e);
  return LlcResult::Hit;
}

EvictionOutcome Llc::fill(PageId page, LineIndex line, bool dirty) {
  const auto key = key_of(page, line);
  auto& set = sets_[key % sets_.size()];
  auto it = std::find_if(set.begin(), set.end(), [key](const Entry& e) { return e.key == key; });
  if (it != set.end()) {
    Entry e = *it;
    e.dirty = e.dirty || dirty;
    set.erase(it);
    set.insert(set.begin(), e);
    return std::nullopt;
  }
  EvictionOutcome out;
  if (set.size() == assoc_) {
    const Entry& lru = set.back();
    out = Victim{lru.key / lines_per_page_, static_cast<LineIndex>(lru.key % lines_per_page_),
                 lru.dirty};
    set.pop_back();
  }
  set.insert(set.begin(), Entry{key, dirty});
  return out;
}

bool Llc::contains(PageId page, LineIndex line) const {
  const auto key = key_of(page, line);
  const auto& set = sets_[key % sets_.size()];
  return std::any_of(set.begin(), set.end(), [key](const Entry& e) { return e.key == key; });
}

LocalPageCache::LocalPageCache(std::uint64_t capacity_pages) : capacity_(capacity_pages) {
  if (capacity_pages == 0) throw Error("local page cache: capacity must be >= 1");
  index_.reserve(capacity_pages);
}

Presence LocalPageCache::lookup(PageId page, bool touch) {
  auto it = index_.find(page);
  if (it == index_.end()) return Presence::Absent;
  if (touch) lru_.splice(lru_.begin(), lru_, it->second);
  return Presence::Present;
}

EvictionOutcome LocalPageCache::insert(PageId page, bool dirty) {
  if (index_.count(page))
    throw InternalError("local page cache: page " + std::to_string(page) + " already resident");
  EvictionOutcome out;
  if (index_.size() == capacity_) {
    const Entry victim = lru_.back();
    out = Victim{victim.page, 0, victim.dirty};
    index_.erase(victim.page);
    lru_.pop_back();
  }
  lru_.push_front(Entry{page, dirty});
  index_.emplace(page, lru_.begin());
  return out;
}

bool LocalPageCache::mark_dirty(PageId page) {
  auto it = index_.find(page);
  if (it == index_.end()) return false;
  it->second->dirty = true;
  return true;
}

}  // namespace dsim
