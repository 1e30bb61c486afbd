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

#include <gtest/gtest.h>

#include "dsim/policy.hpp"

namespace dsim {
namespace {

TEST(Selection, TableExamples) {
  EXPECT_EQ(select_granularity(0.1, 0.9, 0.25, 0.75), Granularity::LineOnly);
  EXPECT_EQ(select_granularity(0.1, 0.1, 0.25, 0.75), Granularity::Both);
  EXPECT_EQ(select_granularity(0.9, 0.1, 0.25, 0.75), Granularity::PageOnly);
}

TEST(Selection, TableBoundaries) {
  EXPECT_EQ(select_granularity(0.0, 0.75, 0.25, 0.75), Granularity::LineOnly);
  EXPECT_EQ(select_granularity(0.75, 0.74, 0.25, 0.75), Granularity::PageOnly);
  EXPECT_EQ(select_granularity(0.9, 0.9, 0.25, 0.75), Granularity::LineOnly);
  EXPECT_EQ(select_granularity(0.74, 0.74, 0.25, 0.75), Granularity::Both);
}

TEST(Selection, LowThresholdVariant) {
  const auto v = SelectionVariant::LowThreshold;
  EXPECT_EQ(select_granularity(0.1, 0.2, 0.25, 0.75, v), Granularity::Both);
  EXPECT_EQ(select_granularity(0.25, 0.25, 0.25, 0.75, v), Granularity::Both);
  EXPECT_EQ(select_granularity(0.3, 0.1, 0.25, 0.75, v), Granularity::LineOnly);
  EXPECT_EQ(select_granularity(0.1, 0.3, 0.25, 0.75, v), Granularity::LineOnly);
}

TEST(Compression, PayloadSizes) {
  SimConfig cfg;
  cfg.compression_enabled = true;
  CompressibilityMap m({2.0, 1.0, 3.0});
  auto half = compress_page_payload(0, &m, cfg);
  EXPECT_EQ(half.payload_bytes, 2048u);
  EXPECT_DOUBLE_EQ(half.added_latency_ns, cfg.comp_latency_ns);
  EXPECT_EQ(compress_page_payload(1, &m, cfg).payload_bytes, 4096u);
  EXPECT_EQ(compress_page_payload(2, &m, cfg).payload_bytes, 1366u);  // ceil(4096 / 3)
}

TEST(Compression, DisabledIsPassThrough) {
  SimConfig cfg;
  cfg.compression_enabled = false;
  auto p = compress_page_payload(7, nullptr, cfg);
  EXPECT_EQ(p.payload_bytes, 4096u);
  EXPECT_DOUBLE_EQ(p.added_latency_ns, 0.0);
}

TEST(Compression, MissingPageIsRejected) {
  SimConfig cfg;
  CompressibilityMap m({2.0});
  EXPECT_THROW(compress_page_payload(5, &m, cfg), Error);
  EXPECT_THROW(compress_page_payload(0, nullptr, cfg), Error);
}

TEST(Inflight, TwoMissesSamePageCoalesce) {
  InflightState s(4, 4, 64);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(3), 1), CoalesceResult::Issued);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(3), 2), CoalesceResult::Attached);
  EXPECT_EQ(s.occupancy(InflightLevel::Page), 1u);
  auto w = s.take(InflightKey::page_key(3));
  EXPECT_EQ(w, (std::vector<DemandId>{1, 2}));
  EXPECT_FALSE(s.contains(InflightKey::page_key(3)));
}

TEST(Inflight, DifferentPagesAreSeparateEntries) {
  InflightState s(4, 4, 64);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(1), 1), CoalesceResult::Issued);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(2), 2), CoalesceResult::Issued);
  EXPECT_EQ(s.occupancy(InflightLevel::Page), 2u);
}

TEST(Inflight, CapacityAndUtilization) {
  InflightState s(2, 1, 64);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::line_key(0, 0), 1), CoalesceResult::Issued);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::line_key(0, 1), 2), CoalesceResult::Issued);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::line_key(0, 2), 3), CoalesceResult::Full);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::line_key(0, 1), 4), CoalesceResult::Attached);
  EXPECT_DOUBLE_EQ(s.utilization(InflightLevel::Line), 1.0);
  EXPECT_FALSE(s.has_space(InflightLevel::Line));
  EXPECT_DOUBLE_EQ(s.utilization(InflightLevel::Page), 0.0);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(9), 5), CoalesceResult::Issued);
  EXPECT_EQ(s.coalesce_or_issue(InflightKey::page_key(8), 6), CoalesceResult::Full);

  InflightState unbounded(InflightState::kUnbounded, InflightState::kUnbounded, 64);
  for (DemandId i = 0; i < 1000; ++i)
    EXPECT_EQ(unbounded.coalesce_or_issue(InflightKey::page_key(i), i), CoalesceResult::Issued);
  EXPECT_DOUBLE_EQ(unbounded.utilization(InflightLevel::Page), 0.0);
}

TEST(Inflight, LineWaitersOfPage) {
  InflightState s(8, 8, 4);
  s.coalesce_or_issue(InflightKey::line_key(2, 0), 10);
  s.coalesce_or_issue(InflightKey::line_key(2, 3), 11);
  s.coalesce_or_issue(InflightKey::line_key(2, 3), 12);
  s.coalesce_or_issue(InflightKey::line_key(5, 3), 13);
  EXPECT_EQ(s.line_waiters_of_page(2), (std::vector<DemandId>{10, 11, 12}));
  EXPECT_TRUE(s.line_waiters_of_page(7).empty());
  s.take(InflightKey::line_key(2, 0));
  EXPECT_EQ(s.line_waiters_of_page(2), (std::vector<DemandId>{11, 12}));
}

TEST(Inflight, TakeWithoutEntryIsInternalError) {
  InflightState s(2, 2, 64);
  EXPECT_THROW(s.take(InflightKey::page_key(1)), InternalError);
  EXPECT_THROW(s.take(InflightKey::line_key(1, 1)), InternalError);
}

}  // namespace
}  // namespace dsim
