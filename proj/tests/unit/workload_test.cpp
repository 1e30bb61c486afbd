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

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dsim/rng.hpp"
#include "dsim/workload.hpp"
#include "test_support.hpp"

namespace dsim {
namespace {

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, Mt19937_64ReferenceValue) {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the C++ standard.
  Rng r(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = r.next_u64();
  EXPECT_EQ(v, 9981545732273789042ull);
}

TEST(Rng, UniformBelowStaysInRange) {
  Rng r(7);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    auto v = r.uniform_below(5);
    ASSERT_LT(v, 5u);
    counts[v]++;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, GeometricMean) {
  Rng r(11);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(r.geometric_with_mean(20.0));
  EXPECT_NEAR(sum / n, 20.0, 0.3);
  EXPECT_EQ(Rng(1).geometric_with_mean(0.0), 0u);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(Generator, FullLocalityWalksLines) {
  WorkloadParams p;
  p.num_accesses = 4;
  p.spatial_locality = 1.0;
  p.footprint_pages = 16;
  auto t = gen_synthetic_trace(p, 1, 64, 4096);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.records[0].addr, 0u);
  EXPECT_EQ(t.records[1].addr, 64u);
  EXPECT_EQ(t.records[2].addr, 128u);
  EXPECT_EQ(t.records[3].addr, 192u);
}

TEST(Generator, FullLocalityWrapsWithinPage) {
  WorkloadParams p;
  p.num_accesses = 6;
  p.spatial_locality = 1.0;
  p.footprint_pages = 4;
  auto t = gen_synthetic_trace(p, 1, 64, 256);
  const Addr expect[] = {0, 64, 128, 192, 0, 64};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(t.records[i].addr, expect[i]);
}

TEST(Generator, ZeroAccessesIsEmpty) {
  WorkloadParams p;
  p.num_accesses = 0;
  EXPECT_TRUE(gen_synthetic_trace(p, 3).empty());
  p.footprint_pages = 0;
  EXPECT_TRUE(gen_synthetic_trace(p, 3).empty());
}

TEST(Generator, ZeroFootprintIsRejected) {
  WorkloadParams p;
  p.footprint_pages = 0;
  p.num_accesses = 5;
  EXPECT_THROW(gen_synthetic_trace(p, 1), Error);
}

TEST(Generator, BadParametersAreRejected) {
  WorkloadParams p;
  p.spatial_locality = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.write_fraction = -0.1;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.zipf_alpha = -1;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Generator, Deterministic) {
  WorkloadParams p;
  p.num_accesses = 5000;
  auto a = gen_synthetic_trace(p, 77);
  auto b = gen_synthetic_trace(p, 77);
  auto c = gen_synthetic_trace(p, 78);
  EXPECT_EQ(a.records, b.records);
  EXPECT_NE(a.records, c.records);
}

TEST(Generator, HalfLocalityStatistics) {
  WorkloadParams p;
  p.num_accesses = 100000;
  p.spatial_locality = 0.5;
  auto t = gen_synthetic_trace(p, 2024);
  EXPECT_NEAR(same_page_successor_fraction(t, 4096), 0.5, 0.02);

  std::uint64_t writes = 0;
  double think = 0;
  for (const auto& r : t.records) {
    writes += r.is_write;
    think += static_cast<double>(r.think_ns);
    EXPECT_LT(r.addr, p.footprint_pages * 4096);
  }
  EXPECT_NEAR(static_cast<double>(writes) / 100000.0, p.write_fraction, 0.01);
  EXPECT_NEAR(think / 100000.0, p.think_ns_mean, 0.5);
}

TEST(Generator, LocalityIsMonotone) {
  double prev = -1.0;
  for (double s : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    WorkloadParams p;
    p.num_accesses = 20000;
    p.spatial_locality = s;
    double f = same_page_successor_fraction(gen_synthetic_trace(p, 5), 4096);
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(Zipf, SkewFavoursLowRanks) {
  ZipfSampler z(100, 1.0);
  Rng r(3);
  std::vector<int> counts(100, 0);
  for (int i = 0; i < 100000; ++i) counts[z.sample(r)]++;
  EXPECT_GT(counts[0], counts[1]);
  EXPECT_GT(counts[1], counts[10]);
  // P(rank 0) = 1 / H_100 = 0.1928
  EXPECT_NEAR(counts[0] / 100000.0, 0.1928, 0.005);

  ZipfSampler flat(4, 0.0);
  std::vector<int> flat_counts(4, 0);
  for (int i = 0; i < 40000; ++i) flat_counts[flat.sample(r)]++;
  for (int c : flat_counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_THROW(ZipfSampler(0, 1.0), Error);
}

TEST(TraceFile, ParsesRow) {
  std::istringstream in("footprint_pages=2\n0,64,R\n");
  auto t = parse_trace(in);
  EXPECT_EQ(t.footprint_pages, 2u);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.records[0].think_ns, 0u);
  EXPECT_EQ(t.records[0].addr, 64u);
  EXPECT_FALSE(t.records[0].is_write);
}

TEST(TraceFile, AddressOutOfFootprint) {
  std::istringstream in("footprint_pages=2\n0,8192,R\n");
  try {
    parse_trace(in, 4096, "t.trace");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("address out of footprint"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("t.trace:2"), std::string::npos) << e.what();
  }
}

TEST(TraceFile, EmptyBody) {
  std::istringstream in("# comment\nfootprint_pages=7\n\n");
  auto t = parse_trace(in);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.footprint_pages, 7u);
}

TEST(TraceFile, MalformedLinesCarryLineNumbers) {
  const char* bad[] = {"footprint_pages=2\n0,64\n", "footprint_pages=2\n0,64,X\n",
                       "footprint_pages=2\nx,64,R\n", "footprint_pages=2\n0,-1,R\n",
                       "0,64,R\n", "footprint_pages=2\npage_size_bytes=256\n0,0,R\n"};
  for (const char* doc : bad) {
    std::istringstream in(doc);
    try {
      parse_trace(in, 4096, "f");
      ADD_FAILURE() << "accepted: " << doc;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("f:"), std::string::npos) << e.what();
    }
  }
}

TEST(TraceFile, WriteThenLoadRoundTrips) {
  testing::TempDir dir;
  WorkloadParams p;
  p.num_accesses = 1000;
  p.footprint_pages = 64;
  auto t = gen_synthetic_trace(p, 9);
  write_trace_file(dir.file("a.trace"), t, 4096);
  auto back = load_trace_file(dir.file("a.trace"));
  EXPECT_EQ(back.footprint_pages, 64u);
  EXPECT_EQ(back.records, t.records);
  ASSERT_EQ(back.source_lines.size(), back.size());
  EXPECT_THROW(load_trace_file(dir.file("nope.trace")), Error);
}

TEST(Relocate, ShiftsPages) {
  auto t = testing::make_trace(2, {{0, 0, false}, {5, 4096 + 64, true}});
  auto r = relocate(t, 3, 4096);
  EXPECT_EQ(r.records[0].addr, 3u * 4096);
  EXPECT_EQ(r.records[1].addr, 4u * 4096 + 64);
  EXPECT_EQ(r.records[1].think_ns, 5u);
  EXPECT_TRUE(r.records[1].is_write);
}

TEST(Compressibility, ConstantMaps) {
  auto one = gen_compressibility_map(5, CompressibilityDist::constant(1.0), 1);
  for (PageId p = 0; p < 5; ++p) EXPECT_DOUBLE_EQ(one.ratio(p), 1.0);
  auto two = gen_compressibility_map(3, CompressibilityDist::constant(2.0), 1);
  ASSERT_EQ(two.size(), 3u);
  for (PageId p = 0; p < 3; ++p) EXPECT_DOUBLE_EQ(two.ratio(p), 2.0);
  EXPECT_THROW(two.ratio(3), Error);
}

TEST(Compressibility, UniformMean) {
  auto m = gen_compressibility_map(10000, CompressibilityDist::uniform(1.0, 4.0), 17);
  const auto r = m.ratios();
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  EXPECT_NEAR(mean, 2.5, 0.1);
  for (double x : r) {
    EXPECT_GE(x, 1.0);
    EXPECT_LE(x, 4.0);
  }
}

TEST(Compressibility, RatioBelowOneRejected) {
  EXPECT_THROW(gen_compressibility_map(3, CompressibilityDist::constant(0.5), 1), Error);
  EXPECT_THROW(gen_compressibility_map(3, CompressibilityDist::uniform(0.5, 2.0), 1), Error);
  EXPECT_THROW(CompressibilityMap({1.0, 0.9}), Error);
}

TEST(Compressibility, FileMustCoverFootprint) {
  testing::TempDir dir;
  {
    std::ofstream f(dir.file("ok.csv"));
    f << "page_id,ratio\n1,2.0\n0,3.0\n";
  }
  auto m = load_compressibility_file(dir.file("ok.csv"), 2);
  EXPECT_DOUBLE_EQ(m.ratio(0), 3.0);
  EXPECT_DOUBLE_EQ(m.ratio(1), 2.0);
  EXPECT_THROW(load_compressibility_file(dir.file("ok.csv"), 3), Error);
  {
    std::ofstream f(dir.file("bad.csv"));
    f << "page_id,ratio\n0,0.5\n";
  }
  EXPECT_THROW(load_compressibility_file(dir.file("bad.csv"), 1), Error);
}

TEST(Compressibility, AppendNumbersAfter) {
  CompressibilityMap a({1.0, 2.0});
  a.append(CompressibilityMap({3.0}));
  EXPECT_EQ(a.size(), 3u);
  EXPECT_DOUBLE_EQ(a.ratio(2), 3.0);
}

}  // namespace
}  // namespace dsim
