// Copyright 2026 The fedkat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "fedkat/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "fedkat/errors.hpp"
#include "testutil.hpp"

using fedkat::Dataset;
using fedkat::Index;
using fedkat::ParseError;
using fedkat::testutil::dense_dataset;
using fedkat::testutil::random_dataset;

namespace {

double entry(const Dataset& ds, Index r, Index c) {
  return ds.entries.coeff(r, c);
}

}  // namespace

TEST_CASE("parse_libsvm reads a one-sample file") {
  const Dataset ds = fedkat::parse_libsvm("1 1:0.5 3:2.0\n");
  CHECK(ds.rows() == 1);
  CHECK(ds.cols() == 3);
  CHECK(entry(ds, 0, 0) == 0.5);
  CHECK(entry(ds, 0, 1) == 0.0);
  CHECK(entry(ds, 0, 2) == 2.0);
  CHECK(ds.entries.nonZeros() == 2);
  // A single distinct label value is kept verbatim.
  CHECK(ds.labels[0] == 1.0);
}

TEST_CASE("parse_libsvm normalizes binary labels to -1/+1") {
  const Dataset ds = fedkat::parse_libsvm("+1 1:1\n-1 2:1\n");
  CHECK(ds.rows() == 2);
  CHECK(ds.cols() == 2);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.labels[1] == -1.0);
  CHECK(entry(ds, 0, 0) == 1.0);
  CHECK(entry(ds, 1, 1) == 1.0);

  // Smaller distinct value maps to -1, regardless of the raw encoding.
  const Dataset two = fedkat::parse_libsvm("2 1:1\n5 1:2\n");
  CHECK(two.labels[0] == -1.0);
  CHECK(two.labels[1] == 1.0);

  const Dataset zero_one = fedkat::parse_libsvm("0 1:1\n1 1:2\n");
  CHECK(zero_one.labels[0] == -1.0);
  CHECK(zero_one.labels[1] == 1.0);
}

TEST_CASE("parse_libsvm keeps regression targets verbatim") {
  const Dataset ds = fedkat::parse_libsvm("1.5 1:1\n2.5 1:2\n3.5 1:3\n");
  CHECK(ds.labels[0] == 1.5);
  CHECK(ds.labels[1] == 2.5);
  CHECK(ds.labels[2] == 3.5);
}

TEST_CASE("parse_libsvm rejects malformed input with line numbers") {
  // Non-increasing feature indices.
  CHECK_THROWS_AS(fedkat::parse_libsvm("1 3:1 2:1\n"), ParseError);
  try {
    fedkat::parse_libsvm("1 3:1 2:1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  // Error on the second line reports line 2 (blank lines are skipped but
  // still counted).
  try {
    fedkat::parse_libsvm("1 1:1\n1 a:1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  // 1-based indices: index 0 is invalid.
  CHECK_THROWS_AS(fedkat::parse_libsvm("1 0:1\n"), ParseError);
  // Duplicate index is non-increasing.
  CHECK_THROWS_AS(fedkat::parse_libsvm("1 2:1 2:1\n"), ParseError);
  // Missing value token.
  CHECK_THROWS_AS(fedkat::parse_libsvm("1 2:\n"), ParseError);
  // No samples at all.
  CHECK_THROWS_AS(fedkat::parse_libsvm(""), ParseError);
  CHECK_THROWS_AS(fedkat::parse_libsvm("\n\n"), ParseError);
}

TEST_CASE("parse_libsvm honors the dimension override") {
  const Dataset ds = fedkat::parse_libsvm("1 1:1\n", Index{5});
  CHECK(ds.cols() == 5);
  // An override smaller than an observed index is an error.
  CHECK_THROWS_AS(fedkat::parse_libsvm("1 3:1\n", Index{2}), ParseError);
}

TEST_CASE("parse_libsvm skips blank lines") {
  const Dataset ds = fedkat::parse_libsvm("\n1 1:1\n\n-1 2:1\n\n");
  CHECK(ds.rows() == 2);
  CHECK(ds.cols() == 2);
}

TEST_CASE("serialize round-trips exactly") {
  // > 2 distinct real-valued labels, so no normalization interferes.
  const Dataset ds = random_dataset(12, 7, 0x5eedull, 0.6);
  const Dataset back = fedkat::parse_libsvm(fedkat::serialize_libsvm(ds));
  CHECK(fedkat::datasets_equal(ds, back));

  // Binary +/-1 labels are a fixed point of the normalization.
  const Dataset cls = random_dataset(9, 4, 0xc1a55ull, 0.8, /*signs=*/true);
  const Dataset cls_back = fedkat::parse_libsvm(fedkat::serialize_libsvm(cls));
  CHECK(fedkat::datasets_equal(cls, cls_back));
}

TEST_CASE("datasets_equal distinguishes sparsity patterns") {
  const Dataset a = dense_dataset({{1.0, 0.0}, {0.0, 2.0}}, {1.0, -1.0});
  Dataset b = a;
  CHECK(fedkat::datasets_equal(a, b));

  // Same values, but one entry stored explicitly as zero.
  std::vector<Eigen::Triplet<double>> trips = {
      {0, 0, 1.0}, {0, 1, 0.0}, {1, 1, 2.0}};
  Dataset c;
  c.entries.resize(2, 2);
  c.entries.setFromTriplets(trips.begin(), trips.end());
  c.entries.makeCompressed();
  c.labels = a.labels;
  CHECK_FALSE(fedkat::datasets_equal(a, c));

  // Different label breaks equality too.
  b.labels[1] = 7.0;
  CHECK_FALSE(fedkat::datasets_equal(a, b));
}

TEST_CASE("partition_sizes balances with larger buckets first") {
  const std::vector<Index> big = fedkat::partition_sizes(8124, 100);
  REQUIRE(big.size() == 100);
  for (int i = 0; i < 24; ++i) CHECK(big[static_cast<std::size_t>(i)] == 82);
  for (int i = 24; i < 100; ++i) CHECK(big[static_cast<std::size_t>(i)] == 81);
  CHECK(std::accumulate(big.begin(), big.end(), Index{0}) == 8124);

  const std::vector<Index> cols = fedkat::partition_sizes(112, 5);
  const std::vector<Index> expect = {23, 23, 22, 22, 22};
  CHECK(cols == expect);

  CHECK(fedkat::partition_sizes(4, 4) == std::vector<Index>(4, 1));
  CHECK(fedkat::partition_sizes(2, 2) == std::vector<Index>(2, 1));
  CHECK(fedkat::partition_sizes(7, 1) == std::vector<Index>{7});

  CHECK_THROWS_AS(fedkat::partition_sizes(3, 5), fedkat::Error);
  CHECK_THROWS_AS(fedkat::partition_sizes(1, 2), fedkat::Error);
  CHECK_THROWS_AS(fedkat::partition_sizes(5, 0), fedkat::Error);
}

TEST_CASE("partition_sizes is a partition for every feasible split") {
  for (Index count : {1, 2, 3, 17, 100, 1000}) {
    for (int parts = 1; parts <= count; parts = parts * 3 + 1) {
      const std::vector<Index> sizes = fedkat::partition_sizes(count, parts);
      REQUIRE(sizes.size() == static_cast<std::size_t>(parts));
      CHECK(std::accumulate(sizes.begin(), sizes.end(), Index{0}) == count);
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
      CHECK(std::is_sorted(sizes.rbegin(), sizes.rend()));
    }
  }
}

TEST_CASE("split_horizontal produces contiguous covering shards") {
  const Dataset ds = random_dataset(10, 3, 0xabcull);
  const std::vector<fedkat::FeatureShard> shards =
      fedkat::split_horizontal(ds, 4);
  REQUIRE(shards.size() == 4);

  Index next = 0;
  std::set<Index> seen;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const fedkat::FeatureShard& sh = shards[i];
    CHECK(sh.owner == static_cast<int>(i));
    CHECK(sh.data.rows() == static_cast<Index>(sh.rows.size()));
    CHECK(sh.data.cols() == ds.cols());
    for (Index r = 0; r < sh.data.rows(); ++r) {
      const Index orig = sh.rows[static_cast<std::size_t>(r)];
      CHECK(orig == next);  // unshuffled: original order, contiguous
      ++next;
      seen.insert(orig);
      CHECK(sh.data.labels[r] == ds.labels[orig]);
      for (Index c = 0; c < ds.cols(); ++c) {
        CHECK(sh.data.entries.coeff(r, c) == ds.entries.coeff(orig, c));
      }
    }
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("split_horizontal edge cases") {
  const Dataset four = random_dataset(4, 2, 0x44ull);
  const auto shards = fedkat::split_horizontal(four, 4);
  REQUIRE(shards.size() == 4);
  for (const auto& sh : shards) CHECK(sh.data.rows() == 1);

  const Dataset three = random_dataset(3, 2, 0x33ull);
  CHECK_THROWS_AS(fedkat::split_horizontal(three, 5), fedkat::Error);
}

TEST_CASE("split_horizontal shuffled is a seeded deterministic permutation") {
  const Dataset ds = random_dataset(50, 4, 0xdadaull);
  const auto a = fedkat::split_horizontal(ds, 7, 123u);
  const auto b = fedkat::split_horizontal(ds, 7, 123u);
  const auto c = fedkat::split_horizontal(ds, 7, 124u);

  REQUIRE(a.size() == b.size());
  std::vector<Index> order_a, order_c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rows == b[i].rows);
    CHECK(fedkat::datasets_equal(a[i].data, b[i].data));
    order_a.insert(order_a.end(), a[i].rows.begin(), a[i].rows.end());
    order_c.insert(order_c.end(), c[i].rows.begin(), c[i].rows.end());
  }
  CHECK(order_a != order_c);  // different seed, different permutation

  // Still a partition of all rows.
  std::vector<Index> sorted = order_a;
  std::sort(sorted.begin(), sorted.end());
  for (Index r = 0; r < 50; ++r) CHECK(sorted[static_cast<std::size_t>(r)] == r);
}

TEST_CASE("split_horizontal covers every sample exactly once up to s=1000") {
  const Dataset ds = random_dataset(1000, 2, 0x1000ull, 0.5);
  for (int n : {1, 3, 7, 100}) {
    const auto shards = fedkat::split_horizontal(ds, n, 9u);
    std::vector<Index> all;
    for (const auto& sh : shards) {
      all.insert(all.end(), sh.rows.begin(), sh.rows.end());
    }
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 1000);
    for (Index r = 0; r < 1000; ++r) {
      CHECK(all[static_cast<std::size_t>(r)] == r);
    }
  }
}

TEST_CASE("split_vertical partitions feature columns") {
  const Dataset ds = random_dataset(6, 112, 0x7eull, 0.2);
  const auto blocks = fedkat::split_vertical(ds, 5);
  REQUIRE(blocks.size() == 5);
  const std::vector<Index> expect = {23, 23, 22, 22, 22};
  Index next = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(blocks[i].owner == static_cast<int>(i));
    CHECK(blocks[i].dim() == expect[i]);
    CHECK(blocks[i].data.rows() == ds.rows());
    for (std::size_t c = 0; c < blocks[i].cols.size(); ++c) {
      const Index orig = blocks[i].cols[c];
      CHECK(orig == next);
      ++next;
      for (Index r = 0; r < ds.rows(); ++r) {
        CHECK(blocks[i].data.coeff(r, static_cast<Index>(c)) ==
              ds.entries.coeff(r, orig));
      }
    }
  }
  CHECK(next == 112);
}

TEST_CASE("split_vertical edge cases") {
  const Dataset two = random_dataset(3, 2, 0x22ull);
  const auto blocks = fedkat::split_vertical(two, 2);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].cols == std::vector<Index>{0});
  CHECK(blocks[1].cols == std::vector<Index>{1});

  const Dataset one = random_dataset(3, 1, 0x11ull);
  CHECK_THROWS_AS(fedkat::split_vertical(one, 2), fedkat::Error);
}

TEST_CASE("split_vertical shuffled covers every column exactly once") {
  const Dataset ds = random_dataset(4, 64, 0x64ull, 0.5);
  const auto a = fedkat::split_vertical(ds, 6, 77u);
  const auto b = fedkat::split_vertical(ds, 6, 77u);
  std::vector<Index> all;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cols == b[i].cols);
    all.insert(all.end(), a[i].cols.begin(), a[i].cols.end());
  }
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == 64);
  for (Index c = 0; c < 64; ++c) CHECK(all[static_cast<std::size_t>(c)] == c);
}
