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

#ifndef FEDKAT_DATASET_HPP_
#define FEDKAT_DATASET_HPP_

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedkat {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Row-major so that per-sample rows (the unit both splits and solvers touch)
// iterate contiguously.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// A design matrix plus one target per row.
struct Dataset {
  SpMat entries;  // s x d
  Vector labels;  // length s

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

// Exact structural equality (same shape, same sparsity pattern, bitwise
// equal values and labels).  Used by the serialization round-trip contract.
bool datasets_equal(const Dataset& a, const Dataset& b);

// Parses LIBSVM sparse text: one sample per line,
//   <label> <index>:<value> <index>:<value> ...
// with 1-based, strictly increasing indices.  Violations (bad tokens,
// non-increasing indices, indices < 1) raise ParseError with the offending
// line number.  Blank lines are skipped; an input with no samples is an
// error.
//
// The feature dimension is the largest index seen unless dim_override is
// given; an override smaller than an observed index is an error.
//
// When the label column takes exactly two distinct values they are
// normalized to {-1, +1} (smaller value -> -1).  Any other label multiset is
// kept verbatim (regression targets).
Dataset parse_libsvm(std::string_view text,
                     std::optional<Index> dim_override = std::nullopt);

// Inverse of parse_libsvm.  Values are printed with 17 significant digits so
// that parse(serialize(ds)) reproduces ds exactly.
std::string serialize_libsvm(const Dataset& ds);

// Contiguous partition sizes: `count` items over `parts` buckets, sizes
// differing by at most one, larger buckets first.  parts must be in
// [1, count].
std::vector<Index> partition_sizes(Index count, int parts);

// A worker's horizontal slice: a subset of samples, all features.
struct FeatureShard {
  int owner = 0;
  std::vector<Index> rows;  // original sample ids, in shard order
  Dataset data;             // |rows| x d
};

// A worker's vertical slice: all samples, a subset of feature columns.
// Local column c of `data` is original column cols[c].
struct FeatureBlock {
  int owner = 0;
  std::vector<Index> cols;  // original feature ids, in block order
  SpMat data;               // s x |cols|

  Index dim() const { return data.cols(); }
};

// Splits samples across n workers into contiguous shards (after an optional
// seeded row shuffle).  Sizes come from partition_sizes, so they differ by
// at most one and every sample lands in exactly one shard.  n > rows() is an
// error.
std::vector<FeatureShard> split_horizontal(
    const Dataset& ds, int n,
    std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Splits feature columns across n workers, same conventions as
// split_horizontal.  n > cols() is an error.
std::vector<FeatureBlock> split_vertical(
    const Dataset& ds, int n,
    std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace fedkat

#endif  // FEDKAT_DATASET_HPP_
