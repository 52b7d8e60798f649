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
#include <charconv>
#include <cstdio>
#include <numeric>
#include <set>

#include "fedkat/errors.hpp"
#include "fedkat/rng.hpp"

namespace fedkat {
namespace {

// Parses one double; std::from_chars gives locale-independent, exact
// round-trip parsing.  from_chars rejects an explicit plus sign, but LIBSVM
// files write binary labels as "+1", so strip one leading '+' first.
double parse_double(std::string_view tok, std::size_t line) {
  std::string_view body = tok;
  if (body.size() > 1 && body.front() == '+') body.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(body.data(), body.data() + body.size(), out);
  if (ec != std::errc{} || ptr != body.data() + body.size()) {
    throw ParseError("bad numeric token '" + std::string(tok) + "'", line);
  }
  return out;
}

Index parse_index(std::string_view tok, std::size_t line) {
  long long out = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("bad feature index '" + std::string(tok) + "'", line);
  }
  return static_cast<Index>(out);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.labels.size() != b.labels.size()) return false;
  for (Index i = 0; i < a.labels.size(); ++i) {
    if (a.labels[i] != b.labels[i]) return false;
  }
  if (a.entries.nonZeros() != b.entries.nonZeros()) return false;
  for (Index r = 0; r < a.rows(); ++r) {
    SpMat::InnerIterator ia(a.entries, r);
    SpMat::InnerIterator ib(b.entries, r);
    for (; ia && ib; ++ia, ++ib) {
      if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
    }
    if (ia || ib) return false;
  }
  return true;
}

Dataset parse_libsvm(std::string_view text, std::optional<Index> dim_override) {
  std::vector<double> labels;
  std::vector<Eigen::Triplet<double>> triplets;
  Index max_index = 0;  // 1-based

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    // Tokenize on blanks.
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      if (j > i) toks.push_back(line.substr(i, j - i));
      i = j;
    }
    if (toks.empty()) {
      if (pos > text.size()) break;
      continue;  // blank line
    }

    const Index row = static_cast<Index>(labels.size());
    labels.push_back(parse_double(toks[0], line_no));

    Index prev_index = 0;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const std::size_t colon = toks[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(
            "expected <index>:<value>, got '" + std::string(toks[t]) + "'",
            line_no);
      }
      const Index idx = parse_index(toks[t].substr(0, colon), line_no);
      const double val = parse_double(toks[t].substr(colon + 1), line_no);
      if (idx < 1) {
        throw ParseError("feature indices are 1-based, got " +
                             std::to_string(idx),
                         line_no);
      }
      if (idx <= prev_index) {
        throw ParseError("feature indices must be strictly increasing (" +
                             std::to_string(prev_index) + " then " +
                             std::to_string(idx) + ")",
                         line_no);
      }
      prev_index = idx;
      max_index = std::max(max_index, idx);
      triplets.emplace_back(row, idx - 1, val);
    }
  }

  if (labels.empty()) throw ParseError("input contains no samples");

  Index dim = max_index;
  if (dim_override) {
    if (*dim_override < max_index) {
      throw ParseError("dimension override " + std::to_string(*dim_override) +
                       " is smaller than largest observed index " +
                       std::to_string(max_index));
    }
    dim = *dim_override;
  }

  Dataset ds;
  ds.entries.resize(static_cast<Index>(labels.size()), dim);
  ds.entries.setFromTriplets(triplets.begin(), triplets.end());
  ds.entries.makeCompressed();
  ds.labels = Eigen::Map<const Vector>(labels.data(),
                                       static_cast<Index>(labels.size()));

  // Binary labels are normalized to {-1, +1}; anything else stays verbatim.
  std::set<double> distinct(labels.begin(), labels.end());
  if (distinct.size() == 2) {
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    for (Index r = 0; r < ds.labels.size(); ++r) {
      ds.labels[r] = (ds.labels[r] == lo) ? -1.0 : 1.0;
    }
    (void)hi;
  }
  return ds;
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  out.reserve(static_cast<std::size_t>(ds.entries.nonZeros()) * 24);
  char buf[64];
  for (Index r = 0; r < ds.rows(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", ds.labels[r]);
    out += buf;
    for (SpMat::InnerIterator it(ds.entries, r); it; ++it) {
      std::snprintf(buf, sizeof(buf), " %lld:%.17g",
                    static_cast<long long>(it.col() + 1), it.value());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<Index> partition_sizes(Index count, int parts) {
  if (parts < 1 || static_cast<Index>(parts) > count) {
    throw Error("cannot partition " + std::to_string(count) + " items into " +
                std::to_string(parts) + " parts");
  }
  const Index base = count / parts;
  const Index extra = count % parts;  // first `extra` buckets get one more
  std::vector<Index> sizes(static_cast<std::size_t>(parts), base);
  for (Index i = 0; i < extra; ++i) sizes[static_cast<std::size_t>(i)] += 1;
  return sizes;
}

namespace {

std::vector<Index> item_order(Index count,
                              std::optional<std::uint64_t> shuffle_seed,
                              std::uint64_t tag) {
  std::vector<Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index{0});
  if (shuffle_seed) {
    Rng rng = Rng::derive(*shuffle_seed, tag);
    rng.shuffle(order);
  }
  return order;
}

}  // namespace

std::vector<FeatureShard> split_horizontal(
    const Dataset& ds, int n, std::optional<std::uint64_t> shuffle_seed) {
  const std::vector<Index> sizes = partition_sizes(ds.rows(), n);
  const std::vector<Index> order =
      item_order(ds.rows(), shuffle_seed, stream_tag::kShuffleRows);

  std::vector<FeatureShard> shards;
  shards.reserve(static_cast<std::size_t>(n));
  std::size_t next = 0;
  for (int w = 0; w < n; ++w) {
    FeatureShard shard;
    shard.owner = w;
    shard.rows.assign(order.begin() + static_cast<std::ptrdiff_t>(next),
                      order.begin() + static_cast<std::ptrdiff_t>(
                                          next + static_cast<std::size_t>(
                                                     sizes[static_cast<
                                                         std::size_t>(w)])));
    next += static_cast<std::size_t>(sizes[static_cast<std::size_t>(w)]);

    std::vector<Eigen::Triplet<double>> trips;
    shard.data.labels.resize(static_cast<Index>(shard.rows.size()));
    for (std::size_t r = 0; r < shard.rows.size(); ++r) {
      const Index src = shard.rows[r];
      shard.data.labels[static_cast<Index>(r)] = ds.labels[src];
      for (SpMat::InnerIterator it(ds.entries, src); it; ++it) {
        trips.emplace_back(static_cast<Index>(r), it.col(), it.value());
      }
    }
    shard.data.entries.resize(static_cast<Index>(shard.rows.size()),
                              ds.cols());
    shard.data.entries.setFromTriplets(trips.begin(), trips.end());
    shard.data.entries.makeCompressed();
    shards.push_back(std::move(shard));
  }
  return shards;
}

std::vector<FeatureBlock> split_vertical(
    const Dataset& ds, int n, std::optional<std::uint64_t> shuffle_seed) {
  const std::vector<Index> sizes = partition_sizes(ds.cols(), n);
  const std::vector<Index> order =
      item_order(ds.cols(), shuffle_seed, stream_tag::kShuffleCols);

  // Map original column -> (block, local column).
  std::vector<std::pair<int, Index>> where(
      static_cast<std::size_t>(ds.cols()));
  {
    std::size_t next = 0;
    for (int w = 0; w < n; ++w) {
      for (Index c = 0; c < sizes[static_cast<std::size_t>(w)]; ++c) {
        where[static_cast<std::size_t>(order[next])] = {w, c};
        ++next;
      }
    }
  }

  std::vector<FeatureBlock> blocks(static_cast<std::size_t>(n));
  std::vector<std::vector<Eigen::Triplet<double>>> trips(
      static_cast<std::size_t>(n));
  {
    std::size_t next = 0;
    for (int w = 0; w < n; ++w) {
      blocks[static_cast<std::size_t>(w)].owner = w;
      auto& cols = blocks[static_cast<std::size_t>(w)].cols;
      cols.assign(order.begin() + static_cast<std::ptrdiff_t>(next),
                  order.begin() +
                      static_cast<std::ptrdiff_t>(
                          next + static_cast<std::size_t>(
                                     sizes[static_cast<std::size_t>(w)])));
      next += static_cast<std::size_t>(sizes[static_cast<std::size_t>(w)]);
    }
  }

  for (Index r = 0; r < ds.rows(); ++r) {
    for (SpMat::InnerIterator it(ds.entries, r); it; ++it) {
      const auto [w, local] = where[static_cast<std::size_t>(it.col())];
      trips[static_cast<std::size_t>(w)].emplace_back(r, local, it.value());
    }
  }
  for (int w = 0; w < n; ++w) {
    auto& block = blocks[static_cast<std::size_t>(w)];
    block.data.resize(ds.rows(), static_cast<Index>(block.cols.size()));
    block.data.setFromTriplets(trips[static_cast<std::size_t>(w)].begin(),
                               trips[static_cast<std::size_t>(w)].end());
    block.data.makeCompressed();
  }
  return blocks;
}

}  // namespace fedkat
