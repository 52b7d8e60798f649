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

#include "fedkat/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedkat/errors.hpp"

namespace fedkat {

Vector IdentityCompressor::compress(const Vector& x) {
  if (x.size() != dim_) throw Error("identity: dimension mismatch");
  return x;
}

RandKCompressor::RandKCompressor(Index dim, Index k, Rng stream)
    : dim_(dim), k_(k), stream_(stream) {
  if (k_ < 1 || k_ > dim_) {
    throw Error("randk: k must be in [1, d], got k=" + std::to_string(k_) +
                " d=" + std::to_string(dim_));
  }
}

Vector RandKCompressor::compress(const Vector& x) {
  if (x.size() != dim_) throw Error("randk: dimension mismatch");
  // Floyd's subset sampling: k distinct coordinates, uniform over subsets,
  // exactly k draws from the stream.
  picked_.clear();
  for (Index i = dim_ - k_; i < dim_; ++i) {
    const Index t = static_cast<Index>(
        stream_.next_below(static_cast<std::uint64_t>(i) + 1));
    if (std::find(picked_.begin(), picked_.end(), t) != picked_.end()) {
      picked_.push_back(i);
    } else {
      picked_.push_back(t);
    }
  }
  const double scale = static_cast<double>(dim_) / static_cast<double>(k_);
  Vector out = Vector::Zero(dim_);
  for (const Index c : picked_) out[c] = scale * x[c];
  return out;
}

NaturalDitheringCompressor::NaturalDitheringCompressor(Index dim, Rng stream,
                                                       double beta)
    : dim_(dim), stream_(stream), beta_(beta) {
  if (beta_ <= 0.0) throw Error("natural_dithering: beta must be positive");
}

Vector NaturalDitheringCompressor::compress(const Vector& x) {
  if (x.size() != dim_) throw Error("natural_dithering: dimension mismatch");
  Vector out(dim_);
  for (Index c = 0; c < dim_; ++c) {
    const double v = x[c];
    if (v == 0.0 || !std::isfinite(v)) {
      out[c] = v;
      continue;
    }
    const double mag = std::abs(v);
    int exp = 0;
    const double mant = std::frexp(mag, &exp);  // mag = mant * 2^exp, mant in [0.5, 1)
    const double lo = std::ldexp(0.5, exp);     // 2^(exp-1) <= mag
    const double p_hi = 2.0 * mant - 1.0;       // (mag - lo) / lo
    const double q = (stream_.next_double() < p_hi) ? 2.0 * lo : lo;
    out[c] = std::copysign(q, v);
  }
  return out;
}

double NaturalDitheringCompressor::scalar_second_moment(double t) {
  if (t == 0.0) return 0.0;
  const double mag = std::abs(t);
  int exp = 0;
  const double mant = std::frexp(mag, &exp);
  const double lo = std::ldexp(0.5, exp);
  const double p_hi = 2.0 * mant - 1.0;
  const double hi = 2.0 * lo;
  return p_hi * hi * hi + (1.0 - p_hi) * lo * lo;
}

PermKFamily::PermKFamily(int n, Index dim, Rng stream)
    : n_(n), dim_(dim), stream_(stream) {
  if (n_ < 1) throw Error("permk: need at least one worker");
  if (static_cast<Index>(n_) > dim_) {
    throw Error("permk: more workers than coordinates is unsupported (n=" +
                std::to_string(n_) + ", d=" + std::to_string(dim_) + ")");
  }
  perm_.resize(static_cast<std::size_t>(dim_));
  std::iota(perm_.begin(), perm_.end(), Index{0});
  offsets_.resize(static_cast<std::size_t>(n_) + 1, 0);
  const std::vector<Index> sizes = partition_sizes(dim_, n_);
  for (int w = 0; w < n_; ++w) {
    offsets_[static_cast<std::size_t>(w) + 1] =
        offsets_[static_cast<std::size_t>(w)] +
        static_cast<std::size_t>(sizes[static_cast<std::size_t>(w)]);
  }
}

void PermKFamily::fresh_round() {
  stream_.shuffle(perm_);
  ++round_;
}

std::span<const Index> PermKFamily::block(int worker) const {
  if (worker < 0 || worker >= n_) throw Error("permk: worker out of range");
  const std::size_t lo = offsets_[static_cast<std::size_t>(worker)];
  const std::size_t hi = offsets_[static_cast<std::size_t>(worker) + 1];
  return {perm_.data() + lo, hi - lo};
}

PermKMemberCompressor::PermKMemberCompressor(
    std::shared_ptr<PermKFamily> family, int worker)
    : family_(std::move(family)), worker_(worker) {
  if (!family_) throw Error("permk member: null family");
  if (worker_ < 0 || worker_ >= family_->workers()) {
    throw Error("permk member: worker out of range");
  }
}

Vector PermKMemberCompressor::compress(const Vector& x) {
  if (x.size() != family_->dim()) throw Error("permk: dimension mismatch");
  const double scale = static_cast<double>(family_->workers());
  Vector out = Vector::Zero(family_->dim());
  for (const Index c : family_->block(worker_)) out[c] = scale * x[c];
  return out;
}

double PermKMemberCompressor::omega() const {
  throw Error(
      "permk members have no per-member variance coefficient; the bound "
      "holds only jointly across the family");
}

}  // namespace fedkat
