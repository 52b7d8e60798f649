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

#include "fedkat/comm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedkat/errors.hpp"

namespace fedkat {

Fabric::Fabric(int n, std::uint64_t master_seed)
    : n_(n),
      master_seed_(master_seed),
      shared_(Rng::derive(master_seed, stream_tag::kShared)) {
  if (n_ < 1) throw Error("fabric needs at least one worker");
}

bool Fabric::shared_coin(double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw Error("coin probability must be in (0, 1], got " +
                std::to_string(p));
  }
  return shared_.next_double() < p;
}

std::vector<Index> Fabric::shared_index_sample(const Vector& weights,
                                               int count) {
  if (count < 1) throw Error("index sample: count must be positive");
  if (weights.size() == 0) throw Error("index sample: empty weights");
  double sum = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) {
      throw Error("index sample: negative weight at " + std::to_string(i));
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error("index sample: weights sum to " + std::to_string(sum) +
                ", expected 1");
  }

  // Inverse-CDF draws on the running prefix sum.  The final bucket absorbs
  // any rounding slack so a draw can never fall off the end.
  std::vector<double> cdf(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  cdf.back() = 1.0;

  std::vector<Index> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double u = shared_.next_double();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out[static_cast<std::size_t>(k)] =
        static_cast<Index>(it - cdf.begin());
  }
  return out;
}

std::vector<Index> Fabric::shared_permutation(Index size) {
  if (size < 1) throw Error("permutation: size must be positive");
  std::vector<Index> perm(static_cast<std::size_t>(size));
  std::iota(perm.begin(), perm.end(), Index{0});
  shared_.shuffle(perm);
  return perm;
}

Rng Fabric::worker_stream(int worker) const {
  return Rng::derive(master_seed_,
                     stream_tag::kWorkerBase + static_cast<std::uint64_t>(worker));
}

Rng Fabric::compressor_stream(int worker) const {
  return Rng::derive(
      master_seed_,
      stream_tag::kCompressorBase + static_cast<std::uint64_t>(worker));
}

void CostLedger::charge(double scalars, std::string_view tag) {
  if (scalars < 0.0) throw Error("ledger: negative charge");
  total_ += scalars;
  log_.push_back(LedgerEntry{round_, scalars, std::string(tag)});
}

void broadcast(const Fabric& fabric, CostLedger& ledger,
               double payload_scalars, std::string_view tag) {
  (void)fabric;
  ledger.charge(payload_scalars, tag);
}

}  // namespace fedkat
