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

#ifndef FEDKAT_COMM_HPP_
#define FEDKAT_COMM_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedkat/dataset.hpp"
#include "fedkat/rng.hpp"

namespace fedkat {

// Simulated broadcast fabric for n workers.
//
// The fabric owns the *shared* randomness of a run: the anchor coin, batch
// index draws, and sample permutations that every worker must observe
// identically.  Per-worker randomness (compressor draws) lives in streams
// derived from the same master seed via worker_stream()/compressor_stream(),
// so worker loops can run on any number of threads without perturbing the
// shared sequence.  Shared draws happen only on the driver, in a fixed
// per-round order, which makes every run a pure function of the master seed.
class Fabric {
 public:
  Fabric(int n, std::uint64_t master_seed);

  int workers() const { return n_; }
  std::uint64_t master_seed() const { return master_seed_; }

  // One Bernoulli draw from the shared stream.  p must be in (0, 1].
  bool shared_coin(double p);

  // `count` i.i.d. index draws (with replacement) from the categorical
  // distribution given by `weights`.  Weights must be non-negative and sum
  // to 1 within 1e-12.
  std::vector<Index> shared_index_sample(const Vector& weights, int count);

  // Uniform permutation of {0, ..., size-1} from the shared stream.
  std::vector<Index> shared_permutation(Index size);

  // Independent streams for worker-local randomness.
  Rng worker_stream(int worker) const;
  Rng compressor_stream(int worker) const;

 private:
  int n_;
  std::uint64_t master_seed_;
  Rng shared_;
};

// How the per-round payload of the sample-sampling vertical solver is
// booked: the reference protocol re-broadcasts the anchor products of the
// current batch each round (2K scalars); since those are already known from
// the last anchor broadcast, the default books only the K fresh ones.
enum class Accounting {
  kPaperFaithful,  // K scalars per round
  kStrict,         // 2K scalars per round
};

struct LedgerEntry {
  long round = 0;
  double scalars = 0.0;
  std::string tag;
};

// Cumulative communication cost of a run, in scalars, under the aggregate
// per-vector model: one compressed vector of nominal dimension d with
// density coefficient beta costs d/beta, regardless of n.  Fractional
// payloads are kept exact.
class CostLedger {
 public:
  void begin_round() { ++round_; }
  void charge(double scalars, std::string_view tag);

  long rounds() const { return round_; }
  double total() const { return total_; }
  const std::vector<LedgerEntry>& log() const { return log_; }

 private:
  long round_ = 0;
  double total_ = 0.0;
  std::vector<LedgerEntry> log_;
};

// Books one aggregate broadcast on the ledger.  The fabric argument pins
// the call to a concrete communication context; payload accounting itself
// is topology-free.
void broadcast(const Fabric& fabric, CostLedger& ledger, double payload_scalars,
               std::string_view tag = "broadcast");

}  // namespace fedkat

#endif  // FEDKAT_COMM_HPP_
