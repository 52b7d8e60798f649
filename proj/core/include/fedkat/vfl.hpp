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

#ifndef FEDKAT_VFL_HPP_
#define FEDKAT_VFL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "fedkat/comm.hpp"
#include "fedkat/compressor.hpp"
#include "fedkat/problem.hpp"

namespace fedkat::vfl {

// A vertically partitioned problem: worker i holds the feature columns of
// block i for every sample.  Feature values never cross the fabric; workers
// exchange only per-sample scalar products <a_ji, x_i> (and scalars derived
// from them), which is the structural privacy property of this regime.  The
// labels are public inputs of the simulation.
struct VerticalProblem {
  LossKind kind = LossKind::kLeastSquares;
  double lambda = 0.0;
  std::vector<FeatureBlock> blocks;
  Vector labels;
  Index s = 0;
  Index d = 0;

  static VerticalProblem from_problem(
      const Problem& full, int n,
      std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  int workers() const { return static_cast<int>(blocks.size()); }

  // Gathers per-worker blocks into one vector in original coordinates (and
  // back).  Simulation-side observability only; the solvers never do this.
  Vector assemble(const std::vector<Vector>& parts) const;
  std::vector<Vector> scatter(const Vector& full) const;
};

// Loopless-Katyusha schedule for the vertical solvers, plus the batch size
// and per-sample importance weights of the product subsampling.
struct VerticalHyperParams {
  double eta = 0.0;
  double sigma = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double p = 0.0;
  double Ltilde = 0.0;
  int batch = 1;  // K
  Vector pj;      // length s; ignored by the permutation variant

  void validate(Index s) const;
};

// Importance-sampled vertical schedule:
//   Ltilde = max{ L, Lbar / K },  sigma = mu / Ltilde
//   theta2 = 1/2,  theta1 = min{ sqrt(2 sigma s K / 3), 1/2 }
//   p      = K / s
//   eta    = theta2 / ((1 + theta2) theta1)
//   p_j    = L_j / (s Lbar)
// Requires mu > 0 and 1 <= K <= s.
VerticalHyperParams dvpl_params(const ProblemConstants& c, int batch, Index s);

// Schedule for the scalar-compressed variant, whose estimator compresses
// each worker's K batch products with an unbiased scalar compressor of
// variance coefficient omega; sampling is uniform (p_j = 1/s) and
//   Ltilde = L (1 + (omega - 1) s sum_j L_j^2 / mu^2).
VerticalHyperParams dvpl_scalar_params(const ProblemConstants& c, int batch,
                                       Index s, double omega);

// Schedule for the permutation variant.  The worst-case efficient constant
//   Ltilde = 2 L s sum_j L_j^2 / mu^2
// is extremely pessimistic; p = 1/n balances the anchor cost against the
// per-round payload s/n, and theta1 = min{ sqrt(2 sigma n / 3), 1/2 }.
// Practical runs override these (see ExperimentConfig::overrides).
VerticalHyperParams dvpl_permk_params(const ProblemConstants& c, Index s,
                                      int n);

// Solver state, one block per worker.  anchor_products caches the full
// product vector A w broadcast at the last anchor refresh; anchor_grad is
// worker i's block of the *data* gradient at w (ridge excluded — the ridge
// is worker-local and handled exactly every round).
struct VerticalState {
  std::vector<Vector> x, z, y, w;
  Vector anchor_products;
  std::vector<Vector> anchor_grad;
  long k = 0;
};

struct VerticalRoundResult {
  bool anchor_refreshed = false;
};

VerticalState vertical_init(const VerticalProblem& vp, const Vector& x0_full,
                            int threads = 1);

// t[j] = <a_ji, v> over worker i's columns, for every sample j.
Vector partial_products(const FeatureBlock& block, const Vector& v);
// Same, restricted to the (multiset) batch J; output in batch order.
Vector partial_products_at(const FeatureBlock& block, const Vector& v,
                           const std::vector<Index>& J);

// Frozen view of (x, w) with everything the gradient estimators consume
// precomputed: full product vectors at x and w and the anchor gradient
// blocks at w.  Used by the Monte Carlo verification paths so that repeated
// draws only redo the randomized part.
struct FrozenVerticalState {
  std::vector<Vector> x, w;
  Vector px, pw;
  std::vector<Vector> anchor_grad;
};

FrozenVerticalState freeze(const VerticalProblem& vp,
                           const std::vector<Vector>& x,
                           const std::vector<Vector>& w);

// One draw of each estimator, given the shared randomness (batch J or
// permutation) made by the caller.  Returns per-worker gradient blocks.
std::vector<Vector> dvpl_estimate(const VerticalProblem& vp,
                                  const FrozenVerticalState& fs,
                                  const VerticalHyperParams& hp,
                                  const std::vector<Index>& batch);
std::vector<Vector> dvpl_scalar_estimate(const VerticalProblem& vp,
                                         const FrozenVerticalState& fs,
                                         WorkerCompressors& comps,
                                         const std::vector<Index>& batch);
std::vector<Vector> dvpl_permk_estimate(const VerticalProblem& vp,
                                        const FrozenVerticalState& fs,
                                        const std::vector<Index>& perm);

// One round of the importance-sampled vertical solver.  Per round, workers
// broadcast their partial products for the K batch samples; the anchor
// products at w are served from the cache filled at the last refresh.
// Ledger: K per round under Accounting::kPaperFaithful (2K under kStrict,
// which also books the redundant re-broadcast of anchor products), plus s
// when the anchor coin fires and the full product vector at the new w goes
// out.
VerticalRoundResult dvpl_step(VerticalState& state, const VerticalProblem& vp,
                              const VerticalHyperParams& hp, Fabric& fabric,
                              CostLedger& ledger,
                              Accounting accounting = Accounting::kPaperFaithful,
                              int threads = 1);

// Scalar-compressed variant (least squares only): workers compress the
// K-vector of their batch product *differences* D_ij = <a_ji, x_i - w_i>
// with their own unbiased scalar compressor.  Sampling is uniform.
// Ledger: K / beta per round plus s on anchor refresh.
VerticalRoundResult dvpl_scalar_step(VerticalState& state,
                                     const VerticalProblem& vp,
                                     const VerticalHyperParams& hp,
                                     WorkerCompressors& comps, Fabric& fabric,
                                     CostLedger& ledger, int threads = 1);

// Permutation variant (least squares only): a shared random permutation
// partitions all s samples into n disjoint sets; worker i broadcasts its
// product differences only for its own set, scaled by n.  Ledger: s/n per
// round plus s on anchor refresh.
VerticalRoundResult dvpl_permk_step(VerticalState& state,
                                    const VerticalProblem& vp,
                                    const VerticalHyperParams& hp,
                                    Fabric& fabric, CostLedger& ledger,
                                    int threads = 1);

// Uncompressed vertical baselines.  Each round broadcasts the full product
// vector (s scalars).
struct VerticalGdState {
  std::vector<Vector> x, x_prev;
  long k = 0;
};

VerticalGdState vertical_gd_init(const VerticalProblem& vp,
                                 const Vector& x0_full);

void vertical_gd_step(VerticalGdState& state, const VerticalProblem& vp,
                      double L, const Fabric& fabric, CostLedger& ledger,
                      int threads = 1);

void vertical_nesterov_step(VerticalGdState& state, const VerticalProblem& vp,
                            double L, double mu, const Fabric& fabric,
                            CostLedger& ledger, int threads = 1);

}  // namespace fedkat::vfl

#endif  // FEDKAT_VFL_HPP_
