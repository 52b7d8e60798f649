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

#ifndef FEDKAT_HFL_HPP_
#define FEDKAT_HFL_HPP_

#include <vector>

#include "fedkat/comm.hpp"
#include "fedkat/compressor.hpp"
#include "fedkat/problem.hpp"

namespace fedkat::hfl {

// Loopless-Katyusha schedule.  Constraints: 0 < theta1, 0 < theta2,
// theta1 + theta2 <= 1, p in (0, 1], eta > 0, sigma = mu / Ltilde.
struct HyperParams {
  double eta = 0.0;
  double sigma = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double p = 0.0;
  double Ltilde = 0.0;

  void validate() const;
};

// Default schedule for the compressed horizontal solver with n workers whose
// compressors have variance coefficient omega and density coefficient beta:
//   Ltilde = L * omega / n    (identically correlated PermK families satisfy
//                              the same bound with Ltilde = L; pass
//                              permk_family = true)
//   sigma  = mu / Ltilde
//   theta2 = 1/2,  theta1 = min{ sqrt(2 sigma beta / 3), 1/2 }
//   p      = 1 / beta
//   eta    = min{ theta2, (Ltilde/L) theta2 } / ((1 + theta2) theta1)
// Requires mu > 0.
HyperParams dhpl_params(const ProblemConstants& c, double omega, double beta,
                        int n, bool permk_family = false);

// Solver state.  x is the momentum point of the *last completed* round
// (initialized to x0); z, y, w are the primal, output, and anchor points;
// anchor_grad is the exact average gradient at w.
struct KatyushaState {
  Vector x, z, y, w;
  Vector anchor_grad;
  long k = 0;
};

// Initializes x = z = y = w = x0, anchor_grad = (1/n) sum_i grad f_i(x0).
// The initial anchor gradient is part of the algorithm's input, so nothing
// is booked on any ledger.
KatyushaState katyusha_init(const std::vector<Problem>& shards,
                            const Vector& x0, int threads = 1);

struct RoundResult {
  bool anchor_refreshed = false;
};

// Per-worker gradient differences h_i = grad f_i(x) - grad f_i(w).
std::vector<Vector> worker_grad_diffs(const std::vector<Problem>& shards,
                                      const Vector& x, const Vector& w,
                                      int threads = 1);

// One draw of the compressed variance-reduced estimate
//   g = (1/n) sum_i Q_i(h_i) + anchor_grad.
// Advances each member compressor's stream; call comps.begin_round() first
// when the set is a PermK family.  The reduction over workers runs in index
// order so results do not depend on the thread count.
Vector compressed_estimate(const std::vector<Vector>& diffs,
                           WorkerCompressors& comps, const Vector& anchor_grad,
                           int threads = 1);

// One round of the compressed horizontal solver:
//   x   = theta1 z + theta2 w + (1 - theta1 - theta2) y
//   g   = (1/n) sum_i Q_i(grad f_i(x) - grad f_i(w)) + grad f(w)
//   z+  = (eta sigma x + z - (eta/Ltilde) g) / (1 + eta sigma)
//   y+  = x + theta1 (z+ - z)
//   w+  = y  (the pre-update y) with probability p, else unchanged; the coin
//         is drawn from the shared stream after y+ is formed.
// Ledger: d / beta for the compressed aggregate every round, plus d when the
// anchor refresh broadcasts exact gradients.
RoundResult dhpl_step(KatyushaState& state, const std::vector<Problem>& shards,
                      WorkerCompressors& comps, const HyperParams& hp,
                      Fabric& fabric, CostLedger& ledger, int threads = 1);

// Plain gradient descent / Nesterov acceleration on an arbitrary objective,
// as uncompressed baselines.  Each step books d scalars (one exact aggregate
// broadcast).
struct GdState {
  Vector x, x_prev;
  long k = 0;
};

GdState gd_init(const Vector& x0);

void gd_step(GdState& state, const Objective& f, double L, const Fabric& fabric,
             CostLedger& ledger);

// Constant-momentum Nesterov for strongly convex objectives:
//   v  = x + m (x - x_prev),  m = (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))
//   x+ = v - (1/L) grad f(v)
void agd_step(GdState& state, const Objective& f, double L, double mu,
              const Fabric& fabric, CostLedger& ledger);

}  // namespace fedkat::hfl

#endif  // FEDKAT_HFL_HPP_
