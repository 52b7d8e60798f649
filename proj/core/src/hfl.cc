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

#include "fedkat/hfl.hpp"

#include <cmath>
#include <string>

#include "fedkat/errors.hpp"
#include "fedkat/parallel.hpp"

namespace fedkat::hfl {

void HyperParams::validate() const {
  if (!(eta > 0.0)) throw Error("hyperparams: eta must be positive");
  if (!(sigma > 0.0)) throw Error("hyperparams: sigma must be positive");
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || theta1 + theta2 > 1.0) {
    throw Error("hyperparams: need theta1, theta2 > 0 and theta1+theta2 <= 1");
  }
  if (!(p > 0.0) || p > 1.0) throw Error("hyperparams: p must be in (0, 1]");
  if (!(Ltilde > 0.0)) throw Error("hyperparams: Ltilde must be positive");
}

HyperParams dhpl_params(const ProblemConstants& c, double omega, double beta,
                        int n, bool permk_family) {
  if (!(c.mu > 0.0)) {
    throw Error("dhpl_params: strong convexity constant must be positive");
  }
  if (!(c.L > 0.0)) throw Error("dhpl_params: L must be positive");
  if (n < 1) throw Error("dhpl_params: need at least one worker");
  if (!permk_family && !(omega >= 1.0)) {
    throw Error("dhpl_params: omega must be >= 1");
  }
  if (!(beta >= 1.0)) throw Error("dhpl_params: beta must be >= 1");

  HyperParams hp;
  hp.Ltilde = permk_family ? c.L : c.L * omega / static_cast<double>(n);
  hp.sigma = c.mu / hp.Ltilde;
  hp.theta2 = 0.5;
  hp.theta1 = std::min(std::sqrt(2.0 * hp.sigma * beta / 3.0), 0.5);
  hp.p = 1.0 / beta;
  hp.eta = std::min(hp.theta2, (hp.Ltilde / c.L) * hp.theta2) /
           ((1.0 + hp.theta2) * hp.theta1);
  hp.validate();
  return hp;
}

KatyushaState katyusha_init(const std::vector<Problem>& shards,
                            const Vector& x0, int threads) {
  if (shards.empty()) throw Error("katyusha_init: no shards");
  KatyushaState st;
  st.x = x0;
  st.z = x0;
  st.y = x0;
  st.w = x0;

  const int n = static_cast<int>(shards.size());
  std::vector<Vector> grads(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    grads[static_cast<std::size_t>(i)] =
        shards[static_cast<std::size_t>(i)].eval(x0).gradient;
  });
  st.anchor_grad = Vector::Zero(x0.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    st.anchor_grad += inv_n * grads[static_cast<std::size_t>(i)];
  }
  return st;
}

std::vector<Vector> worker_grad_diffs(const std::vector<Problem>& shards,
                                      const Vector& x, const Vector& w,
                                      int threads) {
  const int n = static_cast<int>(shards.size());
  std::vector<Vector> diffs(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const Problem& f = shards[static_cast<std::size_t>(i)];
    diffs[static_cast<std::size_t>(i)] =
        f.eval(x).gradient - f.eval(w).gradient;
  });
  return diffs;
}

Vector compressed_estimate(const std::vector<Vector>& diffs,
                           WorkerCompressors& comps, const Vector& anchor_grad,
                           int threads) {
  const int n = static_cast<int>(diffs.size());
  if (comps.size() != n) {
    throw Error("compressed_estimate: compressor count != worker count");
  }
  std::vector<Vector> sent(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    sent[static_cast<std::size_t>(i)] = comps.members[static_cast<std::size_t>(
        i)]->compress(diffs[static_cast<std::size_t>(i)]);
  });
  Vector g = anchor_grad;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    g += inv_n * sent[static_cast<std::size_t>(i)];
  }
  return g;
}

RoundResult dhpl_step(KatyushaState& state, const std::vector<Problem>& shards,
                      WorkerCompressors& comps, const HyperParams& hp,
                      Fabric& fabric, CostLedger& ledger, int threads) {
  hp.validate();
  const int n = static_cast<int>(shards.size());
  if (n != fabric.workers() || n != comps.size()) {
    throw Error("dhpl_step: worker count mismatch");
  }
  const Index d = state.z.size();

  ledger.begin_round();
  comps.begin_round();

  state.x = hp.theta1 * state.z + hp.theta2 * state.w +
            (1.0 - hp.theta1 - hp.theta2) * state.y;

  const std::vector<Vector> diffs =
      worker_grad_diffs(shards, state.x, state.w, threads);
  const Vector g =
      compressed_estimate(diffs, comps, state.anchor_grad, threads);
  broadcast(fabric, ledger, static_cast<double>(d) / comps.aggregate_beta(),
            "compressed");

  const double a = hp.eta * hp.sigma;
  const Vector z_next =
      (a * state.x + state.z - (hp.eta / hp.Ltilde) * g) / (1.0 + a);
  const Vector y_next = state.x + hp.theta1 * (z_next - state.z);

  RoundResult out;
  // The anchor moves to the *pre-update* output point y^k.
  if (fabric.shared_coin(hp.p)) {
    out.anchor_refreshed = true;
    state.w = state.y;
    broadcast(fabric, ledger, static_cast<double>(d), "anchor");
    std::vector<Vector> grads(static_cast<std::size_t>(n));
    parallel_for(threads, n, [&](int i) {
      grads[static_cast<std::size_t>(i)] =
          shards[static_cast<std::size_t>(i)].eval(state.w).gradient;
    });
    state.anchor_grad = Vector::Zero(d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
      state.anchor_grad += inv_n * grads[static_cast<std::size_t>(i)];
    }
  }

  state.z = z_next;
  state.y = y_next;
  ++state.k;
  return out;
}

GdState gd_init(const Vector& x0) {
  GdState st;
  st.x = x0;
  st.x_prev = x0;
  return st;
}

void gd_step(GdState& state, const Objective& f, double L,
             const Fabric& fabric, CostLedger& ledger) {
  if (!(L > 0.0)) throw Error("gd_step: L must be positive");
  ledger.begin_round();
  const Vector grad = f.eval(state.x).gradient;
  broadcast(fabric, ledger, static_cast<double>(f.dim()), "gradient");
  state.x_prev = state.x;
  state.x -= (1.0 / L) * grad;
  ++state.k;
}

void agd_step(GdState& state, const Objective& f, double L, double mu,
              const Fabric& fabric, CostLedger& ledger) {
  if (!(L > 0.0) || !(mu > 0.0) || mu > L) {
    throw Error("agd_step: need 0 < mu <= L");
  }
  ledger.begin_round();
  const double m =
      (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  const Vector v = state.x + m * (state.x - state.x_prev);
  const Vector grad = f.eval(v).gradient;
  broadcast(fabric, ledger, static_cast<double>(f.dim()), "gradient");
  state.x_prev = state.x;
  state.x = v - (1.0 / L) * grad;
  ++state.k;
}

}  // namespace fedkat::hfl
