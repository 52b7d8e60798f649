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

#include "fedkat/vfl.hpp"

#include <cmath>
#include <string>

#include "fedkat/errors.hpp"
#include "fedkat/parallel.hpp"

namespace fedkat::vfl {
namespace {

// Sums per-worker values in worker order; every reconstruction of a shared
// quantity goes through here so the arithmetic sequence is identical no
// matter how many threads produced the inputs.
Vector sum_in_worker_order(const std::vector<Vector>& parts) {
  Vector out = parts.at(0);
  for (std::size_t i = 1; i < parts.size(); ++i) out += parts[i];
  return out;
}

void check_blocks(const VerticalProblem& vp, const std::vector<Vector>& parts,
                  const char* what) {
  if (static_cast<int>(parts.size()) != vp.workers()) {
    throw Error(std::string(what) + ": block count mismatch");
  }
  for (int i = 0; i < vp.workers(); ++i) {
    if (parts[static_cast<std::size_t>(i)].size() !=
        vp.blocks[static_cast<std::size_t>(i)].dim()) {
      throw Error(std::string(what) + ": block dimension mismatch at worker " +
                  std::to_string(i));
    }
  }
}

// Accumulates coeff[k] * (row batch[k] of the block) into g.
void add_weighted_rows(const FeatureBlock& block,
                       const std::vector<Index>& batch, const Vector& coeff,
                       Vector& g) {
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double c = coeff[static_cast<Index>(k)];
    if (c == 0.0) continue;
    for (SpMat::InnerIterator it(block.data, batch[k]); it; ++it) {
      g[it.col()] += c * it.value();
    }
  }
}

// Worker i's block of the data gradient (1/s) sum_j l_j'(products[j]) a_ji.
Vector data_gradient_block(const VerticalProblem& vp, const FeatureBlock& block,
                           const Vector& products) {
  const double inv_s = 1.0 / static_cast<double>(vp.s);
  Vector g = Vector::Zero(block.dim());
  for (Index j = 0; j < vp.s; ++j) {
    const double c =
        loss_deriv(vp.kind, products[j], vp.labels[j]) * inv_s;
    if (c == 0.0) continue;
    for (SpMat::InnerIterator it(block.data, j); it; ++it) {
      g[it.col()] += c * it.value();
    }
  }
  return g;
}

// Shared tail of every Katyusha-style vertical round: momentum-point update
// was done by the caller; applies the z/y updates, then the anchor coin.
// Returns whether the anchor was refreshed.
bool finish_round(VerticalState& state, const VerticalProblem& vp,
                  const VerticalHyperParams& hp,
                  const std::vector<Vector>& g, Fabric& fabric,
                  CostLedger& ledger, int threads) {
  const int n = vp.workers();
  const double a = hp.eta * hp.sigma;
  std::vector<Vector> z_next(static_cast<std::size_t>(n));
  std::vector<Vector> y_next(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    z_next[ui] = (a * state.x[ui] + state.z[ui] -
                  (hp.eta / hp.Ltilde) * g[ui]) /
                 (1.0 + a);
    y_next[ui] = state.x[ui] + hp.theta1 * (z_next[ui] - state.z[ui]);
  });

  // Anchor moves to the pre-update output point y^k; its product vector is
  // broadcast in full and each worker rebuilds its data-gradient block.
  const bool refreshed = fabric.shared_coin(hp.p);
  if (refreshed) {
    state.w = state.y;
    std::vector<Vector> prods(static_cast<std::size_t>(n));
    parallel_for(threads, n, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      prods[ui] = partial_products(vp.blocks[ui], state.w[ui]);
    });
    state.anchor_products = sum_in_worker_order(prods);
    broadcast(fabric, ledger, static_cast<double>(vp.s), "anchor_products");
    parallel_for(threads, n, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      state.anchor_grad[ui] = data_gradient_block(vp, vp.blocks[ui],
                                                  state.anchor_products);
    });
  }

  state.z = std::move(z_next);
  state.y = std::move(y_next);
  ++state.k;
  return refreshed;
}

void momentum_point(VerticalState& state, const VerticalHyperParams& hp,
                    int n, int threads) {
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    state.x[ui] = hp.theta1 * state.z[ui] + hp.theta2 * state.w[ui] +
                  (1.0 - hp.theta1 - hp.theta2) * state.y[ui];
  });
}

void require_least_squares(const VerticalProblem& vp, const char* what) {
  if (vp.kind != LossKind::kLeastSquares) {
    throw Error(std::string(what) +
                " requires a least-squares problem: only there does the "
                "per-sample derivative difference reduce to a scalar product "
                "difference");
  }
}

}  // namespace

VerticalProblem VerticalProblem::from_problem(
    const Problem& full, int n, std::optional<std::uint64_t> shuffle_seed) {
  VerticalProblem vp;
  vp.kind = full.kind();
  vp.lambda = full.lambda();
  vp.blocks = split_vertical(full.data(), n, shuffle_seed);
  vp.labels = full.data().labels;
  vp.s = full.samples();
  vp.d = full.dim();
  return vp;
}

Vector VerticalProblem::assemble(const std::vector<Vector>& parts) const {
  check_blocks(*this, parts, "assemble");
  Vector full = Vector::Zero(d);
  for (int i = 0; i < workers(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto& cols = blocks[ui].cols;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      full[cols[c]] = parts[ui][static_cast<Index>(c)];
    }
  }
  return full;
}

std::vector<Vector> VerticalProblem::scatter(const Vector& full) const {
  if (full.size() != d) throw Error("scatter: dimension mismatch");
  std::vector<Vector> parts(static_cast<std::size_t>(workers()));
  for (int i = 0; i < workers(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto& cols = blocks[ui].cols;
    parts[ui].resize(static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      parts[ui][static_cast<Index>(c)] = full[cols[c]];
    }
  }
  return parts;
}

void VerticalHyperParams::validate(Index s) const {
  if (!(eta > 0.0)) throw Error("vertical hyperparams: eta must be positive");
  if (!(sigma > 0.0)) throw Error("vertical hyperparams: sigma must be positive");
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || theta1 + theta2 > 1.0) {
    throw Error(
        "vertical hyperparams: need theta1, theta2 > 0 and theta1+theta2 <= 1");
  }
  if (!(p > 0.0) || p > 1.0) {
    throw Error("vertical hyperparams: p must be in (0, 1]");
  }
  if (!(Ltilde > 0.0)) throw Error("vertical hyperparams: Ltilde must be positive");
  if (batch < 1 || static_cast<Index>(batch) > s) {
    throw Error("vertical hyperparams: batch must be in [1, s]");
  }
}

VerticalHyperParams dvpl_params(const ProblemConstants& c, int batch,
                                Index s) {
  if (!(c.mu > 0.0)) {
    throw Error("dvpl_params: strong convexity constant must be positive");
  }
  if (c.Lj.size() != s) throw Error("dvpl_params: Lj length != s");
  if (batch < 1 || static_cast<Index>(batch) > s) {
    throw Error("dvpl_params: batch must be in [1, s]");
  }

  VerticalHyperParams hp;
  hp.batch = batch;
  const double k = static_cast<double>(batch);
  hp.Ltilde = std::max(c.L, c.Lbar / k);
  hp.sigma = c.mu / hp.Ltilde;
  hp.theta2 = 0.5;
  hp.theta1 = std::min(
      std::sqrt(2.0 * hp.sigma * static_cast<double>(s) * k / 3.0), 0.5);
  hp.p = k / static_cast<double>(s);
  hp.eta = hp.theta2 / ((1.0 + hp.theta2) * hp.theta1);
  hp.pj = c.Lj / (static_cast<double>(s) * c.Lbar);
  hp.validate(s);
  return hp;
}

VerticalHyperParams dvpl_scalar_params(const ProblemConstants& c, int batch,
                                       Index s, double omega) {
  if (!(omega >= 1.0)) throw Error("dvpl_scalar_params: omega must be >= 1");
  VerticalHyperParams hp = dvpl_params(c, batch, s);
  const double sum_lj_sq = c.Lj.squaredNorm();
  hp.Ltilde = c.L * (1.0 + (omega - 1.0) * static_cast<double>(s) *
                               sum_lj_sq / (c.mu * c.mu));
  hp.sigma = c.mu / hp.Ltilde;
  hp.theta1 = std::min(
      std::sqrt(2.0 * hp.sigma * static_cast<double>(s) *
                static_cast<double>(batch) / 3.0),
      0.5);
  hp.eta = hp.theta2 / ((1.0 + hp.theta2) * hp.theta1);
  hp.pj = Vector::Constant(s, 1.0 / static_cast<double>(s));
  hp.validate(s);
  return hp;
}

VerticalHyperParams dvpl_permk_params(const ProblemConstants& c, Index s,
                                      int n) {
  if (!(c.mu > 0.0)) {
    throw Error("dvpl_permk_params: strong convexity constant must be positive");
  }
  if (n < 1 || static_cast<Index>(n) > s) {
    throw Error("dvpl_permk_params: need 1 <= n <= s");
  }
  VerticalHyperParams hp;
  hp.batch = 1;  // unused; every round covers all samples
  const double sum_lj_sq = c.Lj.squaredNorm();
  hp.Ltilde =
      2.0 * c.L * static_cast<double>(s) * sum_lj_sq / (c.mu * c.mu);
  hp.sigma = c.mu / hp.Ltilde;
  hp.theta2 = 0.5;
  hp.theta1 = std::min(
      std::sqrt(2.0 * hp.sigma * static_cast<double>(n) / 3.0), 0.5);
  hp.p = 1.0 / static_cast<double>(n);
  hp.eta = hp.theta2 / ((1.0 + hp.theta2) * hp.theta1);
  hp.pj = Vector::Constant(s, 1.0 / static_cast<double>(s));
  hp.validate(s);
  return hp;
}

VerticalState vertical_init(const VerticalProblem& vp, const Vector& x0_full,
                            int threads) {
  if (x0_full.size() != vp.d) throw Error("vertical_init: dimension mismatch");
  VerticalState st;
  st.x = vp.scatter(x0_full);
  st.z = st.x;
  st.y = st.x;
  st.w = st.x;

  const int n = vp.workers();
  std::vector<Vector> prods(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    prods[ui] = partial_products(vp.blocks[ui], st.w[ui]);
  });
  st.anchor_products = sum_in_worker_order(prods);
  st.anchor_grad.resize(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    st.anchor_grad[ui] =
        data_gradient_block(vp, vp.blocks[ui], st.anchor_products);
  });
  return st;
}

Vector partial_products(const FeatureBlock& block, const Vector& v) {
  if (v.size() != block.dim()) {
    throw Error("partial_products: dimension mismatch");
  }
  Vector out(block.data.rows());
  for (Index j = 0; j < block.data.rows(); ++j) {
    double acc = 0.0;
    for (SpMat::InnerIterator it(block.data, j); it; ++it) {
      acc += it.value() * v[it.col()];
    }
    out[j] = acc;
  }
  return out;
}

Vector partial_products_at(const FeatureBlock& block, const Vector& v,
                           const std::vector<Index>& batch) {
  if (v.size() != block.dim()) {
    throw Error("partial_products_at: dimension mismatch");
  }
  Vector out(static_cast<Index>(batch.size()));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    double acc = 0.0;
    for (SpMat::InnerIterator it(block.data, batch[k]); it; ++it) {
      acc += it.value() * v[it.col()];
    }
    out[static_cast<Index>(k)] = acc;
  }
  return out;
}

FrozenVerticalState freeze(const VerticalProblem& vp,
                           const std::vector<Vector>& x,
                           const std::vector<Vector>& w) {
  check_blocks(vp, x, "freeze");
  check_blocks(vp, w, "freeze");
  FrozenVerticalState fs;
  fs.x = x;
  fs.w = w;
  const int n = vp.workers();
  std::vector<Vector> px(static_cast<std::size_t>(n));
  std::vector<Vector> pw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    px[ui] = partial_products(vp.blocks[ui], x[ui]);
    pw[ui] = partial_products(vp.blocks[ui], w[ui]);
  }
  fs.px = sum_in_worker_order(px);
  fs.pw = sum_in_worker_order(pw);
  fs.anchor_grad.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    fs.anchor_grad[ui] = data_gradient_block(vp, vp.blocks[ui], fs.pw);
  }
  return fs;
}

namespace {

// g blocks from per-batch coefficients: g_i = anchor_i + sum_k coeff[k] *
// (row batch[k] of A_i) + lambda x_i.
std::vector<Vector> blocks_from_coeffs(const VerticalProblem& vp,
                                       const std::vector<Vector>& x,
                                       const std::vector<Vector>& anchor,
                                       const std::vector<Index>& batch,
                                       const Vector& coeff, int threads) {
  const int n = vp.workers();
  std::vector<Vector> g(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    g[ui] = anchor[ui];
    add_weighted_rows(vp.blocks[ui], batch, coeff, g[ui]);
    g[ui] += vp.lambda * x[ui];
  });
  return g;
}

Vector importance_coeffs(const VerticalProblem& vp,
                         const VerticalHyperParams& hp, const Vector& px_at,
                         const Vector& pw_at, const std::vector<Index>& batch) {
  Vector coeff(static_cast<Index>(batch.size()));
  const double k = static_cast<double>(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const Index j = batch[t];
    const double diff =
        loss_deriv(vp.kind, px_at[static_cast<Index>(t)], vp.labels[j]) -
        loss_deriv(vp.kind, pw_at[static_cast<Index>(t)], vp.labels[j]);
    coeff[static_cast<Index>(t)] =
        diff / (static_cast<double>(vp.s) * hp.pj[j] * k);
  }
  return coeff;
}

}  // namespace

std::vector<Vector> dvpl_estimate(const VerticalProblem& vp,
                                  const FrozenVerticalState& fs,
                                  const VerticalHyperParams& hp,
                                  const std::vector<Index>& batch) {
  Vector px_at(static_cast<Index>(batch.size()));
  Vector pw_at(static_cast<Index>(batch.size()));
  for (std::size_t t = 0; t < batch.size(); ++t) {
    px_at[static_cast<Index>(t)] = fs.px[batch[t]];
    pw_at[static_cast<Index>(t)] = fs.pw[batch[t]];
  }
  const Vector coeff = importance_coeffs(vp, hp, px_at, pw_at, batch);
  return blocks_from_coeffs(vp, fs.x, fs.anchor_grad, batch, coeff, 1);
}

std::vector<Vector> dvpl_scalar_estimate(const VerticalProblem& vp,
                                         const FrozenVerticalState& fs,
                                         WorkerCompressors& comps,
                                         const std::vector<Index>& batch) {
  require_least_squares(vp, "dvpl_scalar_estimate");
  const int n = vp.workers();
  if (comps.size() != n) {
    throw Error("dvpl_scalar_estimate: compressor count mismatch");
  }
  // Worker product differences on the batch, compressed per worker.
  std::vector<Vector> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector diff_block = fs.x[ui] - fs.w[ui];
    const Vector d_i = partial_products_at(vp.blocks[ui], diff_block, batch);
    q[ui] = comps.members[ui]->compress(d_i);
  }
  const Vector d_hat = sum_in_worker_order(q);
  Vector coeff(static_cast<Index>(batch.size()));
  const double k = static_cast<double>(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    coeff[static_cast<Index>(t)] = 2.0 * d_hat[static_cast<Index>(t)] / k;
  }
  return blocks_from_coeffs(vp, fs.x, fs.anchor_grad, batch, coeff, 1);
}

std::vector<Vector> dvpl_permk_estimate(const VerticalProblem& vp,
                                        const FrozenVerticalState& fs,
                                        const std::vector<Index>& perm) {
  require_least_squares(vp, "dvpl_permk_estimate");
  const int n = vp.workers();
  if (static_cast<Index>(perm.size()) != vp.s) {
    throw Error("dvpl_permk_estimate: permutation size mismatch");
  }
  const std::vector<Index> sizes = partition_sizes(vp.s, n);
  Vector d_hat = Vector::Zero(vp.s);
  std::size_t next = 0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector diff_block = fs.x[ui] - fs.w[ui];
    for (Index t = 0; t < sizes[ui]; ++t) {
      const Index j = perm[next++];
      double acc = 0.0;
      for (SpMat::InnerIterator it(vp.blocks[ui].data, j); it; ++it) {
        acc += it.value() * diff_block[it.col()];
      }
      d_hat[j] = static_cast<double>(n) * acc;
    }
  }
  // Full coverage: coefficient 2 d_hat[j] / s for every sample.
  std::vector<Index> all(static_cast<std::size_t>(vp.s));
  for (Index j = 0; j < vp.s; ++j) all[static_cast<std::size_t>(j)] = j;
  Vector coeff(vp.s);
  for (Index j = 0; j < vp.s; ++j) {
    coeff[j] = 2.0 * d_hat[j] / static_cast<double>(vp.s);
  }
  return blocks_from_coeffs(vp, fs.x, fs.anchor_grad, all, coeff, 1);
}

VerticalRoundResult dvpl_step(VerticalState& state, const VerticalProblem& vp,
                              const VerticalHyperParams& hp, Fabric& fabric,
                              CostLedger& ledger, Accounting accounting,
                              int threads) {
  hp.validate(vp.s);
  const int n = vp.workers();
  if (n != fabric.workers()) throw Error("dvpl_step: worker count mismatch");

  ledger.begin_round();
  momentum_point(state, hp, n, threads);

  const std::vector<Index> batch = fabric.shared_index_sample(hp.pj, hp.batch);

  std::vector<Vector> xprods(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    xprods[ui] = partial_products_at(vp.blocks[ui], state.x[ui], batch);
  });
  const Vector px_at = sum_in_worker_order(xprods);
  Vector pw_at(static_cast<Index>(batch.size()));
  for (std::size_t t = 0; t < batch.size(); ++t) {
    pw_at[static_cast<Index>(t)] = state.anchor_products[batch[t]];
  }
  const double per_round =
      (accounting == Accounting::kStrict ? 2.0 : 1.0) *
      static_cast<double>(hp.batch);
  broadcast(fabric, ledger, per_round, "batch_products");

  const Vector coeff = importance_coeffs(vp, hp, px_at, pw_at, batch);
  const std::vector<Vector> g = blocks_from_coeffs(
      vp, state.x, state.anchor_grad, batch, coeff, threads);

  VerticalRoundResult out;
  out.anchor_refreshed = finish_round(state, vp, hp, g, fabric, ledger, threads);
  return out;
}

VerticalRoundResult dvpl_scalar_step(VerticalState& state,
                                     const VerticalProblem& vp,
                                     const VerticalHyperParams& hp,
                                     WorkerCompressors& comps, Fabric& fabric,
                                     CostLedger& ledger, int threads) {
  require_least_squares(vp, "dvpl_scalar_step");
  hp.validate(vp.s);
  const int n = vp.workers();
  if (n != fabric.workers() || n != comps.size()) {
    throw Error("dvpl_scalar_step: worker count mismatch");
  }

  ledger.begin_round();
  momentum_point(state, hp, n, threads);

  const std::vector<Index> batch = fabric.shared_index_sample(hp.pj, hp.batch);

  std::vector<Vector> q(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector diff_block = state.x[ui] - state.w[ui];
    const Vector d_i = partial_products_at(vp.blocks[ui], diff_block, batch);
    q[ui] = comps.members[ui]->compress(d_i);
  });
  const Vector d_hat = sum_in_worker_order(q);
  broadcast(fabric, ledger,
            static_cast<double>(hp.batch) / comps.aggregate_beta(),
            "compressed_products");

  Vector coeff(static_cast<Index>(batch.size()));
  for (std::size_t t = 0; t < batch.size(); ++t) {
    coeff[static_cast<Index>(t)] =
        2.0 * d_hat[static_cast<Index>(t)] / static_cast<double>(hp.batch);
  }
  const std::vector<Vector> g = blocks_from_coeffs(
      vp, state.x, state.anchor_grad, batch, coeff, threads);

  VerticalRoundResult out;
  out.anchor_refreshed = finish_round(state, vp, hp, g, fabric, ledger, threads);
  return out;
}

VerticalRoundResult dvpl_permk_step(VerticalState& state,
                                    const VerticalProblem& vp,
                                    const VerticalHyperParams& hp,
                                    Fabric& fabric, CostLedger& ledger,
                                    int threads) {
  require_least_squares(vp, "dvpl_permk_step");
  hp.validate(vp.s);
  const int n = vp.workers();
  if (n != fabric.workers()) {
    throw Error("dvpl_permk_step: worker count mismatch");
  }
  if (static_cast<Index>(n) > vp.s) {
    throw Error("dvpl_permk_step: more workers than samples");
  }

  ledger.begin_round();
  momentum_point(state, hp, n, threads);

  const std::vector<Index> perm = fabric.shared_permutation(vp.s);
  const std::vector<Index> sizes = partition_sizes(vp.s, n);
  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    offsets[static_cast<std::size_t>(i) + 1] =
        offsets[static_cast<std::size_t>(i)] +
        static_cast<std::size_t>(sizes[static_cast<std::size_t>(i)]);
  }

  Vector d_hat = Vector::Zero(vp.s);
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector diff_block = state.x[ui] - state.w[ui];
    for (std::size_t t = offsets[ui]; t < offsets[ui + 1]; ++t) {
      const Index j = perm[t];
      double acc = 0.0;
      for (SpMat::InnerIterator it(vp.blocks[ui].data, j); it; ++it) {
        acc += it.value() * diff_block[it.col()];
      }
      d_hat[j] = static_cast<double>(n) * acc;
    }
  });
  broadcast(fabric, ledger,
            static_cast<double>(vp.s) / static_cast<double>(n),
            "permuted_products");

  std::vector<Index> all(static_cast<std::size_t>(vp.s));
  for (Index j = 0; j < vp.s; ++j) all[static_cast<std::size_t>(j)] = j;
  Vector coeff(vp.s);
  for (Index j = 0; j < vp.s; ++j) {
    coeff[j] = 2.0 * d_hat[j] / static_cast<double>(vp.s);
  }
  const std::vector<Vector> g =
      blocks_from_coeffs(vp, state.x, state.anchor_grad, all, coeff, threads);

  VerticalRoundResult out;
  out.anchor_refreshed = finish_round(state, vp, hp, g, fabric, ledger, threads);
  return out;
}

VerticalGdState vertical_gd_init(const VerticalProblem& vp,
                                 const Vector& x0_full) {
  VerticalGdState st;
  st.x = vp.scatter(x0_full);
  st.x_prev = st.x;
  return st;
}

namespace {

void vertical_first_order_step(VerticalGdState& state,
                               const VerticalProblem& vp, double momentum,
                               double L, const Fabric& fabric,
                               CostLedger& ledger, int threads) {
  const int n = vp.workers();
  ledger.begin_round();

  std::vector<Vector> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    v[ui] = momentum == 0.0
                ? state.x[ui]
                : Vector(state.x[ui] +
                         momentum * (state.x[ui] - state.x_prev[ui]));
  }

  std::vector<Vector> prods(static_cast<std::size_t>(n));
  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    prods[ui] = partial_products(vp.blocks[ui], v[ui]);
  });
  const Vector products = sum_in_worker_order(prods);
  broadcast(fabric, ledger, static_cast<double>(vp.s), "products");

  parallel_for(threads, n, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    Vector g = data_gradient_block(vp, vp.blocks[ui], products);
    g += vp.lambda * v[ui];
    state.x_prev[ui] = state.x[ui];
    state.x[ui] = v[ui] - (1.0 / L) * g;
  });
  ++state.k;
}

}  // namespace

void vertical_gd_step(VerticalGdState& state, const VerticalProblem& vp,
                      double L, const Fabric& fabric, CostLedger& ledger,
                      int threads) {
  if (!(L > 0.0)) throw Error("vertical_gd_step: L must be positive");
  vertical_first_order_step(state, vp, 0.0, L, fabric, ledger, threads);
}

void vertical_nesterov_step(VerticalGdState& state, const VerticalProblem& vp,
                            double L, double mu, const Fabric& fabric,
                            CostLedger& ledger, int threads) {
  if (!(L > 0.0) || !(mu > 0.0) || mu > L) {
    throw Error("vertical_nesterov_step: need 0 < mu <= L");
  }
  const double m =
      (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  vertical_first_order_step(state, vp, m, L, fabric, ledger, threads);
}

}  // namespace fedkat::vfl
