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

#include "fedkat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedkat/errors.hpp"

namespace fedkat::analysis {
namespace {

// Kahan compensated accumulator: the sum is independent of rounding drift,
// so Monte Carlo aggregates reproduce exactly across runs.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

LyapunovParams strip(double eta, double sigma, double theta1, double theta2,
                     double p, double ltilde) {
  LyapunovParams out;
  out.eta = eta;
  out.sigma = sigma;
  out.theta1 = theta1;
  out.theta2 = theta2;
  out.p = p;
  out.Ltilde = ltilde;
  return out;
}

}  // namespace

LyapunovParams lyapunov_params(const hfl::HyperParams& hp) {
  return strip(hp.eta, hp.sigma, hp.theta1, hp.theta2, hp.p, hp.Ltilde);
}

LyapunovParams lyapunov_params(const vfl::VerticalHyperParams& hp) {
  return strip(hp.eta, hp.sigma, hp.theta1, hp.theta2, hp.p, hp.Ltilde);
}

LyapunovComponents lyapunov(const Vector& z, const Vector& y, const Vector& w,
                            const LyapunovParams& params, const Vector& xstar,
                            double fstar, const Objective& f) {
  LyapunovComponents out;
  out.Z = params.Ltilde * (1.0 + params.eta * params.sigma) /
          (2.0 * params.eta) * (z - xstar).squaredNorm();
  out.Y = (f.eval(y).value - fstar) / params.theta1;
  out.W = params.theta2 * (1.0 + params.theta1) /
          (params.p * params.theta1) * (f.eval(w).value - fstar);
  out.Psi = out.Z + out.Y + out.W;
  return out;
}

double contraction_factor(const LyapunovParams& params) {
  const double z_rate = 1.0 / (1.0 + params.eta * params.sigma);
  const double y_rate = 1.0 - params.theta1 * (1.0 - params.theta2);
  const double w_rate = 1.0 - params.p * params.theta1 / (1.0 + params.theta1);
  return std::max({z_rate, y_rate, w_rate});
}

Vector reference_solution(const Objective& f, double L, double mu, double tol,
                          long max_iters) {
  if (!(L > 0.0) || !(mu > 0.0) || mu > L) {
    throw Error("reference_solution: need 0 < mu <= L");
  }
  const double m =
      (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  Vector x = Vector::Zero(f.dim());
  Vector x_prev = x;
  double gnorm = 0.0;
  for (long k = 0; k < max_iters; ++k) {
    // Check optimality at x itself so the certificate holds for the point
    // we return, not the lookahead.
    Eval at_x = f.eval(x);
    gnorm = at_x.gradient.norm();
    if (gnorm <= tol * mu) return x;

    const Vector v = x + m * (x - x_prev);
    const Vector grad_v = f.eval(v).gradient;
    x_prev = x;
    x = v - (1.0 / L) * grad_v;
  }
  throw ConvergenceError(
      "reference solve stalled: gradient norm " + std::to_string(gnorm) +
      " after " + std::to_string(max_iters) + " iterations (target " +
      std::to_string(tol * mu) + ")");
}

double bregman(const Objective& f, const Vector& w, const Vector& x) {
  const Eval at_x = f.eval(x);
  const Eval at_w = f.eval(w);
  return at_w.value - at_x.value - at_x.gradient.dot(w - x);
}

VarianceGap variance_gap(const std::function<Vector()>& draw,
                         const Vector& grad, double Ltilde, double breg,
                         long trials) {
  if (trials < 2) throw Error("variance_gap: need at least 2 trials");
  KahanSum mean_acc;
  KahanSum sq_acc;
  for (long t = 0; t < trials; ++t) {
    const Vector g = draw();
    const double err = (g - grad).squaredNorm();
    mean_acc.add(err);
    sq_acc.add(err * err);
  }
  const double n = static_cast<double>(trials);
  const double mean = mean_acc.sum / n;
  const double var =
      std::max(0.0, (sq_acc.sum / n - mean * mean) * n / (n - 1.0));

  VarianceGap out;
  out.lhs = mean;
  out.stderr_ = std::sqrt(var / n);
  out.rhs = 2.0 * Ltilde * breg;
  return out;
}

LowerBoundInstance lower_bound_problem(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0) || !(a > b)) {
    throw Error("lower_bound_problem: need a > b > 0");
  }
  std::vector<Eigen::Triplet<double>> trips = {
      {0, 0, a}, {0, 1, a}, {1, 0, b}, {1, 1, -b}};
  Dataset ds;
  ds.entries.resize(2, 2);
  ds.entries.setFromTriplets(trips.begin(), trips.end());
  ds.entries.makeCompressed();
  ds.labels = Vector::Zero(2);

  LowerBoundInstance out{Problem(LossKind::kLeastSquares, ds, 0.0),
                         Vector(2), Vector(2), 0.0, 0.0};
  // Eigenvalues of A^T A are exactly 2a^2 and 2b^2; with s = 2 the loss
  // scale (2/s) = 1, so L and mu need no spectral estimation here.
  out.L = 2.0 * a * a;
  out.mu = 2.0 * b * b;
  out.w = Vector::Zero(2);
  out.x = out.w;
  out.x[0] += c;
  out.x[1] -= c;
  return out;
}

}  // namespace fedkat::analysis
