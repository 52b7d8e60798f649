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

#ifndef FEDKAT_ANALYSIS_HPP_
#define FEDKAT_ANALYSIS_HPP_

#include <functional>

#include "fedkat/hfl.hpp"
#include "fedkat/problem.hpp"
#include "fedkat/vfl.hpp"

namespace fedkat::analysis {

// The schedule constants the Lyapunov potential depends on; adapters below
// strip them off either solver's parameter struct.
struct LyapunovParams {
  double eta = 0.0;
  double sigma = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double p = 0.0;
  double Ltilde = 0.0;
};

LyapunovParams lyapunov_params(const hfl::HyperParams& hp);
LyapunovParams lyapunov_params(const vfl::VerticalHyperParams& hp);

// Potential of one Katyusha state,
//   Z  = Ltilde (1 + eta sigma) / (2 eta) |z - x*|^2
//   Y  = (1/theta1) (f(y) - f*)
//   W  = theta2 (1 + theta1) / (p theta1) (f(w) - f*)
// and Psi = Z + Y + W.
struct LyapunovComponents {
  double Z = 0.0;
  double Y = 0.0;
  double W = 0.0;
  double Psi = 0.0;
};

LyapunovComponents lyapunov(const Vector& z, const Vector& y, const Vector& w,
                            const LyapunovParams& params, const Vector& xstar,
                            double fstar, const Objective& f);

// One-round worst-case decay factor of E[Psi],
//   rho = max{ 1/(1 + eta sigma), 1 - theta1 (1 - theta2),
//              1 - p theta1 / (1 + theta1) },
// strictly below 1 for any valid schedule.
double contraction_factor(const LyapunovParams& params);

// High-accuracy minimizer via constant-momentum Nesterov, run until
// |grad f(x)| <= tol * mu, which certifies |x - x*| <= tol.  Exceeding
// max_iters raises ConvergenceError with the final gradient norm.
Vector reference_solution(const Objective& f, double L, double mu,
                          double tol = 1e-10, long max_iters = 5000000);

// Bregman divergence D_f(w, x) = f(w) - f(x) - <grad f(x), w - x>.
double bregman(const Objective& f, const Vector& w, const Vector& x);

// Monte Carlo check of a second-moment bound
//   E |g - grad|^2 <= 2 Ltilde D_f(w, x).
// draw() produces one estimator sample; grad is the exact mean it should
// have.  lhs/stderr are the empirical mean and its standard error (Kahan
// accumulation keeps them reproducible); rhs = 2 Ltilde bregman.
struct VarianceGap {
  double lhs = 0.0;
  double stderr_ = 0.0;
  double rhs = 0.0;

  // Bound check with multiplicative slack plus the Monte Carlo band.
  bool pass(double slack = 0.10) const {
    return lhs <= rhs * (1.0 + slack) + 3.0 * stderr_;
  }
};

VarianceGap variance_gap(const std::function<Vector()>& draw,
                         const Vector& grad, double Ltilde, double breg,
                         long trials);

// The two-sample planted instance whose scalar-compressed estimator variance
// blows up as the spectrum spreads: rows (a, a) and (b, -b) of a
// least-squares problem with zero targets, so L = 2a^2 and mu = 2b^2, and a
// state pair x - w = (c, -c) orthogonal to the first row.  Requires
// a > b > 0.
struct LowerBoundInstance {
  Problem problem;
  Vector x, w;
  double L = 0.0;
  double mu = 0.0;
};

LowerBoundInstance lower_bound_problem(double a, double b, double c = 1.0);

}  // namespace fedkat::analysis

#endif  // FEDKAT_ANALYSIS_HPP_
