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

#ifndef FEDKAT_PROBLEM_HPP_
#define FEDKAT_PROBLEM_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "fedkat/dataset.hpp"

namespace fedkat {

enum class LossKind {
  kLogistic,      // (1/s) sum log(1+exp(-b_j <a_j,x>)) + (lambda/2)|x|^2
  kLeastSquares,  // (1/s) |Ax - b|^2 + (lambda/2)|x|^2
};

// Per-sample loss l_j(u) at prediction u = <a_j, x> with target b, and its
// derivative in u.  Shared by both the sample-based solvers (which see only
// the scalar u) and full-gradient evaluation.  Both are numerically stable
// for large |u|.
double loss_value(LossKind kind, double u, double b);
double loss_deriv(LossKind kind, double u, double b);

struct Eval {
  double value = 0.0;
  Vector gradient;
};

// Anything the generic solvers (GD, AGD, reference solve) can run on.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Index dim() const = 0;
  virtual Eval eval(const Vector& x) const = 0;
};

// Smoothness/convexity summary of a problem.
//   L    global smoothness constant,
//   mu   strong convexity constant,
//   Lj   per-sample smoothness constants (length s),
//   Lbar mean of Lj.
struct ProblemConstants {
  double L = 0.0;
  double mu = 0.0;
  double Lbar = 0.0;
  Vector Lj;
};

struct PowerIterOptions {
  double tol = 1e-6;       // relative residual tolerance
  int max_iters = 100000;  // per eigenvalue
  std::uint64_t seed = 0x9d5ad6cbull;
};

// A regularized empirical-risk objective over one dataset (or one shard /
// reassembled block view of it).
class Problem final : public Objective {
 public:
  Problem(LossKind kind, Dataset data, double lambda);

  Index dim() const override { return data_.cols(); }
  Index samples() const { return data_.rows(); }
  LossKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const Dataset& data() const { return data_; }

  // Returns a copy of this problem with a different ridge weight (used by
  // the two-pass "lambda = L0/ratio_denominator" calibration).
  Problem with_lambda(double lambda) const {
    return Problem(kind_, data_, lambda);
  }

  Eval eval(const Vector& x) const override;

  // Gradient of the j-th per-sample loss alone: no 1/s averaging and no
  // ridge term.  (1/s) sum_j sample_grad(j, x) + lambda x == eval(x).gradient.
  Vector sample_grad(Index j, const Vector& x) const;

  // Data-dependent constants.
  //   least squares: L  = (2/s) lmax(A^T A) + lambda
  //                  mu = (2/s) lmin(A^T A) + lambda
  //                  Lj = 2 |a_j|^2
  //   logistic:      L  = (1/(4s)) lmax(A^T A) + lambda
  //                  mu = lambda
  //                  Lj = |a_j|^2 / 4 + lambda
  // Extreme eigenvalues come from seeded power iteration (lmin via the
  // spectral shift lmax*I - A^T A); non-convergence raises ConvergenceError
  // with the final residual.
  ProblemConstants estimate_constants(const PowerIterOptions& opts = {}) const;

 private:
  LossKind kind_;
  Dataset data_;
  double lambda_;
};

// Mean of several problems: the objective a horizontal federation actually
// minimizes, F(x) = (1/n) sum_i f_i(x).  Holds non-owning pointers; the
// shard problems must outlive it.
class AverageObjective final : public Objective {
 public:
  explicit AverageObjective(std::vector<const Problem*> parts);

  Index dim() const override;
  Eval eval(const Vector& x) const override;
  const std::vector<const Problem*>& parts() const { return parts_; }

 private:
  std::vector<const Problem*> parts_;
};

// Extreme eigenvalues of A^T A by power iteration, exposed for reuse and
// direct testing.
double spectral_top(const SpMat& a, const PowerIterOptions& opts);
double spectral_bottom(const SpMat& a, double top, const PowerIterOptions& opts);

}  // namespace fedkat

#endif  // FEDKAT_PROBLEM_HPP_
