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

#include "fedkat/problem.hpp"

#include <cmath>
#include <string>

#include "fedkat/errors.hpp"
#include "fedkat/rng.hpp"

namespace fedkat {
namespace {

// log(1 + exp(t)) without overflow.
double log1pexp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double loss_value(LossKind kind, double u, double b) {
  switch (kind) {
    case LossKind::kLogistic:
      return log1pexp(-b * u);
    case LossKind::kLeastSquares: {
      const double r = u - b;
      return r * r;
    }
  }
  return 0.0;
}

double loss_deriv(LossKind kind, double u, double b) {
  switch (kind) {
    case LossKind::kLogistic:
      return -b * sigmoid(-b * u);
    case LossKind::kLeastSquares:
      return 2.0 * (u - b);
  }
  return 0.0;
}

Problem::Problem(LossKind kind, Dataset data, double lambda)
    : kind_(kind), data_(std::move(data)), lambda_(lambda) {
  if (lambda_ < 0.0) throw Error("ridge weight must be non-negative");
  if (data_.labels.size() != data_.rows()) {
    throw Error("label count does not match sample count");
  }
  if (kind_ == LossKind::kLogistic) {
    for (Index j = 0; j < data_.labels.size(); ++j) {
      const double y = data_.labels[j];
      if (y != 1.0 && y != -1.0) {
        throw Error("logistic loss needs labels in {-1, +1}; sample " +
                    std::to_string(j) + " has " + std::to_string(y));
      }
    }
  }
}

Eval Problem::eval(const Vector& x) const {
  if (x.size() != dim()) throw Error("eval: dimension mismatch");
  const Index s = samples();
  const double inv_s = 1.0 / static_cast<double>(s);

  Eval out;
  out.gradient = Vector::Zero(dim());
  double value = 0.0;
  for (Index j = 0; j < s; ++j) {
    double u = 0.0;
    for (SpMat::InnerIterator it(data_.entries, j); it; ++it) {
      u += it.value() * x[it.col()];
    }
    value += loss_value(kind_, u, data_.labels[j]);
    const double g = loss_deriv(kind_, u, data_.labels[j]) * inv_s;
    for (SpMat::InnerIterator it(data_.entries, j); it; ++it) {
      out.gradient[it.col()] += g * it.value();
    }
  }
  out.value = value * inv_s + 0.5 * lambda_ * x.squaredNorm();
  out.gradient += lambda_ * x;
  return out;
}

Vector Problem::sample_grad(Index j, const Vector& x) const {
  if (j < 0 || j >= samples()) throw Error("sample_grad: sample out of range");
  if (x.size() != dim()) throw Error("sample_grad: dimension mismatch");
  double u = 0.0;
  for (SpMat::InnerIterator it(data_.entries, j); it; ++it) {
    u += it.value() * x[it.col()];
  }
  const double g = loss_deriv(kind_, u, data_.labels[j]);
  Vector out = Vector::Zero(dim());
  for (SpMat::InnerIterator it(data_.entries, j); it; ++it) {
    out[it.col()] = g * it.value();
  }
  return out;
}

namespace {

// y = A^T (A x); the Gram matrix is never formed.
Vector gram_apply(const SpMat& a, const Vector& x) {
  Vector ax = Vector::Zero(a.rows());
  for (Index r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (SpMat::InnerIterator it(a, r); it; ++it) {
      acc += it.value() * x[it.col()];
    }
    ax[r] = acc;
  }
  Vector out = Vector::Zero(a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    const double v = ax[r];
    if (v == 0.0) continue;
    for (SpMat::InnerIterator it(a, r); it; ++it) {
      out[it.col()] += v * it.value();
    }
  }
  return out;
}

// Power iteration for the top eigenvalue of the symmetric PSD operator
// op(x) = M x.  Residual |Mv - rho v| <= tol * max(rho, floor) certifies the
// eigenvalue to relative accuracy tol (symmetric Bauer-Fike).
template <typename Op>
double power_iterate(const Op& op, Index dim, const PowerIterOptions& opts,
                     double residual_floor) {
  Rng rng = Rng::derive(opts.seed, stream_tag::kPowerIteration);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.next_normal();
  v.normalize();

  double rho = 0.0;
  double residual = 0.0;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Vector mv = op(v);
    const double norm = mv.norm();
    if (norm == 0.0) return 0.0;  // v in the kernel: operator top is 0 there
    rho = v.dot(mv);
    residual = (mv - rho * v).norm();
    if (residual <= opts.tol * std::max(rho, residual_floor)) return rho;
    v = mv / norm;
  }
  throw ConvergenceError(
      "power iteration did not reach tolerance " + std::to_string(opts.tol) +
      " after " + std::to_string(opts.max_iters) +
      " iterations (residual " + std::to_string(residual) + ")");
}

}  // namespace

double spectral_top(const SpMat& a, const PowerIterOptions& opts) {
  return power_iterate([&a](const Vector& v) { return gram_apply(a, v); },
                       a.cols(), opts, 1e-300);
}

double spectral_bottom(const SpMat& a, double top,
                       const PowerIterOptions& opts) {
  if (top == 0.0) return 0.0;  // zero operator
  // Top eigenvalue of (top*I - A^T A) is top - lmin; the shift keeps the
  // operator PSD.  Residuals are measured relative to the original scale so
  // that lmin == top (e.g. multiples of the identity) terminates immediately.
  const auto shifted = [&a, top](const Vector& v) {
    Vector out = gram_apply(a, v);
    out = top * v - out;
    return out;
  };
  const double gap = power_iterate(shifted, a.cols(), opts, top);
  const double bottom = top - gap;
  return bottom > 0.0 ? bottom : 0.0;
}

ProblemConstants Problem::estimate_constants(
    const PowerIterOptions& opts) const {
  const Index s = samples();
  ProblemConstants out;
  out.Lj.resize(s);
  for (Index j = 0; j < s; ++j) {
    double sq = 0.0;
    for (SpMat::InnerIterator it(data_.entries, j); it; ++it) {
      sq += it.value() * it.value();
    }
    out.Lj[j] = (kind_ == LossKind::kLeastSquares) ? 2.0 * sq
                                                   : 0.25 * sq + lambda_;
  }
  out.Lbar = out.Lj.mean();

  const double top = spectral_top(data_.entries, opts);
  if (kind_ == LossKind::kLeastSquares) {
    const double bottom = spectral_bottom(data_.entries, top, opts);
    const double scale = 2.0 / static_cast<double>(s);
    out.L = scale * top + lambda_;
    out.mu = scale * bottom + lambda_;
  } else {
    out.L = top / (4.0 * static_cast<double>(s)) + lambda_;
    out.mu = lambda_;
  }
  return out;
}

AverageObjective::AverageObjective(std::vector<const Problem*> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw Error("AverageObjective needs at least one part");
  for (const Problem* p : parts_) {
    if (p == nullptr) throw Error("AverageObjective: null part");
    if (p->dim() != parts_.front()->dim()) {
      throw Error("AverageObjective: parts disagree on dimension");
    }
  }
}

Index AverageObjective::dim() const { return parts_.front()->dim(); }

Eval AverageObjective::eval(const Vector& x) const {
  Eval out;
  out.gradient = Vector::Zero(dim());
  const double inv_n = 1.0 / static_cast<double>(parts_.size());
  for (const Problem* p : parts_) {
    Eval e = p->eval(x);
    out.value += e.value * inv_n;
    out.gradient += inv_n * e.gradient;
  }
  return out;
}

}  // namespace fedkat
