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

#ifndef FEDKAT_EXPERIMENT_HPP_
#define FEDKAT_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "fedkat/analysis.hpp"
#include "fedkat/comm.hpp"
#include "fedkat/compressor.hpp"
#include "fedkat/hfl.hpp"
#include "fedkat/problem.hpp"
#include "fedkat/vfl.hpp"

namespace fedkat {

enum class Regime { kHorizontal, kVertical };

enum class Algorithm {
  kDhpl,              // compressed horizontal Katyusha
  kGd,                // horizontal gradient descent baseline
  kAgd,               // horizontal Nesterov baseline
  kDvpl,              // importance-sampled vertical Katyusha
  kDvplScalar,        // vertical Katyusha with scalar-compressed products
  kDvplPermK,         // vertical Katyusha with permuted sample assignment
  kVerticalGd,        // vertical gradient descent baseline
  kVerticalNesterov,  // vertical Nesterov baseline
};

// Dense-ish synthetic design: entries i.i.d. standard normal, column c
// scaled by cond_scale^(-c/(d-1)) to spread the spectrum, entries kept with
// probability density.  Targets come from a planted normal weight vector
// plus noise; logistic labels are the sign of the noisy margin.
struct SyntheticSpec {
  Index s = 0;
  Index d = 0;
  std::uint64_t seed = 1;
  double density = 1.0;
  double cond_scale = 1.0;
  double noise = 0.1;

  bool operator==(const SyntheticSpec&) const = default;
};

struct CompressorSpec {
  enum class Kind { kIdentity, kRandK, kPermK, kNaturalDithering };
  Kind kind = Kind::kIdentity;
  Index k = 1;                 // RandK coordinate budget
  double beta = 64.0 / 9.0;    // dithering density coefficient

  bool operator==(const CompressorSpec&) const = default;
};

// Manual schedule overrides.  Defaults come from the corollary formulas;
// reported experiments use tuned parameters, so any field set here replaces
// its derived value (sigma always re-derives as mu / Ltilde, and eta
// re-derives from the thetas unless overridden itself).
struct ScheduleOverrides {
  std::optional<double> ltilde, theta1, theta2, p, eta;

  bool operator==(const ScheduleOverrides&) const = default;
};

struct ExperimentConfig {
  LossKind loss = LossKind::kLeastSquares;
  Regime regime = Regime::kHorizontal;
  Algorithm algorithm = Algorithm::kGd;
  int n = 1;

  std::optional<std::string> dataset_path;  // LIBSVM text
  std::optional<SyntheticSpec> synthetic;   // exactly one source must be set

  CompressorSpec compressor;  // dhpl and dvpl_scalar only
  int batch = 1;              // vertical product subsampling K

  // Ridge resolution: explicit lambda wins; otherwise lambda = lambda_ratio
  // times the unregularized smoothness constant (two-pass calibration).
  std::optional<double> lambda;
  double lambda_ratio = 0.01;

  double epsilon = 1e-8;   // stop once f(x) - f* <= epsilon
  long max_rounds = 100000;
  std::uint64_t seed = 1;
  Accounting accounting = Accounting::kPaperFaithful;
  bool shuffle = false;    // seeded row/column shuffle before splitting
  long trace_stride = 1;
  bool track_psi = false;  // record the Lyapunov potential per traced row
  int threads = 1;
  double ref_tol = 1e-10;  // reference solve accuracy

  ScheduleOverrides overrides;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct TraceRow {
  long round = 0;
  double scalars = 0.0;
  double subopt = 0.0;
  double dist2 = 0.0;
  double psi = 0.0;
  int coin = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
};

// CSV with the fixed header "round,scalars,subopt,dist2,psi,coin" and
// 17-significant-digit floats; parse(emit(t)) reproduces t exactly.  The
// JSON form is an array of row objects with the same keys.
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);
std::string trace_to_json(const Trace& trace);
Trace trace_from_json(const std::string& text);

Dataset make_synthetic(const SyntheticSpec& spec, LossKind loss);

// Builds one compressor per worker on streams derived from the fabric's
// master seed (PermK members share one family).
WorkerCompressors make_compressors(const CompressorSpec& spec, int n,
                                   Index dim, const Fabric& fabric);

// Dataset + two-pass ridge calibration + constants, shared by the runner
// and the `constants` CLI verb.
struct ResolvedProblem {
  Problem problem;
  ProblemConstants constants;
  double lambda = 0.0;
};

ResolvedProblem resolve_problem(const ExperimentConfig& cfg);

// Assumption-level constants of a horizontal federation: the worst shard
// smoothness bounds every local f_i, and strong convexity averages.
ProblemConstants distributed_constants(const std::vector<Problem>& shards);

struct ExperimentResult {
  Trace trace;
  Vector xstar;
  double fstar = 0.0;
  ProblemConstants constants;  // the constants the schedule was built from
  double lambda = 0.0;
  double omega = 1.0;          // resolved compressor coefficients
  double beta = 1.0;
  analysis::LyapunovParams params;  // zeros for the uncompressed baselines
  double total_scalars = 0.0;
  long rounds = 0;
  bool reached_target = false;
};

// Runs one configured experiment end to end: resolve the problem, split it,
// build the schedule (with overrides), iterate to the target suboptimality
// or max_rounds, and trace every trace_stride-th round plus round 0 and the
// final round.  Raises DivergenceError if the traced suboptimality exceeds
// ten times its initial value.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace fedkat

#endif  // FEDKAT_EXPERIMENT_HPP_
