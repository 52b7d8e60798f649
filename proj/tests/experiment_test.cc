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

#include "fedkat/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fedkat/analysis.hpp"
#include "fedkat/dataset.hpp"
#include "fedkat/errors.hpp"
#include "fedkat/problem.hpp"
#include "testutil.hpp"

using fedkat::Algorithm;
using fedkat::CompressorSpec;
using fedkat::Dataset;
using fedkat::ExperimentConfig;
using fedkat::ExperimentResult;
using fedkat::Index;
using fedkat::LossKind;
using fedkat::Problem;
using fedkat::ProblemConstants;
using fedkat::Regime;
using fedkat::SyntheticSpec;
using fedkat::Trace;
using fedkat::TraceRow;
using fedkat::Vector;
using fedkat::testutil::dense_dataset;

namespace {

ExperimentConfig small_horizontal() {
  ExperimentConfig cfg;
  cfg.loss = LossKind::kLeastSquares;
  cfg.regime = Regime::kHorizontal;
  cfg.algorithm = Algorithm::kDhpl;
  cfg.n = 3;
  SyntheticSpec spec;
  spec.s = 30;
  spec.d = 9;
  spec.seed = 11;
  cfg.synthetic = spec;
  cfg.compressor.kind = CompressorSpec::Kind::kRandK;
  cfg.compressor.k = 3;
  cfg.lambda_ratio = 0.05;
  cfg.epsilon = 1e-6;
  cfg.max_rounds = 20000;
  cfg.seed = 7;
  cfg.trace_stride = 50;
  return cfg;
}

ExperimentConfig small_vertical() {
  ExperimentConfig cfg;
  cfg.loss = LossKind::kLeastSquares;
  cfg.regime = Regime::kVertical;
  cfg.algorithm = Algorithm::kDvpl;
  cfg.n = 4;
  SyntheticSpec spec;
  spec.s = 24;
  spec.d = 8;
  spec.seed = 5;
  cfg.synthetic = spec;
  cfg.batch = 3;
  cfg.lambda_ratio = 0.05;
  cfg.epsilon = 1e-6;
  cfg.max_rounds = 50000;
  cfg.seed = 9;
  cfg.trace_stride = 100;
  return cfg;
}

bool rows_equal(const TraceRow& a, const TraceRow& b) {
  return a.round == b.round && a.scalars == b.scalars &&
         a.subopt == b.subopt && a.dist2 == b.dist2 && a.psi == b.psi &&
         a.coin == b.coin;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config JSON round-trips every field") {
  ExperimentConfig cfg;
  cfg.loss = LossKind::kLogistic;
  cfg.regime = Regime::kVertical;
  cfg.algorithm = Algorithm::kDvplScalar;
  cfg.n = 7;
  cfg.dataset_path = "data/somewhere.libsvm";
  SyntheticSpec spec;
  spec.s = 123;
  spec.d = 45;
  spec.seed = 99;
  spec.density = 0.25;
  spec.cond_scale = 30.0;
  spec.noise = 0.5;
  cfg.synthetic = spec;
  cfg.compressor.kind = CompressorSpec::Kind::kNaturalDithering;
  cfg.compressor.k = 4;
  cfg.compressor.beta = 3.5;
  cfg.batch = 6;
  cfg.lambda = 0.125;
  cfg.lambda_ratio = 0.5;
  cfg.epsilon = 1e-9;
  cfg.max_rounds = 777;
  cfg.seed = 31337;
  cfg.accounting = fedkat::Accounting::kStrict;
  cfg.shuffle = true;
  cfg.trace_stride = 13;
  cfg.track_psi = true;
  cfg.threads = 5;
  cfg.ref_tol = 1e-9;
  cfg.overrides.ltilde = 12.0;
  cfg.overrides.theta1 = 0.4;
  cfg.overrides.theta2 = 0.3;
  cfg.overrides.p = 0.1;
  cfg.overrides.eta = 0.9;

  const ExperimentConfig back = fedkat::config_from_json(
      fedkat::config_to_json(cfg));
  CHECK(back == cfg);

  // An empty object parses to the default config.
  CHECK(fedkat::config_from_json("{}") == ExperimentConfig{});
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS(fedkat::config_from_json("[]"), fedkat::ParseError);
  CHECK_THROWS_AS(fedkat::config_from_json("{\"losss\": \"logistic\"}"),
                  fedkat::ParseError);
  CHECK_THROWS_AS(fedkat::config_from_json("{\"loss\": \"huber\"}"),
                  fedkat::ParseError);
  CHECK_THROWS_AS(fedkat::config_from_json("{\"algorithm\": \"sgd\"}"),
                  fedkat::ParseError);
  CHECK_THROWS_AS(fedkat::config_from_json("{\"overrides\": {\"rho\": 1}}"),
                  fedkat::ParseError);
  CHECK_THROWS_AS(
      fedkat::config_from_json("{\"dataset\": {\"synthetic\": {\"q\": 1}}}"),
      fedkat::ParseError);
  CHECK_THROWS_AS(fedkat::config_from_json("not json"), fedkat::ParseError);
}

TEST_CASE("trace CSV and JSON round-trip exactly") {
  Trace t;
  t.rows.push_back(TraceRow{0, 0.0, 1.0 / 3.0, 2.5, 0.0, 0});
  t.rows.push_back(TraceRow{17, 42.5, 1e-300, 0.0625, 3.14159, 1});
  t.rows.push_back(TraceRow{100000, 1.2e8, -2.5e17, 7e-12, 0.1, 0});

  const std::string csv = fedkat::trace_to_csv(t);
  const Trace back = fedkat::trace_from_csv(csv);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(rows_equal(back.rows[i], t.rows[i]));
  }

  // Header line is fixed and enforced.
  CHECK(csv.rfind("round,scalars,subopt,dist2,psi,coin\n", 0) == 0);
  CHECK_THROWS_AS(fedkat::trace_from_csv("wrong,header\n1,2\n"),
                  fedkat::ParseError);
  CHECK_THROWS_AS(
      fedkat::trace_from_csv("round,scalars,subopt,dist2,psi,coin\n1,2\n"),
      fedkat::ParseError);

  // One row means exactly two lines.
  Trace one;
  one.rows.push_back(TraceRow{3, 6.0, 0.5, 0.25, 0.0, 1});
  const std::string single = fedkat::trace_to_csv(one);
  long newlines = 0;
  for (const char ch : single) newlines += ch == '\n' ? 1 : 0;
  CHECK(newlines == 2);

  // JSON carries the same values.
  const Trace jback = fedkat::trace_from_json(fedkat::trace_to_json(t));
  REQUIRE(jback.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(rows_equal(jback.rows[i], t.rows[i]));
  }

  // Empty traces cannot be emitted.
  CHECK_THROWS_AS(fedkat::trace_to_csv(Trace{}), fedkat::Error);
  CHECK_THROWS_AS(fedkat::trace_to_json(Trace{}), fedkat::Error);
}

TEST_CASE("make_synthetic is a pure function of its spec") {
  SyntheticSpec spec;
  spec.s = 30;
  spec.d = 8;
  spec.seed = 77;
  spec.density = 0.6;

  const Dataset a = fedkat::make_synthetic(spec, LossKind::kLeastSquares);
  const Dataset b = fedkat::make_synthetic(spec, LossKind::kLeastSquares);
  CHECK(fedkat::datasets_equal(a, b));
  CHECK(a.rows() == 30);
  CHECK(a.cols() == 8);
  CHECK(a.entries.nonZeros() > 0);
  CHECK(a.entries.nonZeros() < 30 * 8);

  SyntheticSpec other = spec;
  other.seed = 78;
  CHECK_FALSE(fedkat::datasets_equal(
      a, fedkat::make_synthetic(other, LossKind::kLeastSquares)));

  const Dataset logit = fedkat::make_synthetic(spec, LossKind::kLogistic);
  for (Index r = 0; r < logit.rows(); ++r) {
    CHECK(std::abs(logit.labels[r]) == 1.0);
  }

  CHECK_THROWS_AS(
      fedkat::make_synthetic(SyntheticSpec{}, LossKind::kLeastSquares),
      fedkat::Error);
  SyntheticSpec bad = spec;
  bad.density = 0.0;
  CHECK_THROWS_AS(fedkat::make_synthetic(bad, LossKind::kLeastSquares),
                  fedkat::Error);
  bad.density = 1.5;
  CHECK_THROWS_AS(fedkat::make_synthetic(bad, LossKind::kLeastSquares),
                  fedkat::Error);
  bad = spec;
  bad.cond_scale = 0.5;
  CHECK_THROWS_AS(fedkat::make_synthetic(bad, LossKind::kLeastSquares),
                  fedkat::Error);
  bad = spec;
  bad.noise = -1.0;
  CHECK_THROWS_AS(fedkat::make_synthetic(bad, LossKind::kLeastSquares),
                  fedkat::Error);
}

TEST_CASE("cond_scale spreads the spectrum") {
  SyntheticSpec flat;
  flat.s = 60;
  flat.d = 6;
  flat.seed = 3;
  SyntheticSpec spread = flat;
  spread.cond_scale = 100.0;

  const Problem pf(LossKind::kLeastSquares,
                   fedkat::make_synthetic(flat, LossKind::kLeastSquares), 0.0);
  const Problem ps(
      LossKind::kLeastSquares,
      fedkat::make_synthetic(spread, LossKind::kLeastSquares), 0.0);
  const ProblemConstants cf = pf.estimate_constants();
  const ProblemConstants cs = ps.estimate_constants();
  REQUIRE(cf.mu > 0.0);
  REQUIRE(cs.mu > 0.0);
  CHECK(cs.L / cs.mu > 10.0 * (cf.L / cf.mu));
}

TEST_CASE("make_compressors builds the requested kinds") {
  const fedkat::Fabric fabric(3, 0x5eedull);

  CompressorSpec spec;
  spec.kind = CompressorSpec::Kind::kIdentity;
  fedkat::WorkerCompressors id = fedkat::make_compressors(spec, 3, 10, fabric);
  CHECK(id.size() == 3);
  CHECK(id.members[0]->omega() == 1.0);
  CHECK(id.aggregate_beta() == 1.0);
  CHECK(id.permk == nullptr);

  spec.kind = CompressorSpec::Kind::kRandK;
  spec.k = 2;
  fedkat::WorkerCompressors rk = fedkat::make_compressors(spec, 3, 10, fabric);
  CHECK(rk.members[0]->omega() == 5.0);
  CHECK(rk.aggregate_beta() == 5.0);

  spec.kind = CompressorSpec::Kind::kNaturalDithering;
  fedkat::WorkerCompressors nd = fedkat::make_compressors(spec, 3, 10, fabric);
  CHECK(nd.members[0]->omega() == doctest::Approx(9.0 / 8.0).epsilon(1e-15));
  CHECK(nd.aggregate_beta() == doctest::Approx(64.0 / 9.0).epsilon(1e-15));
  spec.beta = 4.0;
  fedkat::WorkerCompressors nd4 = fedkat::make_compressors(spec, 3, 10, fabric);
  CHECK(nd4.aggregate_beta() == 4.0);

  spec.kind = CompressorSpec::Kind::kPermK;
  fedkat::WorkerCompressors pk = fedkat::make_compressors(spec, 3, 9, fabric);
  CHECK(pk.permk != nullptr);
  CHECK(pk.size() == 3);
  CHECK(pk.aggregate_beta() == 3.0);
  CHECK_THROWS_AS(pk.members[0]->omega(), fedkat::Error);

  CHECK_THROWS_AS(fedkat::make_compressors(spec, 0, 9, fabric), fedkat::Error);
}

TEST_CASE("resolve_problem calibrates the ridge in two passes") {
  SyntheticSpec spec;
  spec.s = 25;
  spec.d = 6;
  spec.seed = 21;

  ExperimentConfig cfg;
  cfg.loss = LossKind::kLeastSquares;
  cfg.synthetic = spec;

  const Dataset ds = fedkat::make_synthetic(spec, LossKind::kLeastSquares);
  const ProblemConstants c0 =
      Problem(LossKind::kLeastSquares, ds, 0.0).estimate_constants();

  // Ratio path: lambda is exactly ratio times the unregularized smoothness.
  cfg.lambda_ratio = 0.02;
  const fedkat::ResolvedProblem ratio = fedkat::resolve_problem(cfg);
  CHECK(ratio.lambda == 0.02 * c0.L);
  CHECK(ratio.constants.L == c0.L + ratio.lambda);
  CHECK(ratio.constants.mu == c0.mu + ratio.lambda);
  CHECK(ratio.problem.lambda() == ratio.lambda);
  // Least-squares per-sample constants carry no ridge term.
  CHECK(fedkat::testutil::bitwise_equal(ratio.constants.Lj, c0.Lj));

  // Explicit lambda wins over the ratio.
  cfg.lambda = 0.3;
  const fedkat::ResolvedProblem expl = fedkat::resolve_problem(cfg);
  CHECK(expl.lambda == 0.3);
  CHECK(expl.constants.L == c0.L + 0.3);

  // Logistic per-sample constants do absorb the ridge.
  ExperimentConfig lcfg;
  lcfg.loss = LossKind::kLogistic;
  lcfg.synthetic = spec;
  lcfg.lambda = 0.25;
  const fedkat::ResolvedProblem logi = fedkat::resolve_problem(lcfg);
  const ProblemConstants lc0 =
      Problem(LossKind::kLogistic,
              fedkat::make_synthetic(spec, LossKind::kLogistic), 0.0)
          .estimate_constants();
  CHECK(fedkat::testutil::bitwise_equal(
      logi.constants.Lj, Vector(lc0.Lj.array() + 0.25)));
  CHECK(logi.constants.Lbar ==
        doctest::Approx(lc0.Lbar + 0.25).epsilon(1e-14));

  // Validation.
  ExperimentConfig bad;
  CHECK_THROWS_AS(fedkat::resolve_problem(bad), fedkat::Error);
  bad.synthetic = spec;
  bad.dataset_path = "also-set.libsvm";
  CHECK_THROWS_AS(fedkat::resolve_problem(bad), fedkat::Error);
  ExperimentConfig neg;
  neg.synthetic = spec;
  neg.lambda = -0.1;
  CHECK_THROWS_AS(fedkat::resolve_problem(neg), fedkat::Error);
  ExperimentConfig negr;
  negr.synthetic = spec;
  negr.lambda_ratio = -0.5;
  CHECK_THROWS_AS(fedkat::resolve_problem(negr), fedkat::Error);
}

TEST_CASE("distributed_constants takes the worst smoothness, mean convexity") {
  std::vector<Problem> shards;
  shards.emplace_back(LossKind::kLeastSquares,
                      dense_dataset({{1.0, 0.0}, {0.0, 2.0}}, {0.0, 0.0}),
                      0.0);
  shards.emplace_back(LossKind::kLeastSquares,
                      dense_dataset({{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0}),
                      0.0);
  const ProblemConstants c = fedkat::distributed_constants(shards);
  CHECK(c.L == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(c.mu == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(fedkat::distributed_constants({}), fedkat::Error);
}

TEST_CASE("run_experiment stops immediately when the start already qualifies") {
  ExperimentConfig cfg = small_horizontal();
  cfg.epsilon = 1e12;
  const ExperimentResult res = fedkat::run_experiment(cfg);
  CHECK(res.reached_target);
  CHECK(res.rounds == 0);
  REQUIRE(res.trace.rows.size() == 1);
  CHECK(res.trace.rows[0].round == 0);
  CHECK(res.trace.rows[0].scalars == 0.0);
  CHECK(res.total_scalars == 0.0);
}

TEST_CASE("run_experiment is deterministic in config and thread count") {
  const ExperimentConfig cfg = small_horizontal();
  const ExperimentResult a = fedkat::run_experiment(cfg);
  const ExperimentResult b = fedkat::run_experiment(cfg);
  REQUIRE(a.reached_target);
  CHECK(fedkat::trace_to_csv(a.trace) == fedkat::trace_to_csv(b.trace));

  ExperimentConfig threaded = cfg;
  threaded.threads = 4;
  const ExperimentResult c = fedkat::run_experiment(threaded);
  CHECK(fedkat::trace_to_csv(a.trace) == fedkat::trace_to_csv(c.trace));

  const ExperimentConfig vcfg = small_vertical();
  const ExperimentResult va = fedkat::run_experiment(vcfg);
  ExperimentConfig vthreaded = vcfg;
  vthreaded.threads = 4;
  const ExperimentResult vb = fedkat::run_experiment(vthreaded);
  REQUIRE(va.reached_target);
  CHECK(fedkat::trace_to_csv(va.trace) == fedkat::trace_to_csv(vb.trace));
}

TEST_CASE("run_experiment raises on divergent schedules") {
  ExperimentConfig cfg = small_horizontal();
  cfg.overrides.eta = 1e6;
  cfg.max_rounds = 500;
  CHECK_THROWS_AS(fedkat::run_experiment(cfg), fedkat::DivergenceError);
}

TEST_CASE("run_experiment validates the regime pairing") {
  ExperimentConfig cfg = small_horizontal();
  cfg.algorithm = Algorithm::kDvpl;
  CHECK_THROWS_AS(fedkat::run_experiment(cfg), fedkat::Error);

  ExperimentConfig vcfg = small_vertical();
  vcfg.algorithm = Algorithm::kGd;
  CHECK_THROWS_AS(fedkat::run_experiment(vcfg), fedkat::Error);

  ExperimentConfig scalar_logit = small_vertical();
  scalar_logit.algorithm = Algorithm::kDvplScalar;
  scalar_logit.loss = LossKind::kLogistic;
  CHECK_THROWS_AS(fedkat::run_experiment(scalar_logit), fedkat::Error);

  ExperimentConfig bad = small_horizontal();
  bad.n = 0;
  CHECK_THROWS_AS(fedkat::run_experiment(bad), fedkat::Error);
  bad = small_horizontal();
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(fedkat::run_experiment(bad), fedkat::Error);
  bad = small_horizontal();
  bad.trace_stride = 0;
  CHECK_THROWS_AS(fedkat::run_experiment(bad), fedkat::Error);
  bad = small_horizontal();
  bad.threads = 0;
  CHECK_THROWS_AS(fedkat::run_experiment(bad), fedkat::Error);
}

TEST_CASE("vertical run meets the corollary complexity with slack") {
  ExperimentConfig cfg = small_vertical();
  cfg.synthetic->s = 40;
  cfg.synthetic->d = 10;
  cfg.n = 5;
  cfg.batch = 4;
  cfg.epsilon = 1e-8;
  cfg.max_rounds = 400000;
  cfg.trace_stride = 1000;
  const ExperimentResult res = fedkat::run_experiment(cfg);
  REQUIRE(res.reached_target);

  // Rate certificate: rounds <= 20 ln(Psi0 / eps) / (1 - rho) for the
  // schedule the run actually used.
  const double rho =
      fedkat::analysis::contraction_factor(res.params);
  REQUIRE(rho < 1.0);
  const fedkat::ResolvedProblem rp = fedkat::resolve_problem(cfg);
  const Vector zero = Vector::Zero(rp.problem.dim());
  const fedkat::analysis::LyapunovComponents psi0 = fedkat::analysis::lyapunov(
      zero, zero, zero, res.params, res.xstar, res.fstar, rp.problem);
  REQUIRE(psi0.Psi > cfg.epsilon);
  const double bound =
      20.0 * std::log(psi0.Psi / cfg.epsilon) / (1.0 - rho);
  CHECK(static_cast<double>(res.rounds) <= bound);
}

TEST_CASE("golden traces replay byte for byte") {
  const char* names[] = {"golden_dhpl_permk", "golden_agd",
                         "golden_dvpl_randk", "golden_dvpl_scalar",
                         "golden_dvpl_permk", "golden_vnesterov"};
  const bool regen = std::getenv("FEDKAT_REGEN_GOLDEN") != nullptr;
  for (const char* name : names) {
    CAPTURE(name);
    const std::string base = std::string(FEDKAT_GOLDEN_DIR) + "/" + name;
    const ExperimentConfig cfg =
        fedkat::config_from_json(read_file(base + ".json"));
    const ExperimentResult res = fedkat::run_experiment(cfg);
    REQUIRE(res.reached_target);
    const std::string csv = fedkat::trace_to_csv(res.trace);
    if (regen) {
      std::ofstream out(base + ".csv", std::ios::binary);
      REQUIRE(out);
      out << csv;
      continue;
    }
    CHECK(csv == read_file(base + ".csv"));
  }
}
