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
//
// fedkat: run federated optimization experiments from JSON configs.
//
//   fedkat run --config cfg.json [--out trace.csv] [--format csv|json]
//              [--seed N] [--threads N]
//   fedkat constants --config cfg.json
//   fedkat verify --suite lemmas [--trials N]
//
// Exit codes: 0 success, 1 usage or input error, 2 divergence or a violated
// bound in `verify`.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fedkat/analysis.hpp"
#include "fedkat/errors.hpp"
#include "fedkat/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fedkat::Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw fedkat::Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw fedkat::Error("short write to '" + path + "'");
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& format, std::optional<std::uint64_t> seed,
            std::optional<int> threads) {
  fedkat::ExperimentConfig cfg = fedkat::config_from_json(slurp(config_path));
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;

  fedkat::ExperimentResult result = fedkat::run_experiment(cfg);
  const std::string text = format == "json"
                               ? fedkat::trace_to_json(result.trace)
                               : fedkat::trace_to_csv(result.trace);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    spill(out_path, text);
  }

  const fedkat::TraceRow& last = result.trace.rows.back();
  std::fprintf(stderr,
               "rounds=%ld scalars=%.17g subopt=%.17g target=%s lambda=%.17g\n",
               result.rounds, result.total_scalars, last.subopt,
               result.reached_target ? "reached" : "not-reached",
               result.lambda);
  return 0;
}

int cmd_constants(const std::string& config_path) {
  fedkat::ExperimentConfig cfg = fedkat::config_from_json(slurp(config_path));
  fedkat::ResolvedProblem rp = fedkat::resolve_problem(cfg);
  std::printf("samples=%td dim=%td lambda=%.17g\n", rp.problem.samples(),
              rp.problem.dim(), rp.lambda);
  std::printf("L=%.17g mu=%.17g Lbar=%.17g\n", rp.constants.L, rp.constants.mu,
              rp.constants.Lbar);
  if (cfg.regime == fedkat::Regime::kHorizontal && cfg.n > 1) {
    auto raw = fedkat::split_horizontal(rp.problem.data(), cfg.n,
                                        cfg.shuffle
                                            ? std::optional<std::uint64_t>(
                                                  cfg.seed)
                                            : std::nullopt);
    std::vector<fedkat::Problem> shards;
    shards.reserve(raw.size());
    for (auto& shard : raw) {
      shards.emplace_back(cfg.loss, std::move(shard.data), rp.lambda);
    }
    const fedkat::ProblemConstants dc = fedkat::distributed_constants(shards);
    std::printf("federation: L=%.17g mu=%.17g (n=%d)\n", dc.L, dc.mu, cfg.n);
  }
  return 0;
}

// Monte Carlo spot-checks of the three gradient-estimator second-moment
// bounds on a small synthetic least-squares instance.  Prints one PASS/FAIL
// line per bound; any FAIL flips the exit code to 1.
int cmd_verify(long trials) {
  using fedkat::Vector;

  fedkat::SyntheticSpec spec;
  spec.s = 60;
  spec.d = 12;
  spec.seed = 7;
  spec.cond_scale = 10.0;
  fedkat::Dataset ds = fedkat::make_synthetic(spec, fedkat::LossKind::kLeastSquares);

  const int n = 4;
  const int batch = 3;
  fedkat::Problem base(fedkat::LossKind::kLeastSquares, std::move(ds), 0.0);
  const double lambda = 0.01 * base.estimate_constants().L;
  fedkat::Problem problem = base.with_lambda(lambda);
  const fedkat::ProblemConstants c = problem.estimate_constants();

  // Evaluation pair: x from a few gradient steps, w = 0 (so w != x and the
  // Bregman gap is strictly positive).
  Vector w = Vector::Zero(problem.dim());
  Vector x = w;
  for (int i = 0; i < 5; ++i) x -= (1.0 / c.L) * problem.eval(x).gradient;

  bool all_pass = true;
  auto report = [&](const char* name, const fedkat::analysis::VarianceGap& gap) {
    const bool ok = gap.pass();
    all_pass = all_pass && ok;
    std::printf("[%s] %s  lhs=%.6g rhs=%.6g stderr=%.3g\n", name,
                ok ? "PASS" : "FAIL", gap.lhs, gap.rhs, gap.stderr_);
  };

  // Horizontal compressed estimate with RandK(d/4).
  {
    auto raw = fedkat::split_horizontal(problem.data(), n);
    std::vector<fedkat::Problem> shards;
    for (auto& shard : raw) {
      shards.emplace_back(problem.kind(), std::move(shard.data), lambda);
    }
    std::vector<const fedkat::Problem*> parts;
    for (const auto& p : shards) parts.push_back(&p);
    fedkat::AverageObjective avg(parts);

    fedkat::Fabric fabric(n, 99);
    fedkat::CompressorSpec cspec;
    cspec.kind = fedkat::CompressorSpec::Kind::kRandK;
    cspec.k = spec.d / 4;
    fedkat::WorkerCompressors comps =
        fedkat::make_compressors(cspec, n, spec.d, fabric);
    const double omega = comps.members[0]->omega();
    const double ltilde = c.L * omega / n;

    const auto diffs = fedkat::hfl::worker_grad_diffs(shards, x, w);
    const Vector anchor = Vector::Zero(spec.d);  // exact mean cancels in g - E g
    const Vector mean_grad = [&] {
      Vector g = anchor;
      for (int i = 0; i < n; ++i) g += diffs[i] / n;
      return g;
    }();
    auto draw = [&] {
      return fedkat::hfl::compressed_estimate(diffs, comps, anchor);
    };
    report("horizontal-compressed",
           fedkat::analysis::variance_gap(draw, mean_grad, ltilde,
                                          fedkat::analysis::bregman(avg, w, x),
                                          trials));
  }

  // Vertical importance-sampled estimate.
  {
    auto vp = fedkat::vfl::VerticalProblem::from_problem(problem, n);
    auto hp = fedkat::vfl::dvpl_params(c, batch, vp.s);
    auto fs = fedkat::vfl::freeze(vp, vp.scatter(x), vp.scatter(w));
    const Vector grad = problem.eval(x).gradient;
    fedkat::Fabric fabric(n, 100);
    auto draw = [&] {
      const auto J = fabric.shared_index_sample(hp.pj, hp.batch);
      return vp.assemble(fedkat::vfl::dvpl_estimate(vp, fs, hp, J));
    };
    report("vertical-sampled",
           fedkat::analysis::variance_gap(
               draw, grad, hp.Ltilde,
               fedkat::analysis::bregman(problem, w, x), trials));
  }

  // Vertical scalar-compressed estimate with natural dithering.
  {
    auto vp = fedkat::vfl::VerticalProblem::from_problem(problem, n);
    auto hp = fedkat::vfl::dvpl_scalar_params(c, batch, vp.s, 9.0 / 8.0);
    auto fs = fedkat::vfl::freeze(vp, vp.scatter(x), vp.scatter(w));
    const Vector grad = problem.eval(x).gradient;
    fedkat::Fabric fabric(n, 101);
    fedkat::CompressorSpec cspec;
    cspec.kind = fedkat::CompressorSpec::Kind::kNaturalDithering;
    fedkat::WorkerCompressors comps =
        fedkat::make_compressors(cspec, n, batch, fabric);
    auto draw = [&] {
      const auto J = fabric.shared_index_sample(hp.pj, hp.batch);
      return vp.assemble(fedkat::vfl::dvpl_scalar_estimate(vp, fs, comps, J));
    };
    report("vertical-scalar",
           fedkat::analysis::variance_gap(
               draw, grad, hp.Ltilde,
               fedkat::analysis::bregman(problem, w, x), trials));
  }

  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated optimization simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", suite = "lemmas";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  long trials = 20000;

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", out_path, "trace output path (default stdout)");
  run->add_option("--format", format, "trace format")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--threads", threads, "worker thread count override");

  CLI::App* constants = app.add_subcommand("constants", "print problem constants");
  constants->add_option("--config", config_path, "JSON config path")->required();

  CLI::App* verify = app.add_subcommand("verify", "check estimator bounds");
  verify->add_option("--suite", suite, "verification suite")
      ->check(CLI::IsMember({"lemmas"}));
  verify->add_option("--trials", trials, "Monte Carlo sample count")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help / the usage error
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_path, format, seed, threads);
    if (constants->parsed()) return cmd_constants(config_path);
    return cmd_verify(trials);
  } catch (const fedkat::DivergenceError& e) {
    std::fprintf(stderr, "error: diverged: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
