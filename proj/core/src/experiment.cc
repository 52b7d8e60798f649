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

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "fedkat/errors.hpp"
#include "json.hpp"

namespace fedkat {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum <-> string tables.  Parsing is strict: an unknown name is a config
// error, not a silent default.

const char* to_name(LossKind v) {
  return v == LossKind::kLogistic ? "logistic" : "least_squares";
}

const char* to_name(Regime v) {
  return v == Regime::kHorizontal ? "horizontal" : "vertical";
}

const char* to_name(Algorithm v) {
  switch (v) {
    case Algorithm::kDhpl: return "dhpl";
    case Algorithm::kGd: return "gd";
    case Algorithm::kAgd: return "agd";
    case Algorithm::kDvpl: return "dvpl";
    case Algorithm::kDvplScalar: return "dvpl_scalar";
    case Algorithm::kDvplPermK: return "dvpl_permk";
    case Algorithm::kVerticalGd: return "vertical_gd";
    case Algorithm::kVerticalNesterov: return "vertical_nesterov";
  }
  return "gd";
}

const char* to_name(CompressorSpec::Kind v) {
  switch (v) {
    case CompressorSpec::Kind::kIdentity: return "identity";
    case CompressorSpec::Kind::kRandK: return "randk";
    case CompressorSpec::Kind::kPermK: return "permk";
    case CompressorSpec::Kind::kNaturalDithering: return "natural_dithering";
  }
  return "identity";
}

const char* to_name(Accounting v) {
  return v == Accounting::kPaperFaithful ? "paper" : "strict";
}

template <typename E>
E enum_from(const std::string& name, std::initializer_list<E> values,
            const char* what) {
  for (E v : values) {
    if (name == to_name(v)) return v;
  }
  throw ParseError("unknown " + std::string(what) + " '" + name + "'");
}

LossKind loss_from(const std::string& s) {
  return enum_from(s, {LossKind::kLogistic, LossKind::kLeastSquares}, "loss");
}

Regime regime_from(const std::string& s) {
  return enum_from(s, {Regime::kHorizontal, Regime::kVertical}, "regime");
}

Algorithm algorithm_from(const std::string& s) {
  return enum_from(s,
                   {Algorithm::kDhpl, Algorithm::kGd, Algorithm::kAgd,
                    Algorithm::kDvpl, Algorithm::kDvplScalar,
                    Algorithm::kDvplPermK, Algorithm::kVerticalGd,
                    Algorithm::kVerticalNesterov},
                   "algorithm");
}

CompressorSpec::Kind compressor_from(const std::string& s) {
  return enum_from(s,
                   {CompressorSpec::Kind::kIdentity, CompressorSpec::Kind::kRandK,
                    CompressorSpec::Kind::kPermK,
                    CompressorSpec::Kind::kNaturalDithering},
                   "compressor kind");
}

Accounting accounting_from(const std::string& s) {
  return enum_from(s, {Accounting::kPaperFaithful, Accounting::kStrict},
                   "accounting mode");
}

// Rejects keys outside the schema so config typos fail loudly instead of
// silently falling back to a default.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ParseError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config serialization.

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  check_keys(j,
             {"loss", "regime", "algorithm", "n", "dataset", "compressor",
              "batch", "lambda", "lambda_ratio", "epsilon", "max_rounds",
              "seed", "accounting", "shuffle", "trace_stride", "track_psi",
              "threads", "ref_tol", "overrides"},
             "config");

  ExperimentConfig cfg;
  try {
    if (j.contains("loss")) cfg.loss = loss_from(j.at("loss").get<std::string>());
    if (j.contains("regime"))
      cfg.regime = regime_from(j.at("regime").get<std::string>());
    if (j.contains("algorithm"))
      cfg.algorithm = algorithm_from(j.at("algorithm").get<std::string>());
    cfg.n = j.value("n", cfg.n);

    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      check_keys(d, {"path", "synthetic"}, "dataset");
      if (d.contains("path")) cfg.dataset_path = d.at("path").get<std::string>();
      if (d.contains("synthetic")) {
        const json& s = d.at("synthetic");
        check_keys(s, {"s", "d", "seed", "density", "cond_scale", "noise"},
                   "dataset.synthetic");
        SyntheticSpec spec;
        spec.s = s.value("s", spec.s);
        spec.d = s.value("d", spec.d);
        spec.seed = s.value("seed", spec.seed);
        spec.density = s.value("density", spec.density);
        spec.cond_scale = s.value("cond_scale", spec.cond_scale);
        spec.noise = s.value("noise", spec.noise);
        cfg.synthetic = spec;
      }
    }

    if (j.contains("compressor")) {
      const json& c = j.at("compressor");
      check_keys(c, {"kind", "k", "beta"}, "compressor");
      if (c.contains("kind"))
        cfg.compressor.kind = compressor_from(c.at("kind").get<std::string>());
      cfg.compressor.k = c.value("k", cfg.compressor.k);
      cfg.compressor.beta = c.value("beta", cfg.compressor.beta);
    }

    cfg.batch = j.value("batch", cfg.batch);
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    cfg.lambda_ratio = j.value("lambda_ratio", cfg.lambda_ratio);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("accounting"))
      cfg.accounting = accounting_from(j.at("accounting").get<std::string>());
    cfg.shuffle = j.value("shuffle", cfg.shuffle);
    cfg.trace_stride = j.value("trace_stride", cfg.trace_stride);
    cfg.track_psi = j.value("track_psi", cfg.track_psi);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.ref_tol = j.value("ref_tol", cfg.ref_tol);

    if (j.contains("overrides")) {
      const json& o = j.at("overrides");
      check_keys(o, {"ltilde", "theta1", "theta2", "p", "eta"}, "overrides");
      if (o.contains("ltilde")) cfg.overrides.ltilde = o.at("ltilde").get<double>();
      if (o.contains("theta1")) cfg.overrides.theta1 = o.at("theta1").get<double>();
      if (o.contains("theta2")) cfg.overrides.theta2 = o.at("theta2").get<double>();
      if (o.contains("p")) cfg.overrides.p = o.at("p").get<double>();
      if (o.contains("eta")) cfg.overrides.eta = o.at("eta").get<double>();
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["loss"] = to_name(cfg.loss);
  j["regime"] = to_name(cfg.regime);
  j["algorithm"] = to_name(cfg.algorithm);
  j["n"] = cfg.n;

  if (cfg.dataset_path || cfg.synthetic) {
    json d = json::object();
    if (cfg.dataset_path) d["path"] = *cfg.dataset_path;
    if (cfg.synthetic) {
      const SyntheticSpec& s = *cfg.synthetic;
      d["synthetic"] = {{"s", s.s},         {"d", s.d},
                        {"seed", s.seed},   {"density", s.density},
                        {"cond_scale", s.cond_scale}, {"noise", s.noise}};
    }
    j["dataset"] = std::move(d);
  }

  j["compressor"] = {{"kind", to_name(cfg.compressor.kind)},
                     {"k", cfg.compressor.k},
                     {"beta", cfg.compressor.beta}};
  j["batch"] = cfg.batch;
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  j["lambda_ratio"] = cfg.lambda_ratio;
  j["epsilon"] = cfg.epsilon;
  j["max_rounds"] = cfg.max_rounds;
  j["seed"] = cfg.seed;
  j["accounting"] = to_name(cfg.accounting);
  j["shuffle"] = cfg.shuffle;
  j["trace_stride"] = cfg.trace_stride;
  j["track_psi"] = cfg.track_psi;
  j["threads"] = cfg.threads;
  j["ref_tol"] = cfg.ref_tol;

  json o = json::object();
  if (cfg.overrides.ltilde) o["ltilde"] = *cfg.overrides.ltilde;
  if (cfg.overrides.theta1) o["theta1"] = *cfg.overrides.theta1;
  if (cfg.overrides.theta2) o["theta2"] = *cfg.overrides.theta2;
  if (cfg.overrides.p) o["p"] = *cfg.overrides.p;
  if (cfg.overrides.eta) o["eta"] = *cfg.overrides.eta;
  if (!o.empty()) j["overrides"] = std::move(o);

  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Trace serialization.

namespace {
constexpr const char* kTraceHeader = "round,scalars,subopt,dist2,psi,coin";

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T out{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("bad field '" + std::string(field) + "'", line);
  }
  return out;
}
}  // namespace

std::string trace_to_csv(const Trace& trace) {
  if (trace.rows.empty()) throw Error("refusing to emit an empty trace");
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.round);
    out += ',';
    out += fmt17(r.scalars);
    out += ',';
    out += fmt17(r.subopt);
    out += ',';
    out += fmt17(r.dist2);
    out += ',';
    out += fmt17(r.psi);
    out += ',';
    out += std::to_string(r.coin);
    out += '\n';
  }
  return out;
}

Trace trace_from_csv(const std::string& text) {
  Trace trace;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kTraceHeader) {
        throw ParseError("expected header '" + std::string(kTraceHeader) + "'",
                         line_no);
      }
      saw_header = true;
      continue;
    }
    std::array<std::string_view, 6> fields;
    std::size_t start = 0;
    for (int f = 0; f < 6; ++f) {
      std::size_t comma = f < 5 ? line.find(',', start) : line.size();
      if (comma == std::string_view::npos) {
        throw ParseError("expected 6 comma-separated fields", line_no);
      }
      fields[static_cast<std::size_t>(f)] = line.substr(start, comma - start);
      start = comma + 1;
    }
    TraceRow r;
    r.round = parse_field<long>(fields[0], line_no);
    r.scalars = parse_field<double>(fields[1], line_no);
    r.subopt = parse_field<double>(fields[2], line_no);
    r.dist2 = parse_field<double>(fields[3], line_no);
    r.psi = parse_field<double>(fields[4], line_no);
    r.coin = parse_field<int>(fields[5], line_no);
    trace.rows.push_back(r);
  }
  if (!saw_header) throw ParseError("empty trace");
  return trace;
}

std::string trace_to_json(const Trace& trace) {
  if (trace.rows.empty()) throw Error("refusing to emit an empty trace");
  json rows = json::array();
  for (const TraceRow& r : trace.rows) {
    rows.push_back({{"round", r.round},
                    {"scalars", r.scalars},
                    {"subopt", r.subopt},
                    {"dist2", r.dist2},
                    {"psi", r.psi},
                    {"coin", r.coin}});
  }
  return rows.dump(2) + "\n";
}

Trace trace_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("trace: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("trace: expected an array of rows");
  Trace trace;
  try {
    for (const json& r : j) {
      TraceRow row;
      row.round = r.at("round").get<long>();
      row.scalars = r.at("scalars").get<double>();
      row.subopt = r.at("subopt").get<double>();
      row.dist2 = r.at("dist2").get<double>();
      row.psi = r.at("psi").get<double>();
      row.coin = r.at("coin").get<int>();
      trace.rows.push_back(row);
    }
  } catch (const std::exception& e) {
    throw ParseError(std::string("trace: ") + e.what());
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Synthetic data.

Dataset make_synthetic(const SyntheticSpec& spec, LossKind loss) {
  if (spec.s <= 0 || spec.d <= 0) {
    throw Error("synthetic spec needs positive s and d");
  }
  if (!(spec.density > 0.0) || spec.density > 1.0) {
    throw Error("synthetic density must be in (0, 1]");
  }
  if (spec.cond_scale < 1.0) throw Error("cond_scale must be >= 1");
  if (spec.noise < 0.0) throw Error("noise must be >= 0");

  Rng rng = Rng::derive(spec.seed, stream_tag::kSyntheticData);

  // Column scales spread geometrically from 1 down to 1/cond_scale.
  Vector scale(spec.d);
  for (Index c = 0; c < spec.d; ++c) {
    scale[c] = spec.d > 1
                   ? std::pow(spec.cond_scale,
                              -static_cast<double>(c) /
                                  static_cast<double>(spec.d - 1))
                   : 1.0;
  }

  // Draw order is part of the format: per entry one keep-uniform (always),
  // then one normal when kept; then the planted weights; then one noise
  // normal per row.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(
      static_cast<double>(spec.s * spec.d) * spec.density + 16.0));
  for (Index r = 0; r < spec.s; ++r) {
    for (Index c = 0; c < spec.d; ++c) {
      const double keep = rng.next_double();
      if (keep < spec.density) {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c),
                              rng.next_normal() * scale[c]);
      }
    }
  }
  SpMat entries(spec.s, spec.d);
  entries.setFromTriplets(triplets.begin(), triplets.end());
  entries.makeCompressed();

  Vector planted(spec.d);
  for (Index c = 0; c < spec.d; ++c) planted[c] = rng.next_normal();
  const Vector margins = entries * planted;

  Vector labels(spec.s);
  for (Index r = 0; r < spec.s; ++r) {
    const double y = margins[r] + spec.noise * rng.next_normal();
    labels[r] = loss == LossKind::kLogistic ? (y >= 0.0 ? 1.0 : -1.0) : y;
  }
  return Dataset{std::move(entries), std::move(labels)};
}

// ---------------------------------------------------------------------------
// Compressor factory.

WorkerCompressors make_compressors(const CompressorSpec& spec, int n,
                                   Index dim, const Fabric& fabric) {
  if (n < 1) throw Error("need at least one worker");
  WorkerCompressors wc;
  wc.members.reserve(static_cast<std::size_t>(n));
  switch (spec.kind) {
    case CompressorSpec::Kind::kIdentity:
      for (int i = 0; i < n; ++i) {
        wc.members.push_back(std::make_unique<IdentityCompressor>(dim));
      }
      break;
    case CompressorSpec::Kind::kRandK:
      for (int i = 0; i < n; ++i) {
        wc.members.push_back(std::make_unique<RandKCompressor>(
            dim, spec.k, fabric.compressor_stream(i)));
      }
      break;
    case CompressorSpec::Kind::kNaturalDithering:
      for (int i = 0; i < n; ++i) {
        wc.members.push_back(std::make_unique<NaturalDitheringCompressor>(
            dim, fabric.compressor_stream(i), spec.beta));
      }
      break;
    case CompressorSpec::Kind::kPermK: {
      auto family = std::make_shared<PermKFamily>(
          n, dim,
          Rng::derive(fabric.master_seed(), stream_tag::kPermFamily));
      for (int i = 0; i < n; ++i) {
        wc.members.push_back(
            std::make_unique<PermKMemberCompressor>(family, i));
      }
      wc.permk = std::move(family);
      break;
    }
  }
  return wc;
}

// ---------------------------------------------------------------------------
// Problem resolution.

ResolvedProblem resolve_problem(const ExperimentConfig& cfg) {
  if (cfg.dataset_path && cfg.synthetic) {
    throw Error("config sets both a dataset path and a synthetic spec");
  }
  Dataset ds;
  if (cfg.dataset_path) {
    std::ifstream in(*cfg.dataset_path);
    if (!in) throw Error("cannot open dataset '" + *cfg.dataset_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    ds = parse_libsvm(buf.str());
  } else if (cfg.synthetic) {
    ds = make_synthetic(*cfg.synthetic, cfg.loss);
  } else {
    throw Error("config needs a dataset path or a synthetic spec");
  }

  Problem base(cfg.loss, std::move(ds), 0.0);
  const ProblemConstants c0 = base.estimate_constants();

  double lambda;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else {
    if (cfg.lambda_ratio < 0.0) throw Error("lambda_ratio must be >= 0");
    lambda = cfg.lambda_ratio * c0.L;
  }
  if (lambda < 0.0) throw Error("lambda must be >= 0");

  // estimate_constants() adds the ridge additively on top of the spectral
  // part, so the calibrated constants follow from the lambda = 0 pass
  // without a second power iteration.
  ResolvedProblem rp{base.with_lambda(lambda), c0, lambda};
  rp.constants.L = c0.L + lambda;
  rp.constants.mu = c0.mu + lambda;
  if (cfg.loss == LossKind::kLogistic) {
    rp.constants.Lj = c0.Lj.array() + lambda;
  }
  rp.constants.Lbar = rp.constants.Lj.size() > 0 ? rp.constants.Lj.mean() : 0.0;
  return rp;
}

ProblemConstants distributed_constants(const std::vector<Problem>& shards) {
  if (shards.empty()) throw Error("need at least one shard");
  ProblemConstants out;
  double mu_sum = 0.0;
  for (const Problem& shard : shards) {
    const ProblemConstants c = shard.estimate_constants();
    out.L = std::max(out.L, c.L);
    mu_sum += c.mu;
  }
  out.mu = mu_sum / static_cast<double>(shards.size());
  return out;
}

// ---------------------------------------------------------------------------
// Runner.

namespace {

Regime regime_of(Algorithm a) {
  switch (a) {
    case Algorithm::kDhpl:
    case Algorithm::kGd:
    case Algorithm::kAgd:
      return Regime::kHorizontal;
    default:
      return Regime::kVertical;
  }
}

hfl::HyperParams with_overrides(hfl::HyperParams hp,
                                const ScheduleOverrides& ov, double mu,
                                double L) {
  bool redo_eta = false;
  if (ov.ltilde) {
    hp.Ltilde = *ov.ltilde;
    hp.sigma = mu / hp.Ltilde;
    redo_eta = true;
  }
  if (ov.theta2) {
    hp.theta2 = *ov.theta2;
    redo_eta = true;
  }
  if (ov.theta1) {
    hp.theta1 = *ov.theta1;
    redo_eta = true;
  }
  if (ov.eta) {
    hp.eta = *ov.eta;
  } else if (redo_eta) {
    hp.eta = std::min(hp.theta2, hp.Ltilde / L * hp.theta2) /
             ((1.0 + hp.theta2) * hp.theta1);
  }
  if (ov.p) hp.p = *ov.p;
  hp.validate();
  return hp;
}

vfl::VerticalHyperParams with_overrides(vfl::VerticalHyperParams hp,
                                        const ScheduleOverrides& ov, double mu,
                                        Index s) {
  bool redo_eta = false;
  if (ov.ltilde) {
    hp.Ltilde = *ov.ltilde;
    hp.sigma = mu / hp.Ltilde;
    redo_eta = true;
  }
  if (ov.theta2) {
    hp.theta2 = *ov.theta2;
    redo_eta = true;
  }
  if (ov.theta1) {
    hp.theta1 = *ov.theta1;
    redo_eta = true;
  }
  if (ov.eta) {
    hp.eta = *ov.eta;
  } else if (redo_eta) {
    hp.eta = hp.theta2 / ((1.0 + hp.theta2) * hp.theta1);
  }
  if (ov.p) hp.p = *ov.p;
  hp.validate(s);
  return hp;
}

// The round loop shared by every algorithm: trace row 0, step until the
// target suboptimality or max_rounds, abort on divergence, and trace every
// trace_stride-th round plus the final one.
struct RoundDriver {
  std::function<int()> step;       // one round; returns the traced coin
  std::function<double()> subopt;  // f(current output) - f*
  std::function<double()> dist2;   // squared distance of the primal iterate
  std::function<double()> psi;     // Lyapunov potential (0 when untracked)
};

void drive(const ExperimentConfig& cfg, const CostLedger& ledger,
           const RoundDriver& rd, ExperimentResult* result) {
  double sub = rd.subopt();
  const double initial = sub;
  result->trace.rows.push_back(
      TraceRow{0, ledger.total(), sub, rd.dist2(), rd.psi(), 0});

  long k = 0;
  while (sub > cfg.epsilon && k < cfg.max_rounds) {
    const int coin = rd.step();
    ++k;
    sub = rd.subopt();
    if (!std::isfinite(sub) || sub > 10.0 * initial) {
      throw DivergenceError("objective rose to " + fmt17(sub) + " at round " +
                            std::to_string(k) + " (started at " +
                            fmt17(initial) + ")");
    }
    const bool last = sub <= cfg.epsilon || k == cfg.max_rounds;
    if (last || k % cfg.trace_stride == 0) {
      result->trace.rows.push_back(
          TraceRow{k, ledger.total(), sub, rd.dist2(), rd.psi(), coin});
    }
  }
  result->rounds = k;
  result->total_scalars = ledger.total();
  result->reached_target = sub <= cfg.epsilon;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw Error("need at least one worker");
  if (cfg.epsilon <= 0.0) throw Error("epsilon must be positive");
  if (cfg.max_rounds < 0) throw Error("max_rounds must be >= 0");
  if (cfg.trace_stride < 1) throw Error("trace_stride must be >= 1");
  if (cfg.threads < 1) throw Error("threads must be >= 1");
  if (regime_of(cfg.algorithm) != cfg.regime) {
    throw Error(std::string("algorithm '") + to_name(cfg.algorithm) +
                "' runs in the " + to_name(regime_of(cfg.algorithm)) +
                " regime, config says " + to_name(cfg.regime));
  }
  if ((cfg.algorithm == Algorithm::kDvplScalar ||
       cfg.algorithm == Algorithm::kDvplPermK) &&
      cfg.loss != LossKind::kLeastSquares) {
    throw Error(std::string("algorithm '") + to_name(cfg.algorithm) +
                "' supports least squares only");
  }

  ResolvedProblem rp = resolve_problem(cfg);
  const Problem& full = rp.problem;

  ExperimentResult result;
  result.lambda = rp.lambda;

  Fabric fabric(cfg.n, cfg.seed);
  CostLedger ledger;
  const Vector x0 = Vector::Zero(full.dim());
  const std::optional<std::uint64_t> shuffle_seed =
      cfg.shuffle ? std::optional<std::uint64_t>(cfg.seed) : std::nullopt;

  if (cfg.regime == Regime::kHorizontal) {
    std::vector<FeatureShard> raw = split_horizontal(full.data(), cfg.n,
                                                     shuffle_seed);
    std::vector<Problem> shards;
    shards.reserve(raw.size());
    for (FeatureShard& shard : raw) {
      shards.emplace_back(cfg.loss, std::move(shard.data), rp.lambda);
    }
    std::vector<const Problem*> parts;
    for (const Problem& p : shards) parts.push_back(&p);
    AverageObjective avg(parts);

    const ProblemConstants dc = distributed_constants(shards);
    result.constants = dc;
    result.xstar = analysis::reference_solution(avg, dc.L, dc.mu, cfg.ref_tol);
    result.fstar = avg.eval(result.xstar).value;

    if (cfg.algorithm == Algorithm::kDhpl) {
      WorkerCompressors comps =
          make_compressors(cfg.compressor, cfg.n, full.dim(), fabric);
      const bool permk = cfg.compressor.kind == CompressorSpec::Kind::kPermK;
      result.beta = comps.aggregate_beta();
      result.omega = permk ? result.beta : comps.members.at(0)->omega();
      hfl::HyperParams hp = with_overrides(
          hfl::dhpl_params(dc, result.omega, result.beta, cfg.n, permk),
          cfg.overrides, dc.mu, dc.L);
      result.params = analysis::lyapunov_params(hp);

      hfl::KatyushaState state = hfl::katyusha_init(shards, x0, cfg.threads);
      RoundDriver rd;
      rd.step = [&] {
        return hfl::dhpl_step(state, shards, comps, hp, fabric, ledger,
                              cfg.threads)
                       .anchor_refreshed
                   ? 1
                   : 0;
      };
      rd.subopt = [&] { return avg.eval(state.y).value - result.fstar; };
      rd.dist2 = [&] { return (state.z - result.xstar).squaredNorm(); };
      rd.psi = [&] {
        if (!cfg.track_psi) return 0.0;
        return analysis::lyapunov(state.z, state.y, state.w, result.params,
                                  result.xstar, result.fstar, avg)
            .Psi;
      };
      drive(cfg, ledger, rd, &result);
      return result;
    }

    // Uncompressed baselines.
    hfl::GdState state = hfl::gd_init(x0);
    RoundDriver rd;
    if (cfg.algorithm == Algorithm::kGd) {
      rd.step = [&] {
        hfl::gd_step(state, avg, dc.L, fabric, ledger);
        return 0;
      };
    } else {
      rd.step = [&] {
        hfl::agd_step(state, avg, dc.L, dc.mu, fabric, ledger);
        return 0;
      };
    }
    rd.subopt = [&] { return avg.eval(state.x).value - result.fstar; };
    rd.dist2 = [&] { return (state.x - result.xstar).squaredNorm(); };
    rd.psi = [] { return 0.0; };
    drive(cfg, ledger, rd, &result);
    return result;
  }

  // Vertical regime: every worker holds a column block of one shared
  // objective, so the global constants drive both the schedule and the
  // reference solve.
  vfl::VerticalProblem vp =
      vfl::VerticalProblem::from_problem(full, cfg.n, shuffle_seed);
  result.constants = rp.constants;
  result.xstar =
      analysis::reference_solution(full, rp.constants.L, rp.constants.mu,
                                   cfg.ref_tol);
  result.fstar = full.eval(result.xstar).value;

  const bool katyusha = cfg.algorithm == Algorithm::kDvpl ||
                        cfg.algorithm == Algorithm::kDvplScalar ||
                        cfg.algorithm == Algorithm::kDvplPermK;
  if (katyusha) {
    WorkerCompressors comps;  // dvpl_scalar only
    vfl::VerticalHyperParams hp;
    if (cfg.algorithm == Algorithm::kDvpl) {
      hp = vfl::dvpl_params(rp.constants, cfg.batch, vp.s);
    } else if (cfg.algorithm == Algorithm::kDvplScalar) {
      comps = make_compressors(cfg.compressor, cfg.n, cfg.batch, fabric);
      result.beta = comps.aggregate_beta();
      result.omega = comps.members.at(0)->omega();
      hp = vfl::dvpl_scalar_params(rp.constants, cfg.batch, vp.s,
                                   result.omega);
    } else {
      hp = vfl::dvpl_permk_params(rp.constants, vp.s, cfg.n);
    }
    hp = with_overrides(hp, cfg.overrides, rp.constants.mu, vp.s);
    result.params = analysis::lyapunov_params(hp);

    vfl::VerticalState state = vfl::vertical_init(vp, x0, cfg.threads);
    RoundDriver rd;
    if (cfg.algorithm == Algorithm::kDvpl) {
      rd.step = [&] {
        return vfl::dvpl_step(state, vp, hp, fabric, ledger, cfg.accounting,
                              cfg.threads)
                       .anchor_refreshed
                   ? 1
                   : 0;
      };
    } else if (cfg.algorithm == Algorithm::kDvplScalar) {
      rd.step = [&] {
        return vfl::dvpl_scalar_step(state, vp, hp, comps, fabric, ledger,
                                     cfg.threads)
                       .anchor_refreshed
                   ? 1
                   : 0;
      };
    } else {
      rd.step = [&] {
        return vfl::dvpl_permk_step(state, vp, hp, fabric, ledger,
                                    cfg.threads)
                       .anchor_refreshed
                   ? 1
                   : 0;
      };
    }
    rd.subopt = [&] {
      return full.eval(vp.assemble(state.y)).value - result.fstar;
    };
    rd.dist2 = [&] {
      return (vp.assemble(state.z) - result.xstar).squaredNorm();
    };
    rd.psi = [&] {
      if (!cfg.track_psi) return 0.0;
      return analysis::lyapunov(vp.assemble(state.z), vp.assemble(state.y),
                                vp.assemble(state.w), result.params,
                                result.xstar, result.fstar, full)
          .Psi;
    };
    drive(cfg, ledger, rd, &result);
    return result;
  }

  vfl::VerticalGdState state = vfl::vertical_gd_init(vp, x0);
  RoundDriver rd;
  if (cfg.algorithm == Algorithm::kVerticalGd) {
    rd.step = [&] {
      vfl::vertical_gd_step(state, vp, rp.constants.L, fabric, ledger,
                            cfg.threads);
      return 0;
    };
  } else {
    rd.step = [&] {
      vfl::vertical_nesterov_step(state, vp, rp.constants.L, rp.constants.mu,
                                  fabric, ledger, cfg.threads);
      return 0;
    };
  }
  rd.subopt = [&] {
    return full.eval(vp.assemble(state.x)).value - result.fstar;
  };
  rd.dist2 = [&] {
    return (vp.assemble(state.x) - result.xstar).squaredNorm();
  };
  rd.psi = [] { return 0.0; };
  drive(cfg, ledger, rd, &result);
  return result;
}

}  // namespace fedkat
