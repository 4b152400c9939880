#include "meanfp/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace meanfp {

namespace {

using nlohmann::json;

constexpr double kSuiteViTol = 1e-4;
constexpr double kSuiteGammaTol = 1e-4;
constexpr double kSuiteDistTol = 1e-3;
constexpr double kSuiteResidualTol = 1e-3;
constexpr double kSuiteMembershipTol = 2e-2;
constexpr int kGammaTail = 10;
constexpr int kViSamples = 50;
constexpr int kBoundSamples = 20;

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

const json& require(const json& j, const std::string& key,
                    const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError("missing field '" + key + "' in " + where);
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + " must be a non-empty array of numbers");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<int>(i)] = num(j[i], where);
    if (!std::isfinite(v[static_cast<int>(i)]))
      throw ConfigError(where + " contains a non-finite entry");
  }
  return v;
}

MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + " must be an array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + " rows must be non-empty arrays");
  MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(where + " rows have inconsistent lengths");
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<int>(r), static_cast<int>(c)) = num(j[r][c], where);
      if (!std::isfinite(m(static_cast<int>(r), static_cast<int>(c))))
        throw ConfigError(where + " contains a non-finite entry");
    }
  }
  return m;
}

MapPtr parse_map_spec(const json& j, int d, const std::string& where);

MapPtr parse_map_spec(const json& j, int d, const std::string& where) {
  const std::string kind = require(j, "kind", where).get<std::string>();
  try {
    if (kind == "affine") {
      MatrixXd A = parse_matrix(require(j, "A", where), where + ".A");
      VectorXd b = parse_vector(require(j, "b", where), where + ".b");
      if (A.rows() != d || A.cols() != d || b.size() != d)
        throw ConfigError(where + ": affine map shape does not match d");
      return make_affine(std::move(A), std::move(b));
    }
    if (kind == "clamp") {
      VectorXd lo = parse_vector(require(j, "lo", where), where + ".lo");
      VectorXd hi = parse_vector(require(j, "hi", where), where + ".hi");
      if (lo.size() != d || hi.size() != d)
        throw ConfigError(where + ": clamp bounds do not match d");
      return make_clamp(std::move(lo), std::move(hi));
    }
    if (kind == "compose") {
      const json& parts = require(j, "maps", where);
      if (!parts.is_array() || parts.empty())
        throw ConfigError(where + ".maps must be a non-empty array");
      std::vector<MapPtr> built;
      for (size_t i = 0; i < parts.size(); ++i)
        built.push_back(parse_map_spec(parts[i], d,
                                       where + ".maps[" + std::to_string(i) + "]"));
      return make_composed(std::move(built));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown map kind '" + kind + "'");
}

ExperimentConfig from_json(const json& j, const std::string& origin) {
  ExperimentConfig cfg;
  const json& space = require(j, "space", origin);
  cfg.d = static_cast<int>(num(require(space, "d", "space"), "space.d"));
  cfg.p = num(require(space, "p", "space"), "space.p");
  if (cfg.d < 1) throw ConfigError("space.d must be >= 1");
  if (!(cfg.p > 1.0) || !std::isfinite(cfg.p))
    throw ConfigError("space.p must lie in (1, inf)");

  const json& gens = require(j, "generators", origin);
  if (!gens.is_array() || gens.empty())
    throw ConfigError("generators must be a non-empty array");
  for (size_t i = 0; i < gens.size(); ++i)
    cfg.generators.push_back(
        parse_map_spec(gens[i], cfg.d, "generators[" + std::to_string(i) + "]"));

  if (j.contains("domain")) {
    const json& dom = j.at("domain");
    const std::string kind = require(dom, "kind", "domain").get<std::string>();
    try {
      if (kind == "all") {
        cfg.domain = Domain::all();
      } else if (kind == "box") {
        cfg.domain = Domain::box(parse_vector(require(dom, "lo", "domain"), "domain.lo"),
                                 parse_vector(require(dom, "hi", "domain"), "domain.hi"));
      } else if (kind == "ball") {
        cfg.domain = Domain::ball(
            parse_vector(require(dom, "center", "domain"), "domain.center"),
            num(require(dom, "radius", "domain"), "domain.radius"));
      } else {
        throw ConfigError("domain.kind must be all|box|ball");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("domain: ") + e.what());
    }
  }

  const json& scheme = require(j, "scheme", origin);
  const std::string type = require(scheme, "type", "scheme").get<std::string>();
  if (type == "viscosity")
    cfg.scheme_type = SchemeType::Viscosity;
  else if (type == "anchor")
    cfg.scheme_type = SchemeType::Anchor;
  else
    throw ConfigError("scheme.type must be viscosity|anchor");
  cfg.n_outer = static_cast<int>(
      num(require(scheme, "n_outer", "scheme"), "scheme.n_outer"));
  if (cfg.n_outer < 1) throw ConfigError("scheme.n_outer must be >= 1");
  if (scheme.contains("start"))
    cfg.start = parse_vector(scheme.at("start"), "scheme.start");
  if (scheme.contains("outer_tol"))
    cfg.outer_tol = num(scheme.at("outer_tol"), "scheme.outer_tol");

  if (cfg.scheme_type == SchemeType::Viscosity) {
    const json& con = require(j, "contraction", origin);
    const std::string kind = require(con, "kind", "contraction").get<std::string>();
    try {
      if (kind == "constant") {
        cfg.contraction = Contraction::constant(
            parse_vector(require(con, "u", "contraction"), "contraction.u"));
      } else if (kind == "scaled") {
        cfg.contraction = Contraction::scaled_toward(
            num(require(con, "alpha", "contraction"), "contraction.alpha"),
            parse_vector(require(con, "u", "contraction"), "contraction.u"));
      } else if (kind == "affine") {
        cfg.contraction = Contraction::affine(
            parse_matrix(require(con, "F", "contraction"), "contraction.F"),
            parse_vector(require(con, "b", "contraction"), "contraction.b"),
            LpSpace(cfg.d, cfg.p));
      } else {
        throw ConfigError("contraction.kind must be constant|scaled|affine");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("contraction: ") + e.what());
    }
    if (cfg.contraction->dim() != cfg.d)
      throw ConfigError("contraction dimension does not match space.d");
  } else {
    const json& anchor = require(j, "anchor", origin);
    cfg.anchor_x = parse_vector(require(anchor, "x", "anchor"), "anchor.x");
    if (cfg.anchor_x.size() != cfg.d)
      throw ConfigError("anchor.x dimension does not match space.d");
    if (anchor.contains("mean_n")) {
      cfg.anchor_mean_n =
          static_cast<int>(num(anchor.at("mean_n"), "anchor.mean_n"));
      if (cfg.anchor_mean_n < 1) throw ConfigError("anchor.mean_n must be >= 1");
    }
  }

  if (j.contains("epsilon")) {
    const json& eps = j.at("epsilon");
    const std::string rule = require(eps, "rule", "epsilon").get<std::string>();
    try {
      if (rule == "one_over_n_plus_1")
        cfg.epsilon = EpsilonSchedule::inverse_n();
      else if (rule == "power")
        cfg.epsilon = EpsilonSchedule::power(
            num(require(eps, "gamma", "epsilon"), "epsilon.gamma"));
      else if (rule == "log")
        cfg.epsilon = EpsilonSchedule::log_decay(
            num(require(eps, "c", "epsilon"), "epsilon.c"));
      else
        throw ConfigError("epsilon.rule must be one_over_n_plus_1|power|log");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("epsilon: ") + e.what());
    }
  }

  if (j.contains("mean")) {
    const std::string rule =
        require(j.at("mean"), "rule", "mean").get<std::string>();
    if (rule != "cesaro")
      throw ConfigError("mean.rule: only 'cesaro' is available");
  }

  if (j.contains("inner")) {
    const json& inner = j.at("inner");
    if (inner.contains("tol")) cfg.inner_tol = num(inner.at("tol"), "inner.tol");
    if (inner.contains("max_iters"))
      cfg.inner_max =
          static_cast<long>(num(inner.at("max_iters"), "inner.max_iters"));
    if (!(cfg.inner_tol > 0.0)) throw ConfigError("inner.tol must be positive");
    if (cfg.inner_max < 1) throw ConfigError("inner.max_iters must be >= 1");
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer())
      throw ConfigError("seed must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("certify") && j.at("certify").contains("samples")) {
    cfg.certify_samples = static_cast<int>(
        num(j.at("certify").at("samples"), "certify.samples"));
    if (cfg.certify_samples < 1)
      throw ConfigError("certify.samples must be >= 1");
  }

  if (j.contains("output")) {
    const json& out = j.at("output");
    if (out.contains("trace"))
      cfg.trace_name = out.at("trace").get<std::string>();
    if (out.contains("summary"))
      cfg.summary_name = out.at("summary").get<std::string>();
  }

  if (cfg.start.size() && cfg.start.size() != cfg.d)
    throw ConfigError("scheme.start dimension does not match space.d");
  return cfg;
}

struct ReferenceContext {
  bool has_description = false;
  bool infeasible = false;
  std::optional<FixedSetDescription> description;
  bool oracle_used = false;
  VectorXd x_star;
  VectorXd px;
  double oracle_distance = 0.0;
  std::vector<VectorXd> vi_samples;
  std::vector<VectorXd> bound_samples;
};

ReferenceContext make_reference(const ExperimentConfig& cfg,
                                const Representation& rep,
                                const Contraction& f, const Trace& trace) {
  ReferenceContext ref;
  try {
    ref.description = fixed_set_oracle(rep);
    ref.has_description = true;
  } catch (const UnsupportedError&) {
  } catch (const InfeasibleError&) {
    ref.infeasible = true;
  }

  const VectorXd& zhat = trace.final_z();
  if (ref.has_description && cfg.p == 2.0) {
    // x* solves x = f(Px); for a constant contraction that is just u.
    VectorXd x = f(zhat);
    if (f.kind() != Contraction::Kind::Constant) {
      for (int it = 0; it < 500; ++it) {
        const VectorXd next = f(ref.description->project(x));
        const double change = (next - x).norm();
        x = next;
        if (change <= 1e-13 * (1.0 + x.norm())) break;
      }
    }
    ref.x_star = x;
    ref.px = ref.description->project(x);
    ref.oracle_used = true;
    ref.oracle_distance = lp_norm(zhat - ref.px, cfg.p);
  } else {
    // Without the Hilbert-space ground truth the scheme's own limit
    // estimate stands in for Px.
    ref.px = zhat;
    ref.x_star = f(zhat);
    ref.oracle_distance = 0.0;
  }
  if (cfg.scheme_type == SchemeType::Anchor) ref.x_star = cfg.anchor_x;

  if (ref.has_description) {
    ref.vi_samples =
        ref.description->sample_many(kViSamples, cfg.seed ^ 0x5eedULL);
    ref.bound_samples =
        ref.description->sample_many(kBoundSamples, cfg.seed ^ 0xb0d6ULL);
  }
  return ref;
}

// Recomputes the fixed-point equation residual together with the
// per-generator and mean residual columns, so that verification trusts
// nothing but the iterates themselves.  On a freshly produced trace the
// refreshed values reproduce the recorded ones bit for bit.
double recompute_row_diagnostics(const ExperimentConfig& cfg,
                                 const Representation& rep,
                                 const Contraction& f, Trace& trace) {
  double worst = 0.0;
  VectorXd fz(rep.dim()), tz(rep.dim()), gz(rep.dim());
  for (auto& row : trace.rows) {
    const int mean_n =
        cfg.scheme_type == SchemeType::Anchor ? cfg.anchor_mean_n : row.n;
    BoxMeanApplier t_mu(rep, mean_n);
    t_mu.apply(row.z, tz);
    f.apply_into(row.z, fz);
    const double resid =
        lp_norm(row.epsilon * fz + (1.0 - row.epsilon) * tz - row.z, cfg.p);
    worst = std::max(worst, resid);
    row.mean_residual = lp_norm(row.z - tz, cfg.p);
    row.generator_residuals.resize(rep.k());
    for (int i = 0; i < rep.k(); ++i) {
      rep.generator(i).apply_into(row.z, gz);
      row.generator_residuals[i] = lp_norm(row.z - gz, cfg.p);
    }
  }
  return worst;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  return from_json(parse_json(text, origin), origin);
}

Representation ExperimentConfig::representation() const {
  return Representation(space(), generators, domain);
}

SchemeConfig ExperimentConfig::scheme_config() const {
  SchemeConfig sc;
  sc.epsilon = epsilon;
  sc.n_outer = n_outer;
  sc.inner_tol = inner_tol;
  sc.inner_max = inner_max;
  sc.outer_tol = outer_tol;
  sc.start = start;
  return sc;
}

DiagnosticReport evaluate_suite(const ExperimentConfig& cfg, Trace& trace) {
  const Representation rep = cfg.representation();
  const LpSpace space = cfg.space();
  const Contraction f = cfg.scheme_type == SchemeType::Anchor
                            ? Contraction::constant(cfg.anchor_x)
                            : *cfg.contraction;
  const ReferenceContext ref = make_reference(cfg, rep, f, trace);

  DiagnosticReport report;
  double recorded = 0.0;
  for (const auto& row : trace.rows)
    recorded = std::max(recorded, row.inner.final_residual);
  report.add("recorded_inner_residual_max", recorded, cfg.inner_tol);
  report.add("eq_residual_max", recompute_row_diagnostics(cfg, rep, f, trace),
             cfg.inner_tol * 1.01);

  if (ref.has_description) {
    enrich_trace(space, trace, ref.x_star, ref.px, f,
                 std::span<const VectorXd>(ref.bound_samples), cfg.inner_tol);
    DiagnosticReport quad = quadratic_bound_check(
        space, trace, f, std::span<const VectorXd>(ref.bound_samples),
        cfg.inner_tol);
    for (const auto& c : quad.checks) report.checks.push_back(c);
    DiagnosticReport gbh = final_bound_check(space, trace, ref.x_star, ref.px,
                                             f.alpha(), cfg.inner_tol);
    for (const auto& c : gbh.checks) report.checks.push_back(c);
    if (cfg.scheme_type == SchemeType::Anchor) {
      DiagnosticReport la2 = anchor_inequality_check(
          space, trace, cfg.anchor_x,
          std::span<const VectorXd>(ref.vi_samples), cfg.inner_tol);
      for (const auto& c : la2.checks) report.checks.push_back(c);
    }
  }

  // Limit-quality checks.  The residual/distance/Gamma scale of an implicit
  // run is set by the final eps_n (the fixed-point equation moves z_n away
  // from Fix(S) by eps_n * O(||x* - Px||)), so the thresholds combine the
  // absolute targets with an eps_N-proportional term.
  const double eps_last = trace.rows.back().epsilon;
  const VectorXd& zhat = trace.final_z();
  const double big_d = lp_norm(ref.x_star - zhat, cfg.p);

  double gen_resid_final = trace.rows.back().generator_residuals.size()
                               ? trace.rows.back().generator_residuals.maxCoeff()
                               : 0.0;
  report.add("final_generator_residual", gen_resid_final,
             std::max(kSuiteResidualTol, 4.0 * eps_last * (1.0 + big_d)));
  report.add("final_mean_residual", trace.rows.back().mean_residual,
             std::max(kSuiteResidualTol, 4.0 * eps_last * (1.0 + big_d)));

  if (trace.rows.size() >= 20) {
    double first10 = 0.0, last10 = 0.0;
    for (size_t i = 0; i < 10; ++i)
      first10 = std::max(first10, trace.rows[i].generator_residuals.maxCoeff());
    for (size_t i = trace.rows.size() - 10; i < trace.rows.size(); ++i)
      last10 = std::max(last10, trace.rows[i].generator_residuals.maxCoeff());
    report.add("residual_decay_witness", last10 - first10, 1e-12);
  }

  if (ref.has_description) {
    // The scheme's own limit estimate is the retraction candidate.
    DiagnosticReport vi = variational_inequality(
        rep, zhat, ref.x_star, std::span<const VectorXd>(ref.vi_samples),
        kSuiteViTol,
        std::max(kSuiteMembershipTol, 4.0 * eps_last * (1.0 + big_d)));
    for (const auto& c : vi.checks) report.checks.push_back(c);

    if (ref.oracle_used) {
      DiagnosticReport self = variational_inequality(
          space, ref.px, ref.x_star, std::span<const VectorXd>(ref.vi_samples),
          1e-8);
      report.add("oracle_vi_max", self.checks.front().value, 1e-8);
    }

    const int tail =
        std::min<int>(kGammaTail, static_cast<int>(trace.rows.size()));
    report.add(
        "gamma_tail", gamma_estimate(space, trace, ref.x_star, ref.px, tail),
        std::max(kSuiteGammaTol, 2.0 * eps_last * big_d * (1.0 + big_d)));
  }

  if (ref.oracle_used)
    report.add("oracle_distance", ref.oracle_distance,
               std::max(kSuiteDistTol, 2.0 * eps_last * (1.0 + big_d)));

  if (cfg.scheme_type == SchemeType::Anchor) {
    // ||z_n - T_mu z_n|| = ||x - T_mu z_n||/n for the exact anchor step.
    const double lead = trace.rows.front().mean_residual +
                        lp_norm(cfg.anchor_x - trace.rows.front().z, cfg.p);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& row : trace.rows)
      worst = std::max(worst, row.mean_residual - 10.0 * lead / row.n -
                                  10.0 * cfg.inner_tol);
    report.add("anchor_mean_residual_bound", worst, 0.0);
  }
  return report;
}

namespace {

json summary_json(const ExperimentConfig& cfg, const RunArtifacts& art) {
  json j;
  j["scheme"] = cfg.scheme_type == SchemeType::Anchor ? "anchor" : "viscosity";
  j["steps"] = art.trace.rows.size();
  j["failed"] = art.trace.failed;
  j["early_stopped"] = art.trace.early_stopped;
  j["final_z"] = std::vector<double>(art.trace.final_z().data(),
                                     art.trace.final_z().data() + cfg.d);
  j["x_star"] = std::vector<double>(art.x_star.data(),
                                    art.x_star.data() + art.x_star.size());
  j["px"] = std::vector<double>(art.px.data(), art.px.data() + art.px.size());
  j["oracle_used"] = art.oracle_used;
  if (art.oracle_used) j["oracle_distance"] = art.oracle_distance;
  json checks = json::array();
  for (const auto& c : art.report.checks) {
    json e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["verdict"] = art.report.verdict();
  return j;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::string& out_dir, bool quiet) {
  const Representation rep = cfg.representation();
  const CertificationReport cert = certify(rep, cfg.certify_samples, cfg.seed);
  if (!cert.pass) throw CertificationError(cert.summary());

  RunArtifacts art;
  if (cfg.scheme_type == SchemeType::Anchor) {
    const FiniteMean mu = cesaro_mean(cfg.anchor_mean_n, rep.k());
    art.trace = run_anchor(rep, mu, cfg.anchor_x, cfg.n_outer, cfg.inner_tol,
                           cfg.inner_max);
  } else {
    art.trace = run_viscosity(rep, cfg.scheme_config(), *cfg.contraction);
  }

  art.report = evaluate_suite(cfg, art.trace);

  const Contraction f = cfg.scheme_type == SchemeType::Anchor
                            ? Contraction::constant(cfg.anchor_x)
                            : *cfg.contraction;
  const ReferenceContext ref = make_reference(cfg, rep, f, art.trace);
  art.oracle_used = ref.oracle_used;
  art.px = ref.px;
  art.x_star = ref.x_star;
  art.oracle_distance = ref.oracle_distance;

  std::filesystem::create_directories(out_dir);
  art.trace_path = (std::filesystem::path(out_dir) / cfg.trace_name).string();
  art.summary_path =
      (std::filesystem::path(out_dir) / cfg.summary_name).string();
  write_trace_csv(art.trace_path, art.trace, cfg.d,
                  static_cast<int>(cfg.generators.size()));
  {
    std::ofstream out(art.summary_path, std::ios::binary);
    if (!out)
      throw ConfigError("cannot open summary file for writing: " +
                        art.summary_path);
    out << summary_json(cfg, art).dump(2) << "\n";
  }

  art.status = art.trace.failed ? RunStatus::InnerFailure : RunStatus::Ok;
  if (ref.infeasible)
    std::cerr << "warning: the generators admit no common fixed point; "
                 "orbits may be unbounded and the iterates need not settle\n";
  if (!quiet) {
    std::cout << "steps: " << art.trace.rows.size() << "\n";
    std::cout << "final z:";
    for (int i = 0; i < cfg.d; ++i) std::cout << " " << art.trace.final_z()[i];
    std::cout << "\n";
    if (art.oracle_used)
      std::cout << "distance to projection oracle: " << art.oracle_distance
                << "\n";
    std::cout << art.report.to_text();
    if (art.trace.failed)
      std::cout << "inner solver hit its iteration cap at outer step "
                << art.trace.failed_step << "\n";
  }
  return art;
}

DiagnosticReport verify_trace_file(const ExperimentConfig& cfg,
                                   const std::string& trace_path) {
  Trace trace = read_trace_csv(trace_path, cfg.d,
                               static_cast<int>(cfg.generators.size()));
  return evaluate_suite(cfg, trace);
}

std::vector<SweepRow> sweep_experiment(const std::string& config_path,
                                       const std::string& parameter,
                                       const std::vector<double>& values,
                                       const std::string& out_dir, bool quiet) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  std::ifstream in(config_path);
  if (!in) throw ConfigError("config file not found: " + config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  json base = parse_json(buf.str(), config_path);

  // Resolve the dotted path.
  std::vector<std::string> parts;
  {
    std::stringstream ss(parameter);
    std::string piece;
    while (std::getline(ss, piece, '.'))
      if (!piece.empty()) parts.push_back(piece);
  }
  if (parts.empty()) throw ConfigError("sweep: empty parameter name");
  json* leaf = &base;
  for (const auto& piece : parts) {
    if (!leaf->is_object() || !leaf->contains(piece))
      throw ConfigError("sweep: unknown parameter '" + parameter + "'");
    leaf = &leaf->at(piece);
  }
  if (!leaf->is_number())
    throw ConfigError("sweep: parameter '" + parameter + "' is not numeric");
  const bool integral = leaf->is_number_integer();

  std::vector<SweepRow> rows;
  for (size_t i = 0; i < values.size(); ++i) {
    json patched = base;
    json* slot = &patched;
    for (const auto& piece : parts) slot = &slot->at(piece);
    if (integral)
      *slot = static_cast<long long>(std::llround(values[i]));
    else
      *slot = values[i];
    const ExperimentConfig cfg =
        from_json(patched, config_path + " [sweep " + std::to_string(i) + "]");
    const std::string sub =
        (std::filesystem::path(out_dir) / ("sweep_" + std::to_string(i)))
            .string();
    const RunArtifacts art = run_experiment(cfg, sub, true);
    SweepRow row;
    row.value = values[i];
    row.steps = static_cast<int>(art.trace.rows.size());
    row.final_generator_residual =
        art.trace.rows.back().generator_residuals.maxCoeff();
    row.final_mean_residual = art.trace.rows.back().mean_residual;
    row.has_oracle = art.oracle_used;
    row.oracle_distance = art.oracle_distance;
    row.verdict = art.report.verdict() && art.status == RunStatus::Ok;
    rows.push_back(row);
    if (!quiet)
      std::cout << parameter << " = " << values[i]
                << ": steps " << row.steps << ", final residual "
                << row.final_generator_residual << ", oracle distance "
                << (row.has_oracle ? std::to_string(row.oracle_distance)
                                   : std::string("n/a"))
                << (row.verdict ? " [pass]" : " [FAIL]") << "\n";
  }
  return rows;
}

std::string sweep_table_csv(const std::string& parameter,
                            const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "parameter,value,steps,final_generator_residual,final_mean_residual,"
        "oracle_distance,verdict\n";
  char buf[40];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << parameter << "," << fmt(r.value) << "," << r.steps << ","
       << fmt(r.final_generator_residual) << "," << fmt(r.final_mean_residual)
       << "," << (r.has_oracle ? fmt(r.oracle_distance) : std::string(""))
       << "," << (r.verdict ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace meanfp
