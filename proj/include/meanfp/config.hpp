#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meanfp/trace_io.hpp"
#include "meanfp/verify.hpp"

namespace meanfp {

enum class SchemeType { Viscosity, Anchor };

/// Parsed experiment description (JSON file; see README for the schema).
struct ExperimentConfig {
  int d = 1;
  double p = 2.0;
  std::vector<MapPtr> generators;
  Domain domain = Domain::all();

  SchemeType scheme_type = SchemeType::Viscosity;
  int n_outer = 200;
  VectorXd start;  // optional warm start

  std::optional<Contraction> contraction;  // viscosity
  VectorXd anchor_x;                       // anchor
  int anchor_mean_n = 8;                   // fixed mean size for the anchor run

  EpsilonSchedule epsilon = EpsilonSchedule::inverse_n();
  double inner_tol = 1e-10;
  long inner_max = 1000000;
  double outer_tol = 0.0;

  std::uint64_t seed = 0;
  int certify_samples = 200;

  std::string trace_name = "trace.csv";
  std::string summary_name = "summary.json";

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& origin);

  LpSpace space() const { return LpSpace(d, p); }
  Representation representation() const;
  SchemeConfig scheme_config() const;
};

enum class RunStatus { Ok, InnerFailure };

struct RunArtifacts {
  Trace trace;
  DiagnosticReport report;
  RunStatus status = RunStatus::Ok;
  bool oracle_used = false;
  VectorXd px;      // retraction value estimate used by the diagnostics
  VectorXd x_star;  // fixed point of f o P (the anchor point for anchor runs)
  double oracle_distance = 0.0;
  std::string trace_path;
  std::string summary_path;
};

/// Certifies the representation (exit-3 class of failures throws
/// CertificationError), runs the configured scheme, enriches and writes the
/// trace plus a JSON summary into out_dir, and evaluates the diagnostic
/// suite.  Deterministic for a fixed config + seed.
RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::string& out_dir, bool quiet);

/// Recomputes the full diagnostic suite from a written trace file.
DiagnosticReport verify_trace_file(const ExperimentConfig& cfg,
                                   const std::string& trace_path);

/// Suite used by both run_experiment and verify_trace_file.
DiagnosticReport evaluate_suite(const ExperimentConfig& cfg, Trace& trace);

struct SweepRow {
  double value = 0.0;
  int steps = 0;
  double final_generator_residual = 0.0;
  double final_mean_residual = 0.0;
  double oracle_distance = 0.0;
  bool has_oracle = false;
  bool verdict = false;
};

/// Re-runs the experiment for each value of a dotted numeric config field
/// (e.g. "epsilon.gamma", "scheme.n_outer").  Throws ConfigError when the
/// field does not exist or the value list is empty.
std::vector<SweepRow> sweep_experiment(const std::string& config_path,
                                       const std::string& parameter,
                                       const std::vector<double>& values,
                                       const std::string& out_dir, bool quiet);

std::string sweep_table_csv(const std::string& parameter,
                            const std::vector<SweepRow>& rows);

}  // namespace meanfp
