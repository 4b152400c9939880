#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "meanfp/config.hpp"

namespace {

// Exit codes: 0 ok, 1 verification failed, 2 config/usage error,
// 3 certification failure, 4 inner solver failure.
constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCertification = 3;
constexpr int kExitInnerFailure = 4;

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size())
      throw meanfp::ConfigError("sweep: bad value '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit fixed-point schemes for commuting nonexpansive maps"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  long long seed_override = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  app.add_option("--out", out_dir, "output directory (default: .)");
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* cmd_run = app.add_subcommand("run", "run the configured scheme");
  auto* cmd_verify =
      app.add_subcommand("verify", "re-check a written trace file");
  auto* cmd_certify =
      app.add_subcommand("certify", "run the representation certificate only");
  auto* cmd_sweep = app.add_subcommand("sweep", "re-run over parameter values");
  std::string sweep_param;
  std::string sweep_values;
  cmd_sweep->add_option("--param", sweep_param, "dotted numeric config field")
      ->required();
  cmd_sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cmd_sweep->parsed()) {
      const auto values = parse_values(sweep_values);
      const auto rows = meanfp::sweep_experiment(config_path, sweep_param,
                                                 values, out_dir, quiet);
      const std::string table = meanfp::sweep_table_csv(sweep_param, rows);
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / "sweep.csv";
      std::ofstream out(path, std::ios::binary);
      out << table;
      if (!quiet) std::cout << table;
      return kExitOk;
    }

    meanfp::ExperimentConfig cfg = meanfp::ExperimentConfig::load(config_path);
    if (seed_override >= 0)
      cfg.seed = static_cast<std::uint64_t>(seed_override);

    if (cmd_certify->parsed()) {
      const auto rep = cfg.representation();
      const auto report = meanfp::certify(rep, cfg.certify_samples, cfg.seed);
      if (!quiet) std::cout << report.summary() << "\n";
      return report.pass ? kExitOk : kExitCertification;
    }

    if (cmd_run->parsed()) {
      const auto art = meanfp::run_experiment(cfg, out_dir, quiet);
      if (!quiet)
        std::cout << "trace: " << art.trace_path
                  << "\nsummary: " << art.summary_path << "\n";
      return art.status == meanfp::RunStatus::Ok ? kExitOk : kExitInnerFailure;
    }

    if (cmd_verify->parsed()) {
      const auto trace_path =
          (std::filesystem::path(out_dir) / cfg.trace_name).string();
      const auto report = meanfp::verify_trace_file(cfg, trace_path);
      if (!quiet) std::cout << report.to_text();
      return report.verdict() ? kExitOk : kExitVerifyFailed;
    }
  } catch (const meanfp::CertificationError& e) {
    std::cerr << "certification failure: " << e.what() << "\n";
    return kExitCertification;
  } catch (const meanfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
