// geoctl: run attitude-tracking scenarios, check gain conditions, emit the
// reference-case CSVs and run the randomized property suite.
//
// Exit codes: 0 success, 1 property failure, 2 gain conditions violated
// (without --force-gains), 3 integration failure, 64 usage or config error.

#include "geoctl/harness.hpp"
#include "geoctl/properties.hpp"
#include "geoctl/scenario_config.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace geoctl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitUsage = 64;

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

void write_series(const fs::path& p, const TimeSeries& ts) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  write_csv(out, ts);
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides,
                       bool force) {
  nlohmann::json doc = load_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  if (force) doc["force_gains"] = true;
  return scenario_from_json(doc);
}

int cmd_run(const std::string& config, const std::string& out_dir,
            const std::vector<std::string>& overrides, bool force) {
  Scenario s;
  try {
    s = load_scenario(config, overrides, force);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const GainReport report = scenario_gain_report(s);
  std::cout << format_gain_report(report);
  if (!report.feasible) {
    if (!s.gains.override_c_condition) {
      std::cerr << "error: gain conditions violated; rerun with --force-gains to proceed\n";
      return kExitInfeasible;
    }
    std::cout << "warning: proceeding with infeasible gains (override set)\n";
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << out_dir << "'\n";
    return kExitUsage;
  }
  try {
    const TimeSeries ts = run_scenario(s);
    const Metrics m = compute_metrics(ts, s.settle,
                                      report.robust ? std::optional(report.ultimate_bound) : std::nullopt);
    write_series(fs::path(out_dir) / "timeseries.csv", ts);
    write_file(fs::path(out_dir) / "metrics.txt", metrics_kv(m));
    write_file(fs::path(out_dir) / "gains.txt", gain_report_kv(report));
    std::cout << "wrote " << ts.rows.size() << " samples to " << (fs::path(out_dir) / "timeseries.csv").string()
              << "\n"
              << metrics_kv(m);
  } catch (const IntegrationError& e) {
    std::cerr << "error: integration failed at " << e.what() << "\n";
    return kExitIntegration;
  }
  return kExitOk;
}

int cmd_validate_gains(const std::string& config, const std::vector<std::string>& overrides) {
  Scenario s;
  try {
    s = load_scenario(config, overrides, false);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const GainReport report = scenario_gain_report(s);
  std::cout << format_gain_report(report);
  return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_paper_figures(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << out_dir << "'\n";
    return kExitUsage;
  }
  const std::array<CaseId, 3> cases{CaseId::adaptive_no_dist, CaseId::adaptive_with_dist,
                                    CaseId::robust_with_dist};
  std::vector<std::future<TimeSeries>> jobs;
  for (CaseId id : cases) {
    jobs.push_back(std::async(std::launch::async, [id] { return run_scenario(paper_scenario(id)); }));
  }
  int rc = kExitOk;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string stem = "fig" + std::to_string(i + 1);
    try {
      const TimeSeries ts = jobs[i].get();
      const Scenario s = paper_scenario(cases[i]);
      const GainReport rep = scenario_gain_report(s);
      const Metrics m = compute_metrics(ts, s.settle,
                                        rep.robust ? std::optional(rep.ultimate_bound) : std::nullopt);
      write_series(fs::path(out_dir) / (stem + ".csv"), ts);
      write_file(fs::path(out_dir) / (stem + "_metrics.txt"), metrics_kv(m));
      std::cout << stem << " (" << to_string(cases[i]) << "): final |e_R| = " << m.final_eR
                << ", V increases = " << m.V_violations << "\n";
    } catch (const IntegrationError& e) {
      std::cerr << "error: " << stem << ": integration failed at " << e.what() << "\n";
      rc = kExitIntegration;
    }
  }
  return rc;
}

int cmd_properties(std::uint64_t seed, long cases) {
  bool ok = true;
  for (const PropertyResult& r : run_property_suite(seed, cases)) {
    std::printf("%-4s %-48s cases=%-7ld worst=%.3e\n", r.passed() ? "PASS" : "FAIL", r.name.c_str(),
                r.cases, r.worst);
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric adaptive attitude tracking on SO(3)"};
  app.require_subcommand(1);

  std::string config, out_dir;
  std::vector<std::string> overrides;
  bool force = false;
  auto* run = app.add_subcommand("run", "Simulate one scenario and write timeseries.csv, metrics.txt");
  run->add_option("--config", config, "Scenario JSON document")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--set", overrides, "Override a config value, e.g. gains.c=1.2");
  run->add_flag("--force-gains", force, "Proceed even if the gain conditions fail");

  std::string vg_config;
  std::vector<std::string> vg_overrides;
  auto* vg = app.add_subcommand("validate-gains", "Check the gain conditions of a scenario");
  vg->add_option("--config", vg_config, "Scenario JSON document")->required();
  vg->add_option("--set", vg_overrides, "Override a config value");

  std::string fig_out;
  auto* figs = app.add_subcommand("paper-figures", "Run the three reference cases, write fig1..3.csv");
  figs->add_option("--out", fig_out, "Output directory")->required();

  std::uint64_t seed = 1;
  long cases = 1000;
  auto* props = app.add_subcommand("properties", "Run the randomized property suite");
  props->add_option("--seed", seed, "Generator seed");
  props->add_option("--cases", cases, "Samples per property")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) {
      if (!fs::exists(config)) {
        std::cerr << "error: config file '" << config << "' does not exist\n" << run->help();
        return kExitUsage;
      }
      return cmd_run(config, out_dir, overrides, force);
    }
    if (*vg) {
      if (!fs::exists(vg_config)) {
        std::cerr << "error: config file '" << vg_config << "' does not exist\n";
        return kExitUsage;
      }
      return cmd_validate_gains(vg_config, vg_overrides);
    }
    if (*figs) return cmd_paper_figures(fig_out);
    if (*props) return cmd_properties(seed, cases);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
