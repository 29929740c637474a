// geovar: run verification scenarios from the command line.
//
//   geovar list [--filter text] [--config file]
//   geovar check [--scenario name]... [--engine dual|fd|both] [--format text|jsonl] ...
//   geovar discrepancies [--engine dual|fd] [--config file]
//
// Exit status: 0 when every verdict matches its expectation, 1 when some
// check passed or failed unexpectedly, 2 on configuration errors.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geovar/geovar.hpp"

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitConfig = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GEOVAR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw geovar::ConfigError(std::string("GEOVAR_SEED is not an unsigned integer: ") + env);
    }
  }
  return geovar::RunSettings{}.seed;
}

std::vector<geovar::Scenario> scenario_pool(const std::string& config) {
  if (config.empty()) return geovar::builtin_scenarios();
  return geovar::load_scenario_file(config);
}

geovar::EngineChoice parse_engine(const std::string& s) {
  if (s == "dual") return geovar::EngineChoice::dual;
  if (s == "fd") return geovar::EngineChoice::fd;
  return geovar::EngineChoice::both;
}

std::string dims(const geovar::Scenario& s) {
  return std::to_string(s.base_dim()) + "->" + std::to_string(s.fibre_dim());
}

int cmd_list(const std::string& config, const std::string& filter) {
  for (const auto& s : scenario_pool(config)) {
    if (!filter.empty() && s.name.find(filter) == std::string::npos) continue;
    std::printf("%-24s %-6s %3zu checks  %s\n", s.name.c_str(), dims(s).c_str(), s.checks.size(),
                s.description.c_str());
  }
  return 0;
}

struct CheckOptions {
  std::vector<std::string> scenarios;
  std::string engine = "dual";
  std::string format = "text";
  std::string output;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t samples = geovar::RunSettings{}.samples;
  std::size_t grid = geovar::kDefaultGridPerAxis;
  double fd_step = geovar::kDefaultFdStep;
  std::map<std::string, double> tolerances;
  bool verbose = false;
};

int cmd_check(const CheckOptions& o) {
  const auto pool = scenario_pool(o.config);
  std::vector<const geovar::Scenario*> chosen;
  if (o.scenarios.empty()) {
    for (const auto& s : pool) chosen.push_back(&s);
  } else {
    for (const auto& name : o.scenarios) chosen.push_back(&geovar::find_scenario(pool, name));
  }

  geovar::RunSettings settings;
  settings.engine = parse_engine(o.engine);
  settings.seed = o.seed ? *o.seed : default_seed();
  settings.samples = o.samples;
  settings.grid_per_axis = o.grid;
  settings.fd_step = o.fd_step;
  settings.tolerance_overrides = o.tolerances;

  // Scenarios are independent; run them concurrently and print in order.
  std::vector<std::future<geovar::ResidualReport>> jobs;
  for (const auto* s : chosen)
    jobs.push_back(std::async(std::launch::async, [s, settings] { return geovar::run_scenario(*s, settings); }));

  std::ofstream file;
  if (!o.output.empty()) {
    file.open(o.output);
    if (!file) throw geovar::ConfigError("cannot write '" + o.output + "'");
  }
  std::ostream& out = o.output.empty() ? std::cout : file;

  std::size_t records = 0, mismatches = 0;
  for (auto& j : jobs) {
    const geovar::ResidualReport rep = j.get();
    records += rep.results.size();
    mismatches += rep.mismatches();
    if (o.format == "jsonl") {
      geovar::write_jsonl(out, rep);
    } else {
      geovar::write_text(out, rep, o.verbose);
    }
  }
  if (o.format == "text") out << records << " records, " << mismatches << " unexpected\n";
  return mismatches == 0 ? 0 : kExitMismatch;
}

// Evaluates both readings of each disputed formula. Exit 1 when a reading
// does not behave as the closed-form analysis predicts.
int cmd_discrepancies(const std::string& config, const std::string& engine_name, std::uint64_t seed) {
  using namespace geovar;
  RunSettings settings;
  settings.seed = seed;
  const DerivativeEngine e = engine_name == "fd" ? DerivativeEngine::fd() : DerivativeEngine::dual();
  const DiscrepancyReport rep = run_discrepancies(scenario_pool(config), e, settings);

  std::printf("S-trace condition: with 1/n vs without (prediction (n - 1)|psi_p g^lp|), engine %s\n",
              e.name().c_str());
  std::printf("  %-24s %-6s %-12s %-12s %-12s %s\n", "scenario", "m->n", "with 1/n", "without", "predicted",
              "status");
  for (const auto& r : rep.s_trace)
    std::printf("  %-24s %zu->%-3zu %-12s %-12s %-12s %s\n", r.scenario.c_str(), r.m, r.n,
                format_residual(r.with_factor).c_str(), format_residual(r.without_factor).c_str(),
                format_residual(r.predicted).c_str(), r.consistent ? "as predicted" : "UNEXPECTED");
  std::printf("\nTrace identity g^ij Gbar^k_ij = -d_l g^kl\n");
  std::printf("  %-24s %-12s %-12s %-10s %s\n", "scenario", "defect", "|d det g|", "det g", "status");
  for (const auto& r : rep.trace_identity)
    std::printf("  %-24s %-12s %-12s %-10s %s\n", r.scenario.c_str(), format_residual(r.defect).c_str(),
                format_residual(r.det_variation).c_str(), r.constant_det ? "constant" : "varies",
                r.consistent ? (r.constant_det ? "holds" : "fails, as predicted") : "UNEXPECTED");
  return rep.consistent() ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification checks for geodesic and harmonic mapping problems"};
  app.require_subcommand(1);

  std::string config, filter;
  auto* list = app.add_subcommand("list", "List scenarios");
  list->add_option("--filter", filter, "Substring of the scenario name");
  list->add_option("--config", config, "Scenario file (JSON) instead of the built-in set");

  CheckOptions opts;
  std::uint64_t seed_value = 0;
  auto* check = app.add_subcommand("check", "Run scenarios and report residuals");
  check->add_option("--scenario", opts.scenarios, "Scenario name (repeatable; default: all)");
  check->add_option("--engine", opts.engine, "Derivative engine")
      ->check(CLI::IsMember({"dual", "fd", "both"}));
  check->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"text", "jsonl"}));
  check->add_option("--output", opts.output, "Write the report to a file");
  check->add_option("--config", opts.config, "Scenario file (JSON) instead of the built-in set");
  auto* seed_opt = check->add_option("--seed", seed_value, "Base seed (default: GEOVAR_SEED or built-in)");
  check->add_option("--samples", opts.samples, "Random samples per check")->check(CLI::PositiveNumber);
  check->add_option("--grid", opts.grid, "Grid points per axis for condition checks")->check(CLI::Range(2, 50));
  check->add_option("--fd-step", opts.fd_step, "Finite-difference step")->check(CLI::PositiveNumber);
  check->add_flag("--verbose", opts.verbose, "Print the witness of every record");
  std::map<std::string, double> tol_values;
  for (const auto& c : geovar::check_catalog())
    check->add_option(std::string("--tol.") + c.name, tol_values[c.name], std::string("Tolerance for ") + c.name)
        ->check(CLI::PositiveNumber);

  std::string disc_engine = "dual", disc_config;
  auto* disc = app.add_subcommand("discrepancies", "Evaluate both readings of each disputed formula");
  disc->add_option("--engine", disc_engine, "Derivative engine")->check(CLI::IsMember({"dual", "fd"}));
  disc->add_option("--config", disc_config, "Scenario file (JSON) instead of the built-in set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) return cmd_list(config, filter);
    if (*check) {
      if (*seed_opt) opts.seed = seed_value;
      for (const auto& c : geovar::check_catalog()) {
        auto* o = check->get_option(std::string("--tol.") + c.name);
        if (o->count() > 0) opts.tolerances[c.name] = tol_values[c.name];
      }
      return cmd_check(opts);
    }
    if (*disc) return cmd_discrepancies(disc_config, disc_engine, default_seed());
  } catch (const geovar::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const geovar::UnknownCheck& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const geovar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
