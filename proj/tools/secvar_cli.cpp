// secvar: second-variation spectra, determinants and Euler-type identities.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "secvar/cli/acceptance.hpp"
#include "secvar/cli/config.hpp"
#include "secvar/cli/report.hpp"
#include "secvar/cli/runtime.hpp"
#include "secvar/errors.hpp"

namespace {

using namespace secvar::cli;

struct FlagValues {
  std::optional<std::size_t> steps;
  std::optional<std::size_t> N;
  std::optional<std::size_t> n_terms;
  std::string output;
  bool table = false;
};

void add_method_flags(CLI::App* cmd, FlagValues& flags) {
  cmd->add_option("--steps", flags.steps, "RK4 steps (env SECVAR_STEPS)")->check(CLI::PositiveNumber);
  cmd->add_option("--N", flags.N, "Galerkin cells (env SECVAR_N)")->check(CLI::PositiveNumber);
  cmd->add_option("--n-terms", flags.n_terms, "series terms (env SECVAR_N_TERMS)")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--output", flags.output, "JSON-lines destination (overrides output.report)");
  cmd->add_flag("--table", flags.table, "also print a summary table to stderr");
}

int run_verb(const std::string& verb, const std::string& config_path, const FlagValues& flags) {
  RunConfig cfg = [&] {
    const Overrides cli_overrides{flags.steps, flags.N, flags.n_terms};
    return load_config(config_path, env_overrides(), cli_overrides);
  }();
  if (!flags.output.empty()) cfg.output.report = flags.output;

  std::ofstream report_file;
  std::ostream* report = &std::cout;
  if (!cfg.output.report.empty()) {
    report_file.open(cfg.output.report);
    if (!report_file) throw secvar::ConfigError("cannot write report to " + cfg.output.report);
    report = &report_file;
  }

  bool records_to_stdout = report == &std::cout;
  std::ofstream csv_file;
  std::ostream* csv = &std::cout;
  if (verb == "spectrum") {
    if (!cfg.output.spectrum_csv.empty()) {
      csv_file.open(cfg.output.spectrum_csv);
      if (!csv_file) throw secvar::ConfigError("cannot write spectrum CSV to " + cfg.output.spectrum_csv);
      csv = &csv_file;
    } else if (records_to_stdout) {
      // The CSV owns stdout; the record still appears in the table.
      report = nullptr;
    }
  }

  const RecordSink sink = [&](const ReportRecord& rec) {
    if (report) {
      *report << to_line(rec) << '\n';
      report->flush();
    }
    if (flags.table || !report) write_table_row(std::cerr, rec);
  };

  RunOutcome outcome;
  if (verb == "report") outcome = run_report(cfg, sink);
  else if (verb == "spectrum") outcome = run_spectrum(cfg, sink, *csv);
  else if (verb == "identity") outcome = run_identities(cfg, sink);
  else outcome = run_roots(cfg, sink);
  if (outcome.flagged > 0)
    std::cerr << "secvar: " << outcome.flagged << " cross-check(s) exceeded tolerance; see \"flagged\" fields\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  ensure_reliable_lapack(argv);

  CLI::App app{"Second-variation spectra, determinants and Euler-type identities"};
  app.require_subcommand(1);

  FlagValues flags;
  std::string config_path;
  for (const char* verb : {"report", "spectrum", "identity", "roots"}) {
    const char* help = std::string(verb) == "report"     ? "full JSON-lines report over all routes"
                       : std::string(verb) == "spectrum" ? "Galerkin spectrum as CSV (n,alpha,branch)"
                       : std::string(verb) == "identity" ? "Euler-type identity checks"
                                                         : "roots of the characteristic function";
    CLI::App* cmd = app.add_subcommand(verb, help);
    cmd->add_option("config", config_path, "JSON config file")->required();
    add_method_flags(cmd, flags);
  }
  app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string verb = chosen->get_name();
  try {
    if (verb == "selftest") {
      bool all = true;
      for (const CriterionResult& r : run_acceptance(std::cout)) all = all && r.passed;
      return all ? 0 : 3;
    }
    return run_verb(verb, config_path, flags);
  } catch (const secvar::Error& e) {
    std::cerr << "secvar: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "secvar: internal error: " << e.what() << '\n';
    return 3;
  }
}
