// Command-line driver: convergence tables, timing comparisons, self-test.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "thermoporo/harness.hpp"
#include "thermoporo/property_suite.hpp"
#include "thermoporo/simd/kernels.hpp"

namespace {

using namespace thermoporo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitThreshold = 3;

struct CommonFlags {
  std::string scheme;
  std::string init;
  std::string tau0;
  int k = 0;
  std::string format;
  int threads = 0;
  std::string out;
  bool assert_thresholds = false;
  bool no_seconds = false;
  std::string log;
};

void AddCommon(CLI::App* app, CommonFlags& f) {
  app->add_option("--scheme", f.scheme, "sdg or implicit")->check(CLI::IsMember({"sdg", "implicit"}));
  app->add_option("--init", f.init, "option1 or option2")->check(CLI::IsMember({"option1", "option2"}));
  app->add_option("--tau0", f.tau0, "first step size, or 'tau'");
  app->add_option("--k", f.k, "polynomial degree for all fields")->check(CLI::PositiveNumber);
  app->add_option("--format", f.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  app->add_option("--threads", f.threads, "parallel table cells")->check(CLI::PositiveNumber);
  app->add_option("--out", f.out, "output path (default: stdout)");
  app->add_flag("--assert", f.assert_thresholds, "exit 3 when convergence thresholds fail");
  app->add_flag("--no-seconds", f.no_seconds, "write 0 in the seconds column");
  app->add_option("--log", f.log, "append per-step log lines to this file");
}

void ApplyCommon(StudyConfig& c, const CommonFlags& f) {
  if (!f.scheme.empty()) c.scheme = f.scheme;
  if (!f.init.empty()) c.initializer = f.init;
  if (!f.tau0.empty()) apply_config_value(c, "tau0", f.tau0);
  if (f.k > 0) c.k1 = c.k2 = c.k3 = f.k;
  if (!f.format.empty()) c.format = f.format;
  if (f.threads > 0) c.threads = f.threads;
  if (!f.out.empty()) c.output = f.out;
  if (f.no_seconds) c.record_seconds = false;
  if (!f.log.empty()) c.log = f.log;
}

int RunStudy(const StudyConfig& config, bool assert_thresholds) {
  validate_config(config);
  const std::vector<TableRow> rows = run_study(config);
  const TableFormat format = parse_format(config.format);
  if (config.output.empty()) {
    emit_table(rows, format, std::cout, config.record_seconds);
  } else {
    emit_table(rows, format, config.output, config.record_seconds);
  }
  bool failed_run = false;
  for (const TableRow& r : rows) {
    if (r.failed) {
      std::cerr << "run failed at h_or_tau=" << r.h_or_tau << ": " << r.failure << '\n';
      failed_run = true;
    }
  }
  if (failed_run) return kExitSolver;
  if (assert_thresholds) {
    bool ok = true;
    for (const CheckResult& c : assess_study(config, rows)) {
      std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      ok = ok && c.passed;
    }
    if (!ok) return kExitThreshold;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermo-poroelasticity DG solver: convergence studies and checks"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run a study described by a configuration file");
  run->add_option("--config", config_path, "key = value configuration file")->required();
  AddCommon(run, run_flags);

  CommonFlags table_flags;
  std::string study = "spatial";
  std::string preset_name = "PA1";
  std::string h_list;
  std::string tau_list;
  int mesh = 0;
  auto* table = app.add_subcommand("table", "run a convergence or timing table");
  table->set_help_flag("--help", "print this help message and exit");
  table->add_option("--study", study, "spatial, temporal, timing or option1_vs_option2");
  table->add_option("--preset", preset_name, "PA1..PA5");
  table->add_option("--h", h_list, "mesh subdivisions, e.g. 4,8,16,32 or 1/4,1/8 (h = 1/n)");
  table->add_option("--tau", tau_list, "temporal study step sizes, e.g. 1/4,1/8,1/16");
  table->add_option("--mesh", mesh, "temporal study subdivisions")->check(CLI::PositiveNumber);
  AddCommon(table, table_flags);

  std::uint64_t seed = 12345;
  std::string only;
  auto* selftest = app.add_subcommand("selftest", "run the property suite");
  selftest->add_option("--seed", seed, "random seed");
  selftest->add_option("--only", only, "run a single check by key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      StudyConfig c = load_config(config_path);
      ApplyCommon(c, run_flags);
      return RunStudy(c, run_flags.assert_thresholds);
    }
    if (table->parsed()) {
      StudyConfig c;
      apply_config_value(c, "study", study);
      apply_config_value(c, "preset", preset_name);
      if (!h_list.empty()) apply_config_value(c, "mesh_sizes", h_list);
      if (!tau_list.empty()) apply_config_value(c, "tau_values", tau_list);
      if (mesh > 0) c.temporal_mesh = mesh;
      ApplyCommon(c, table_flags);
      return RunStudy(c, table_flags.assert_thresholds);
    }
    if (selftest->parsed()) {
      std::cout << "kernels: " << simd::isa_name(simd::active_isa()) << '\n';
      bool ok = true;
      bool any = false;
      for (const NamedCheck& check : property_checks(seed)) {
        if (!only.empty() && check.key != only) continue;
        any = true;
        const CheckResult r = check.run();
        std::cout << (r.passed ? "PASS " : "FAIL ") << check.key << ": " << r.name << " | " << r.detail
                  << std::endl;
        ok = ok && r.passed;
      }
      if (!any) {
        std::cerr << "no check named '" << only << "'\n";
        return kExitConfig;
      }
      return ok ? kExitOk : kExitThreshold;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const PicardError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
