#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thermoporo/manufactured.hpp"
#include "thermoporo/params.hpp"
#include "thermoporo/property_suite.hpp"
#include "thermoporo/sparse.hpp"
#include "thermoporo/timestepper.hpp"

namespace thermoporo {

enum class StudyKind { kSpatial, kTemporal, kTiming, kOption1VsOption2 };

std::string_view study_name(StudyKind kind);
StudyKind parse_study(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StudyConfig {
  StudyKind study = StudyKind::kSpatial;
  std::string preset = "PA1";
  int k1 = 1;
  int k2 = 1;
  int k3 = 1;
  // Mesh subdivisions per side; the table label is h = 1 / n.
  std::vector<int> mesh_sizes{4, 8, 16, 32};
  // "h2" (tau = h^2) or a fixed positive step.
  std::string tau_rule = "h2";
  // Temporal study: step sizes and the fixed mesh.
  std::vector<double> tau_values{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  int temporal_mesh = 64;
  // "tau" (tau0 = tau) or a positive value.
  std::string tau0 = "tau";
  // Defaults to 1 when tau0 = tau and to 1 + tau0 otherwise.
  std::optional<double> t_final;
  std::string scheme = "sdg";           // sdg | implicit
  std::string initializer = "option2";  // option1 | option2
  std::string solver = "direct";        // direct | lu | iterative
  double solver_tol = 1e-10;
  double picard_tol = 1e-10;
  int picard_max = 100;
  std::optional<double> M_cut;
  std::optional<double> gamma;
  std::optional<double> sigma1;
  std::optional<double> sigma2;
  std::string output;  // empty: standard output
  std::string format = "csv";
  std::uint64_t seed = 12345;
  int threads = 1;
  bool record_seconds = true;
  std::string log;  // per-step log file, empty for none
};

// key = value lines; '#' and ';' start comments; [section] headers are
// accepted and ignored. Unknown keys and malformed values throw ConfigError.
StudyConfig parse_config(std::istream& in);
StudyConfig load_config(const std::string& path);
// Applies one key/value pair (the same keys as the file format).
void apply_config_value(StudyConfig& config, std::string_view key, std::string_view value);
// A number or a fraction a/b; throws ConfigError naming `key`.
double parse_config_number(std::string_view key, std::string_view text);
// Checks cross-field consistency; throws ConfigError.
void validate_config(const StudyConfig& config);

MaterialParams study_params(const StudyConfig& config);
SolverOptions study_solver(const StudyConfig& config);
// Scheme for the configured scheme/initializer pair.
Scheme study_scheme(const StudyConfig& config);

struct TableRow {
  double h_or_tau = 0.0;
  double err_u = 0.0;
  double err_p = 0.0;
  double err_T = 0.0;
  std::optional<double> rate_u;
  std::optional<double> rate_p;
  std::optional<double> rate_T;
  double seconds = 0.0;
  std::string scheme;  // set for studies comparing schemes
  bool failed = false;
  std::string failure;
  int picard_max_iterations = 0;
  CutoffStats cutoff;
};

// rate = log(e_coarse / e_fine) / log(x_coarse / x_fine), per scheme group.
void compute_rates(std::vector<TableRow>& rows);

// config.t_final when set, else 1 for tau0 = tau and 1 + tau0 otherwise.
double default_t_final(const StudyConfig& config, double tau, double tau0);
// tau0 for a given tau: tau itself or the configured value.
double resolve_tau0(const StudyConfig& config, double tau);

// One manufactured-solution run at n subdivisions. The u error is in the
// energy norm when `energy` is set, else in L2. Solver and time-stepping
// failures produce a row marked failed.
TableRow run_case(const StudyConfig& config, Scheme scheme, int n_subdiv, double tau, double tau0,
                  double t_final, bool energy);

std::vector<TableRow> run_spatial_study(const StudyConfig& config);
std::vector<TableRow> run_temporal_study(const StudyConfig& config);
// Runs are sequential regardless of `threads`.
std::vector<TableRow> run_timing_comparison(const StudyConfig& config);
std::vector<TableRow> run_option_comparison(const StudyConfig& config);
std::vector<TableRow> run_study(const StudyConfig& config);

enum class TableFormat { kCsv, kMarkdown };
TableFormat parse_format(std::string_view name);

void emit_table(const std::vector<TableRow>& rows, TableFormat format, std::ostream& out,
                bool record_seconds = true);
// Throws std::runtime_error on an unwritable path.
void emit_table(const std::vector<TableRow>& rows, TableFormat format, const std::string& path,
                bool record_seconds = true);

// Threshold checks on a finished study, as used by `--assert`:
//   spatial / option studies: finest-pair rates within 0.1 of (k1, k2 + 1, k3 + 1);
//   temporal: finest-pair rates in [0.85, 1.15];
//   timing: implicit / sdg wall-clock >= 2 at every h;
//   option comparison: option-1 errors within 10% of option 2 at every h.
std::vector<CheckResult> assess_study(const StudyConfig& config, const std::vector<TableRow>& rows);

}  // namespace thermoporo
