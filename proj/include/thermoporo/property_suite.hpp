#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace thermoporo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Discrepancies between the two element-wise expressions of the coupling
// form over random broken (v, q) pairs.
struct CouplingComparison {
  int samples = 0;
  double max_expression_gap = 0.0;  // max |b_grad - b_div|
  double max_identity_gap = 0.0;    // max |b_div - b_grad - int_{dOmega} q v.n|
  double max_magnitude = 0.0;       // max |b_grad|
};
CouplingComparison compare_coupling_expressions(int n_subdiv, int degree, int samples,
                                                std::uint64_t seed);

CheckResult check_form_symmetry();
CheckResult check_coupling_expressions(std::uint64_t seed);
CheckResult check_coupling_identity(std::uint64_t seed);
CheckResult check_cutoff(std::uint64_t seed);
CheckResult check_projection_reproduction();
CheckResult check_projection_rates();
CheckResult check_zero_data();
CheckResult check_stability();
CheckResult check_source_residual(std::uint64_t seed);
CheckResult check_solvability();

struct NamedCheck {
  std::string key;  // short identifier, e.g. "symmetry"
  std::function<CheckResult()> run;
};

std::vector<NamedCheck> property_checks(std::uint64_t seed = 12345);

}  // namespace thermoporo
