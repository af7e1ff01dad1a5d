#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "thermoporo/geometry.hpp"

namespace thermoporo {

struct MaterialParams {
  double lambda = 1.0;  // Lame constants
  double mu = 1.0;
  double alpha = 1.0;  // Biot-Willis constant
  double beta = 1.0;   // thermal stress coefficient
  double a0 = 3.0;     // effective volumetric heat capacity
  double b0 = 1.0;     // thermal dilation coefficient
  double c0 = 3.0;     // constrained specific storage
  Mat2 K = Mat2::identity();      // permeability / viscosity
  Mat2 Theta = Mat2::identity();  // effective thermal conductivity
  double sigma1 = 1e6;  // displacement interior penalty
  double sigma2 = 1e6;  // pressure / temperature interior penalty
  double gamma = 5.0;   // splitting stabilization
  double M_cut = 1e3;   // flux cut-off bound
};

// Coupling-strength presets PA1..PA5.
MaterialParams preset(std::string_view name);

struct ParamIssue {
  enum class Severity { kWarning, kViolation };
  Severity severity;
  std::string message;
};

// Empty iff every invariant holds. Storage/capacity compatibility
// (c0 - 2 b0 > 0, a0 - 2 b0 >= 0) is reported as a warning only.
std::vector<ParamIssue> validate(const MaterialParams& params);
bool has_violations(const std::vector<ParamIssue>& issues);

bool is_spd(const Mat2& m);

// t_1 = tau0, t_n = t_1 + (n - 1) tau, t_N = t_final.
class TimeGrid {
 public:
  TimeGrid(double tau0, double tau, double t_final);

  double tau0() const { return tau0_; }
  double tau() const { return tau_; }
  double t_final() const { return t_final_; }
  int num_steps() const { return num_steps_; }  // N
  double time(int n) const;
  double step_size(int n) const { return n == 1 ? tau0_ : tau_; }  // t_n - t_{n-1}

 private:
  double tau0_;
  double tau_;
  double t_final_;
  int num_steps_;
};

}  // namespace thermoporo
