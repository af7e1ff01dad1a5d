#include "thermoporo/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace thermoporo {

MaterialParams preset(std::string_view name) {
  struct Row {
    std::string_view name;
    double alpha, beta, b0;
  };
  static constexpr Row kTable[] = {
      {"PA1", 1.0, 1.0, 1.0}, {"PA2", 0.1, 0.1, 1.0}, {"PA3", 0.1, 1.0, 0.1},
      {"PA4", 1.0, 0.1, 0.1}, {"PA5", 0.1, 0.1, 0.1},
  };
  for (const Row& row : kTable) {
    if (row.name != name) continue;
    MaterialParams p;
    p.alpha = row.alpha;
    p.beta = row.beta;
    p.b0 = row.b0;
    p.a0 = 3.0 * row.b0;
    p.c0 = 3.0 * row.b0;
    return p;
  }
  throw std::invalid_argument("unknown parameter preset '" + std::string(name) +
                              "' (expected PA1..PA5)");
}

bool is_spd(const Mat2& m) {
  const double asym = std::abs(m.xy - m.yx);
  if (asym > 1e-14 * (std::abs(m.xy) + std::abs(m.yx) + 1.0)) return false;
  return symmetric_eigenvalues(m)[0] > 0.0;
}

std::vector<ParamIssue> validate(const MaterialParams& p) {
  using S = ParamIssue::Severity;
  std::vector<ParamIssue> issues;
  auto violation = [&](std::string msg) { issues.push_back({S::kViolation, std::move(msg)}); };
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) violation(std::string(name) + " must be > 0");
  };
  if (!is_spd(p.K)) violation("K not positive definite");
  if (!is_spd(p.Theta)) violation("Theta not positive definite");
  positive(p.lambda, "lambda");
  positive(p.mu, "mu");
  positive(p.alpha, "alpha");
  positive(p.beta, "beta");
  positive(p.a0, "a0");
  positive(p.b0, "b0");
  if (!(p.c0 >= 0.0)) violation("c0 must be >= 0");
  positive(p.sigma1, "sigma1");
  positive(p.sigma2, "sigma2");
  positive(p.gamma, "gamma");
  positive(p.M_cut, "M_cut");
  if (!(p.c0 - 2.0 * p.b0 > 0.0)) issues.push_back({S::kWarning, "c0 - 2 b0 <= 0"});
  if (!(p.a0 - 2.0 * p.b0 >= 0.0)) issues.push_back({S::kWarning, "a0 - 2 b0 < 0"});
  return issues;
}

bool has_violations(const std::vector<ParamIssue>& issues) {
  for (const auto& i : issues) {
    if (i.severity == ParamIssue::Severity::kViolation) return true;
  }
  return false;
}

TimeGrid::TimeGrid(double tau0, double tau, double t_final)
    : tau0_(tau0), tau_(tau), t_final_(t_final), num_steps_(0) {
  if (!(tau0 > 0.0) || !(tau > 0.0)) throw std::invalid_argument("time steps must be > 0");
  if (!(t_final > tau0)) throw std::invalid_argument("t_final must exceed tau0");
  const double steps = (t_final - tau0) / tau;
  const long rounded = std::lround(steps);
  num_steps_ = static_cast<int>(rounded) + 1;
  if (num_steps_ < 2 || std::abs(time(num_steps_) - t_final) > 1e-12) {
    std::ostringstream os;
    os << "time grid does not land on t_final: tau0=" << tau0 << " tau=" << tau
       << " t_final=" << t_final;
    throw std::invalid_argument(os.str());
  }
}

double TimeGrid::time(int n) const {
  if (n <= 0) return 0.0;
  return tau0_ + (n - 1) * tau_;
}

}  // namespace thermoporo
