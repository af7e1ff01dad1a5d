#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "thermoporo/harness.hpp"

namespace thermoporo {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void Bad(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                    "' (expected " + std::string(expected) + ")");
}

// Plain number or a fraction a/b.
double ParseNumber(std::string_view key, std::string_view text) {
  text = Trim(text);
  auto one = [&](std::string_view s) {
    s = Trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) Bad(key, text, "a number");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return one(text);
  const double den = one(text.substr(slash + 1));
  if (den == 0.0) Bad(key, text, "a nonzero denominator");
  return one(text.substr(0, slash)) / den;
}

long long ParseInteger(std::string_view key, std::string_view text) {
  text = Trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    Bad(key, text, "an integer");
  }
  return v;
}

bool ParseBool(std::string_view key, std::string_view text) {
  text = Trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  Bad(key, text, "true or false");
}

template <typename Fn>
void ForEachItem(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    const std::string_view item = Trim(text.substr(start, end - start));
    if (!item.empty()) fn(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
}

}  // namespace

double parse_config_number(std::string_view key, std::string_view text) {
  return ParseNumber(key, text);
}

std::string_view study_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::kSpatial:
      return "spatial";
    case StudyKind::kTemporal:
      return "temporal";
    case StudyKind::kTiming:
      return "timing";
    case StudyKind::kOption1VsOption2:
      return "option1_vs_option2";
  }
  return "unknown";
}

StudyKind parse_study(std::string_view name) {
  for (StudyKind k : {StudyKind::kSpatial, StudyKind::kTemporal, StudyKind::kTiming,
                      StudyKind::kOption1VsOption2}) {
    if (study_name(k) == name) return k;
  }
  throw ConfigError("unknown study '" + std::string(name) +
                    "' (expected spatial, temporal, timing or option1_vs_option2)");
}

void apply_config_value(StudyConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = Trim(raw);
  const std::string v(value);
  auto integer = [&] { return static_cast<int>(ParseInteger(key, value)); };
  auto number = [&] { return ParseNumber(key, value); };
  if (key == "study") {
    c.study = parse_study(value);
  } else if (key == "preset") {
    c.preset = v;
  } else if (key == "k1") {
    c.k1 = integer();
  } else if (key == "k2") {
    c.k2 = integer();
  } else if (key == "k3") {
    c.k3 = integer();
  } else if (key == "mesh_sizes") {
    c.mesh_sizes.clear();
    // "16" and "1/16" both mean 16 subdivisions.
    ForEachItem(value, [&](std::string_view item) {
      if (item.starts_with("1/")) item.remove_prefix(2);
      c.mesh_sizes.push_back(static_cast<int>(ParseInteger(key, item)));
    });
  } else if (key == "tau_rule") {
    if (value != "h2") ParseNumber(key, value);
    c.tau_rule = v;
  } else if (key == "tau_values") {
    c.tau_values.clear();
    ForEachItem(value, [&](std::string_view item) { c.tau_values.push_back(ParseNumber(key, item)); });
  } else if (key == "temporal_mesh") {
    c.temporal_mesh = integer();
  } else if (key == "tau0") {
    if (value != "tau") ParseNumber(key, value);
    c.tau0 = v;
  } else if (key == "t_final") {
    c.t_final = number();
  } else if (key == "scheme") {
    c.scheme = v;
  } else if (key == "initializer") {
    c.initializer = v;
  } else if (key == "solver") {
    c.solver = v;
  } else if (key == "solver_tol") {
    c.solver_tol = number();
  } else if (key == "picard_tol") {
    c.picard_tol = number();
  } else if (key == "picard_max") {
    c.picard_max = integer();
  } else if (key == "M_cut") {
    c.M_cut = number();
  } else if (key == "gamma") {
    c.gamma = number();
  } else if (key == "sigma1") {
    c.sigma1 = number();
  } else if (key == "sigma2") {
    c.sigma2 = number();
  } else if (key == "output") {
    c.output = v;
  } else if (key == "format") {
    c.format = v;
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(ParseInteger(key, value));
  } else if (key == "threads") {
    c.threads = integer();
  } else if (key == "record_seconds") {
    c.record_seconds = ParseBool(key, value);
  } else if (key == "log") {
    c.log = v;
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

StudyConfig parse_config(std::istream& in) {
  StudyConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    const auto comment = s.find_first_of("#;");
    if (comment != std::string_view::npos) s = s.substr(0, comment);
    s = Trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = Trim(s.substr(0, eq));
    try {
      apply_config_value(c, key, s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in);
}

void validate_config(const StudyConfig& c) {
  try {
    (void)preset(c.preset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.k1 < 1 || c.k2 < 1 || c.k3 < 1) throw ConfigError("polynomial degrees must be >= 1");
  if (c.mesh_sizes.empty()) throw ConfigError("mesh_sizes must not be empty");
  for (std::size_t i = 0; i < c.mesh_sizes.size(); ++i) {
    if (c.mesh_sizes[i] < 1) throw ConfigError("mesh sizes must be >= 1");
    if (i > 0 && c.mesh_sizes[i] <= c.mesh_sizes[i - 1]) {
      throw ConfigError("mesh_sizes must be strictly increasing (refinement order)");
    }
  }
  if (c.tau_rule != "h2") {
    if (!(ParseNumber("tau_rule", c.tau_rule) > 0.0)) throw ConfigError("tau_rule must be h2 or > 0");
    if (c.study != StudyKind::kTemporal) {
      throw ConfigError("spatial, timing and option studies require tau_rule = h2");
    }
  }
  if (c.study == StudyKind::kTemporal) {
    if (c.tau_values.empty()) throw ConfigError("tau_values must not be empty");
    for (std::size_t i = 0; i < c.tau_values.size(); ++i) {
      if (!(c.tau_values[i] > 0.0)) throw ConfigError("tau_values must be > 0");
      if (i > 0 && !(c.tau_values[i] < c.tau_values[i - 1])) {
        throw ConfigError("tau_values must be strictly decreasing");
      }
    }
    if (c.temporal_mesh < 1) throw ConfigError("temporal_mesh must be >= 1");
  }
  if (c.tau0 != "tau" && !(ParseNumber("tau0", c.tau0) > 0.0)) {
    throw ConfigError("tau0 must be 'tau' or > 0");
  }
  if (c.t_final && !(*c.t_final > 0.0)) throw ConfigError("t_final must be > 0");
  if (c.scheme != "sdg" && c.scheme != "implicit") throw ConfigError("scheme must be sdg or implicit");
  if (c.initializer != "option1" && c.initializer != "option2") {
    throw ConfigError("initializer must be option1 or option2");
  }
  if (c.solver != "direct" && c.solver != "lu" && c.solver != "iterative") {
    throw ConfigError("solver must be direct, lu or iterative");
  }
  if (!(c.solver_tol > 0.0) || !(c.picard_tol > 0.0)) throw ConfigError("tolerances must be > 0");
  if (c.picard_max < 1) throw ConfigError("picard_max must be >= 1");
  if (c.format != "csv" && c.format != "markdown") throw ConfigError("format must be csv or markdown");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  const auto issues = validate(study_params(c));
  for (const auto& issue : issues) {
    if (issue.severity == ParamIssue::Severity::kViolation) {
      throw ConfigError("parameter violation: " + issue.message);
    }
  }
}

MaterialParams study_params(const StudyConfig& c) {
  MaterialParams p = preset(c.preset);
  if (c.M_cut) p.M_cut = *c.M_cut;
  if (c.gamma) p.gamma = *c.gamma;
  if (c.sigma1) p.sigma1 = *c.sigma1;
  if (c.sigma2) p.sigma2 = *c.sigma2;
  return p;
}

SolverOptions study_solver(const StudyConfig& c) {
  SolverOptions o;
  o.tol = c.solver_tol;
  if (c.solver == "direct") {
    o.kind = SolverKind::kCholesky;
  } else if (c.solver == "lu") {
    o.kind = SolverKind::kLU;
  } else {
    o.kind = SolverKind::kIterative;
  }
  return o;
}

Scheme study_scheme(const StudyConfig& c) {
  if (c.scheme == "implicit") return Scheme::kImplicit;
  return c.initializer == "option1" ? Scheme::kSdgOption1 : Scheme::kSdgOption2;
}

TableFormat parse_format(std::string_view name) {
  if (name == "csv") return TableFormat::kCsv;
  if (name == "markdown") return TableFormat::kMarkdown;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or markdown)");
}

}  // namespace thermoporo
