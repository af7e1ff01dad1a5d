#include "thermoporo/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace thermoporo {

namespace {

std::mutex g_log_mutex;

// Runs independent cells on up to `threads` workers; results keep cell order.
std::vector<TableRow> RunCells(const std::vector<std::function<TableRow()>>& cells, int threads) {
  std::vector<TableRow> rows(cells.size());
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || cells.size() <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) rows[i] = cells[i]();
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, cells.size()); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = cells[i]();
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

std::string FormatValue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

std::string FormatRate(const std::optional<double>& r) {
  if (!r) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

}  // namespace

double default_t_final(const StudyConfig& config, double tau, double tau0) {
  if (config.t_final) return *config.t_final;
  return tau0 == tau ? 1.0 : 1.0 + tau0;
}

double resolve_tau0(const StudyConfig& config, double tau) {
  if (config.tau0 == "tau") return tau;
  return parse_config_number("tau0", config.tau0);
}

TableRow run_case(const StudyConfig& config, Scheme scheme, int n_subdiv, double tau, double tau0,
                  double t_final, bool energy) {
  TableRow row;
  const MaterialParams params = study_params(config);
  const ManufacturedCase mc(params);
  const auto start = std::chrono::steady_clock::now();
  try {
    const Discretization d = make_discretization(n_subdiv, config.k1, config.k2, config.k3, params);
    RunConfig rc;
    rc.scheme = scheme;
    rc.tau0 = tau0;
    rc.tau = tau;
    rc.t_final = t_final;
    rc.picard = {config.picard_tol, config.picard_max};
    rc.solver = study_solver(config);
    std::ostringstream log;
    if (!config.log.empty()) rc.log = &log;
    const RunResult result = run_transient(d, mc.problem(), rc);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const StepReport& s : result.steps) {
      row.picard_max_iterations = std::max(row.picard_max_iterations, s.picard_iterations);
    }
    row.cutoff = result.cutoff;
    const ErrorNorms e = error_norms(result.final_state.u, result.final_state.p,
                                     result.final_state.T, mc, result.final_state.t);
    row.err_u = energy ? e.u_energy : e.u_l2;
    row.err_p = e.p_l2;
    row.err_T = e.T_l2;
    if (!config.log.empty()) {
      const std::lock_guard<std::mutex> lock(g_log_mutex);
      std::ofstream out(config.log, std::ios::app);
      out << "# scheme=" << scheme_name(scheme) << " n=" << n_subdiv << " tau=" << tau << '\n'
          << log.str();
    }
  } catch (const SolverError& e) {
    row.failed = true;
    row.failure = e.what();
  } catch (const PicardError& e) {
    row.failed = true;
    row.failure = e.what();
  } catch (const StepError& e) {
    row.failed = true;
    row.failure = e.what();
  }
  if (row.failed) {
    row.err_u = row.err_p = row.err_T = std::nan("");
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

void compute_rates(std::vector<TableRow>& rows) {
  std::map<std::string, std::size_t> previous;  // last row index per scheme group
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TableRow& b = rows[i];
    b.rate_u = b.rate_p = b.rate_T = std::nullopt;
    const auto it = previous.find(b.scheme);
    if (it == previous.end()) {
      previous.emplace(b.scheme, i);
      continue;
    }
    const std::size_t prev = std::exchange(it->second, i);
    const TableRow& a = rows[prev];
    if (a.failed || b.failed) continue;
    const double lx = std::log(a.h_or_tau / b.h_or_tau);
    auto rate = [&](double ea, double eb) -> std::optional<double> {
      if (!(ea > 0.0) || !(eb > 0.0) || lx == 0.0) return std::nullopt;
      return std::log(ea / eb) / lx;
    };
    b.rate_u = rate(a.err_u, b.err_u);
    b.rate_p = rate(a.err_p, b.err_p);
    b.rate_T = rate(a.err_T, b.err_T);
  }
}

std::vector<TableRow> run_spatial_study(const StudyConfig& config) {
  validate_config(config);
  const Scheme scheme = study_scheme(config);
  std::vector<std::function<TableRow()>> cells;
  for (int n : config.mesh_sizes) {
    cells.push_back([&config, scheme, n] {
      const double tau = 1.0 / (static_cast<double>(n) * n);
      const double tau0 = resolve_tau0(config, tau);
      TableRow r = run_case(config, scheme, n, tau, tau0, default_t_final(config, tau, tau0), true);
      r.h_or_tau = 1.0 / n;
      return r;
    });
  }
  std::vector<TableRow> rows = RunCells(cells, config.threads);
  compute_rates(rows);
  return rows;
}

std::vector<TableRow> run_temporal_study(const StudyConfig& config) {
  validate_config(config);
  const Scheme scheme = study_scheme(config);
  std::vector<std::function<TableRow()>> cells;
  for (double tau : config.tau_values) {
    cells.push_back([&config, scheme, tau] {
      const double tau0 = resolve_tau0(config, tau);
      TableRow r = run_case(config, scheme, config.temporal_mesh, tau, tau0,
                            default_t_final(config, tau, tau0), false);
      r.h_or_tau = tau;
      return r;
    });
  }
  std::vector<TableRow> rows = RunCells(cells, config.threads);
  compute_rates(rows);
  return rows;
}

std::vector<TableRow> run_timing_comparison(const StudyConfig& config) {
  validate_config(config);
  const Scheme sdg = config.initializer == "option1" ? Scheme::kSdgOption1 : Scheme::kSdgOption2;
  std::vector<TableRow> rows;
  for (int n : config.mesh_sizes) {
    const double tau = 1.0 / (static_cast<double>(n) * n);
    const double tau0 = resolve_tau0(config, tau);
    const double tf = default_t_final(config, tau, tau0);
    for (Scheme s : {sdg, Scheme::kImplicit}) {
      TableRow r = run_case(config, s, n, tau, tau0, tf, true);
      r.h_or_tau = 1.0 / n;
      r.scheme = s == Scheme::kImplicit ? "implicit" : "sdg";
      rows.push_back(std::move(r));
    }
  }
  compute_rates(rows);
  return rows;
}

std::vector<TableRow> run_option_comparison(const StudyConfig& config) {
  validate_config(config);
  std::vector<std::function<TableRow()>> cells;
  for (int n : config.mesh_sizes) {
    for (Scheme s : {Scheme::kSdgOption1, Scheme::kSdgOption2}) {
      cells.push_back([&config, s, n] {
        const double tau = 1.0 / (static_cast<double>(n) * n);
        double tau0 = tau;
        if (s == Scheme::kSdgOption1) tau0 = config.tau0 == "tau" ? 1e-6 : resolve_tau0(config, tau);
        TableRow r = run_case(config, s, n, tau, tau0, tau0 == tau ? 1.0 : 1.0 + tau0, true);
        r.h_or_tau = 1.0 / n;
        r.scheme = std::string(scheme_name(s));
        return r;
      });
    }
  }
  std::vector<TableRow> rows = RunCells(cells, config.threads);
  compute_rates(rows);
  return rows;
}

std::vector<TableRow> run_study(const StudyConfig& config) {
  switch (config.study) {
    case StudyKind::kSpatial:
      return run_spatial_study(config);
    case StudyKind::kTemporal:
      return run_temporal_study(config);
    case StudyKind::kTiming:
      return run_timing_comparison(config);
    case StudyKind::kOption1VsOption2:
      return run_option_comparison(config);
  }
  return {};
}

void emit_table(const std::vector<TableRow>& rows, TableFormat format, std::ostream& out,
                bool record_seconds) {
  if (rows.empty()) throw std::invalid_argument("emit_table: no rows");
  bool with_scheme = false;
  for (const TableRow& r : rows) with_scheme = with_scheme || !r.scheme.empty();
  auto seconds = [&](const TableRow& r) { return FormatValue(record_seconds ? r.seconds : 0.0); };
  if (format == TableFormat::kCsv) {
    out << "h_or_tau,err_u,rate_u,err_p,rate_p,err_T,rate_T,seconds";
    if (with_scheme) out << ",scheme";
    out << '\n';
    for (const TableRow& r : rows) {
      out << FormatValue(r.h_or_tau) << ',' << FormatValue(r.err_u) << ',' << FormatRate(r.rate_u)
          << ',' << FormatValue(r.err_p) << ',' << FormatRate(r.rate_p) << ','
          << FormatValue(r.err_T) << ',' << FormatRate(r.rate_T) << ',' << seconds(r);
      if (with_scheme) out << ',' << r.scheme;
      out << '\n';
    }
    return;
  }
  auto rate = [](const std::optional<double>& v) { return v ? FormatRate(v) : std::string("-"); };
  out << "| h or tau | err u | R | err p | R | err T | R | seconds |";
  if (with_scheme) out << " scheme |";
  out << "\n|---|---|---|---|---|---|---|---|";
  if (with_scheme) out << "---|";
  out << '\n';
  for (const TableRow& r : rows) {
    out << "| " << FormatValue(r.h_or_tau) << " | " << FormatValue(r.err_u) << " | " << rate(r.rate_u)
        << " | " << FormatValue(r.err_p) << " | " << rate(r.rate_p) << " | " << FormatValue(r.err_T)
        << " | " << rate(r.rate_T) << " | " << seconds(r) << " |";
    if (with_scheme) out << ' ' << r.scheme << " |";
    out << '\n';
  }
}

void emit_table(const std::vector<TableRow>& rows, TableFormat format, const std::string& path,
                bool record_seconds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write table to '" + path + "'");
  emit_table(rows, format, out, record_seconds);
  if (!out) throw std::runtime_error("error while writing table to '" + path + "'");
}

}  // namespace thermoporo

namespace thermoporo {

namespace {

std::vector<const TableRow*> Group(const std::vector<TableRow>& rows, const std::string& scheme) {
  std::vector<const TableRow*> out;
  for (const TableRow& r : rows) {
    if (r.scheme == scheme) out.push_back(&r);
  }
  return out;
}

CheckResult RateCheck(const std::string& label, const TableRow& row, const double nominal[3],
                      double lo_tol, double hi_tol) {
  const std::optional<double> rates[] = {row.rate_u, row.rate_p, row.rate_T};
  const char* names[] = {"u", "p", "T"};
  bool ok = true;
  std::ostringstream d;
  for (int i = 0; i < 3; ++i) {
    const bool pass = rates[i] && *rates[i] >= nominal[i] - lo_tol && *rates[i] <= nominal[i] + hi_tol;
    ok = ok && pass;
    d << names[i] << " " << (rates[i] ? FormatRate(rates[i]) : std::string("n/a")) << " ";
  }
  return {label, ok, d.str()};
}

}  // namespace

std::vector<CheckResult> assess_study(const StudyConfig& config, const std::vector<TableRow>& rows) {
  std::vector<CheckResult> out;
  for (const TableRow& r : rows) {
    if (r.failed) out.push_back({"run completed", false, r.failure});
  }
  const double spatial[3] = {static_cast<double>(config.k1), config.k2 + 1.0, config.k3 + 1.0};
  const double temporal[3] = {1.0, 1.0, 1.0};
  switch (config.study) {
    case StudyKind::kSpatial:
      if (rows.size() >= 2) out.push_back(RateCheck("finest-pair spatial rates", rows.back(), spatial, 0.1, 0.1));
      break;
    case StudyKind::kTemporal:
      if (rows.size() >= 2) out.push_back(RateCheck("finest-pair temporal rates", rows.back(), temporal, 0.15, 0.15));
      break;
    case StudyKind::kTiming: {
      const auto sdg = Group(rows, "sdg");
      const auto imp = Group(rows, "implicit");
      for (std::size_t i = 0; i < std::min(sdg.size(), imp.size()); ++i) {
        const double ratio = imp[i]->seconds / sdg[i]->seconds;
        out.push_back({"implicit/sdg time ratio at h=" + FormatValue(sdg[i]->h_or_tau), ratio >= 2.0,
                       "ratio " + FormatRate(ratio)});
      }
      break;
    }
    case StudyKind::kOption1VsOption2: {
      const auto o1 = Group(rows, "sdg_option1");
      const auto o2 = Group(rows, "sdg_option2");
      if (o1.size() >= 2) out.push_back(RateCheck("option 1 finest-pair rates", *o1.back(), spatial, 0.1, 0.1));
      for (std::size_t i = 0; i < std::min(o1.size(), o2.size()); ++i) {
        const double gu = std::abs(o1[i]->err_u - o2[i]->err_u) / o2[i]->err_u;
        const double gp = std::abs(o1[i]->err_p - o2[i]->err_p) / o2[i]->err_p;
        const double gt = std::abs(o1[i]->err_T - o2[i]->err_T) / o2[i]->err_T;
        const double worst = std::max({gu, gp, gt});
        out.push_back({"option 1 vs option 2 errors at h=" + FormatValue(o1[i]->h_or_tau), worst <= 0.1,
                       "max relative difference " + FormatRate(worst)});
      }
      break;
    }
  }
  return out;
}

}  // namespace thermoporo
