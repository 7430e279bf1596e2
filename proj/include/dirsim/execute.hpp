#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dirsim/analytic_dirichlet.hpp"
#include "dirsim/integrator.hpp"
#include "dirsim/processes.hpp"
#include "dirsim/run_config.hpp"
#include "dirsim/stats.hpp"

namespace dirsim {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

inline std::string histogram_filename(double time) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "histogram_t%.10g.csv", time);
  return buf;
}

/// Header of moments.csv for N components: time, means, upper-triangle
/// second moments (1-based indices), projection rate.
inline std::string moments_csv_header(std::size_t n) {
  std::string h = "time";
  for (std::size_t a = 1; a <= n; ++a) h += ",mean_" + std::to_string(a);
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = a; b <= n; ++b) h += ",cov_" + std::to_string(a) + std::to_string(b);
  return h + ",projection_rate";
}

inline std::string moments_csv_row(double time, const MomentReport& m, double projection_rate) {
  std::string row = format_real(time);
  for (double v : m.mean) row += "," + format_real(v);
  for (std::size_t a = 0; a < m.dimension(); ++a)
    for (std::size_t b = a; b < m.dimension(); ++b) row += "," + format_real(m.second_central(a, b));
  return row + "," + format_real(projection_rate);
}

/// y1_center,y2_center,density for every cell meeting the triangle
/// Y1 + Y2 <= 1 (cells with i + j <= bins - 1).
inline std::string histogram_csv(const JointHistogram& h) {
  std::string out = "y1_center,y2_center,density\n";
  for (std::size_t i = 0; i < h.bins(); ++i)
    for (std::size_t j = 0; i + j < h.bins(); ++j)
      out += format_real(h.cell_center(i)) + "," + format_real(h.cell_center(j)) + "," +
             format_real(h.density(i, j)) + "\n";
  return out;
}

inline nlohmann::json to_json(const MomentReport& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t a = 0; a < m.dimension(); ++a) {
    std::vector<double> row(m.dimension());
    for (std::size_t b = 0; b < m.dimension(); ++b) row[b] = m.second_central(a, b);
    rows.push_back(row);
  }
  return {{"mean", m.mean}, {"second_central", rows}};
}

struct RunResult {
  Ensemble final_ensemble;
  ConvergenceTrace trace;
  std::vector<double> projection_rates;  // one per emission, aligned with trace
  std::optional<double> stationarity_time;
  nlohmann::json summary;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

/// Runs the configured simulation. When cfg.output is non-empty, writes
/// moments.csv, one histogram_t<time>.csv per emission (N = 3 only) and
/// summary.json there. `observer` sees every emission after it is recorded.
inline RunResult simulate(const RunConfig& cfg, const StatisticsSink& observer = {}) {
  cfg.validate();
  namespace fs = std::filesystem;
  const bool write = !cfg.output.empty();
  const fs::path dir(cfg.output);
  std::ofstream moments_out;
  const std::size_t n = dimension(cfg.process);
  if (write) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    moments_out.open(dir / "moments.csv", std::ios::binary | std::ios::trunc);
    if (!moments_out) throw Error("cannot open " + (dir / "moments.csv").string() + " for writing");
    moments_out << moments_csv_header(n) << "\n";
  }

  RunResult result;
  const auto law = stationary_law(cfg.process);
  std::uint64_t emissions = 0;
  auto sink = [&](const Emission& em) {
    result.trace.append(em.time, em.moments);
    result.projection_rates.push_back(em.projection_rate);
    ++emissions;
    if (write) {
      moments_out << moments_csv_row(em.time, em.moments, em.projection_rate) << "\n";
      if (!moments_out) throw Error("failed writing moments.csv");
      if (n == 3 && cfg.histogram_bins > 0)
        detail::write_file(dir / histogram_filename(em.time),
                           histogram_csv(joint_histogram(em.ensemble, cfg.histogram_bins)));
    }
    if (observer) observer(em);
  };

  result.final_ensemble = run(cfg.process, build_initial_ensemble(cfg), cfg.integrator(), sink);

  const auto& times = result.trace.times();
  if (times.size() >= 2 && times.back() - times.front() >= 2.0 * cfg.stationarity_window)
    result.stationarity_time = stationarity_detector(result.trace, cfg.stationarity_window, cfg.stationarity_tol);

  using nlohmann::json;
  json summary;
  summary["config"] = to_json(cfg);
  const auto final_moments = result.trace.reports().back();
  if (law) {
    summary["omega"] = std::vector<double>(law->omega().begin(), law->omega().end());
    summary["analytic"] = to_json(analytic_moments(*law));
    std::vector<double> ks;
    for (std::size_t a = 0; a < n; ++a) ks.push_back(marginal_ks(result.final_ensemble, a, *law));
    summary["ks"] = ks;
  } else {
    summary["omega"] = nullptr;
    summary["analytic"] = nullptr;
    summary["ks"] = nullptr;
  }
  summary["final"] = to_json(final_moments);
  summary["final"]["time"] = result.final_ensemble.time;
  summary["final"]["steps"] = result.final_ensemble.step_count;
  summary["stationarity_time"] =
      result.stationarity_time ? json(*result.stationarity_time) : json(nullptr);
  summary["emissions"] = emissions;
  result.summary = summary;

  if (write) {
    moments_out.close();
    if (!moments_out) throw Error("failed closing moments.csv");
    detail::write_file(dir / "summary.json", summary.dump(2) + "\n");
  }
  return result;
}

/// CLI entry: runs and reports failures on `err` as a nonzero status.
inline int execute(const RunConfig& cfg, std::ostream& err) {
  try {
    simulate(cfg);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dirsim
