#pragma once

// Monte Carlo sweep over the cutoff frequency n: per-trial matching errors
// of ESPRIT, log-log slope fits, and the CSV / JSON artifacts.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specest/esprit.hpp"
#include "specest/rng.hpp"
#include "specest/signal_io.hpp"
#include "specest/signal_model.hpp"

namespace specest {

enum class Statistic { median, mean };

inline std::string_view to_string(Statistic s) noexcept { return s == Statistic::median ? "median" : "mean"; }

inline Statistic parse_statistic(std::string_view s) {
  if (s == "median") return Statistic::median;
  if (s == "mean") return Statistic::mean;
  throw Error(Errc::ConfigInvalid, "unknown statistic '" + std::string(s) + "'");
}

struct ScalingConfig {
  explicit ScalingConfig(SpectralMeasure m) : measure(std::move(m)) {}

  SpectralMeasure measure;
  double alpha = 0.0;
  NoiseKind noise_kind = NoiseKind::complex_gaussian;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  Solver solver = Solver::fast;
  Statistic statistic = Statistic::median;
  /// When false, wall_ms is recorded as 0 so output files are bit-reproducible.
  bool record_timing = true;

  void validate() const {
    if (trials < 1) throw Error(Errc::ConfigInvalid, "field 'trials' must be at least 1");
    if (n_grid.empty()) throw Error(Errc::ConfigInvalid, "field 'n_grid' must not be empty");
    if (!(alpha >= 0.0)) throw Error(Errc::ConfigInvalid, "field 'alpha' must be non-negative");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const std::size_t n = n_grid[i];
      if (!std::has_single_bit(n)) throw Error(Errc::ConfigInvalid, "field 'n_grid' entries must be powers of two");
      if (n < measure.r() + 2) throw Error(Errc::ConfigInvalid, "field 'n_grid' entries must be at least r + 2");
      if (i > 0 && n <= n_grid[i - 1]) throw Error(Errc::ConfigInvalid, "field 'n_grid' must be strictly ascending");
    }
  }
};

/// Measure fields as in a measure config, plus n_grid, trials, solver,
/// statistic and record_timing.
inline ScalingConfig parse_scaling_config(const nlohmann::json& j) {
  const auto mc = parse_measure_config(j, false);
  ScalingConfig c{mc.measure()};
  c.alpha = mc.noise.alpha;
  c.noise_kind = mc.noise.kind;
  c.base_seed = mc.noise.seed;
  const auto grid = detail::get_field<std::vector<long long>>(j, "n_grid");
  for (long long n : grid) {
    if (n < 1) throw Error(Errc::ConfigInvalid, "field 'n_grid' entries must be positive");
    c.n_grid.push_back(static_cast<std::size_t>(n));
  }
  const auto trials = detail::get_field<long long>(j, "trials");
  if (trials < 1) throw Error(Errc::ConfigInvalid, "field 'trials' must be at least 1");
  c.trials = static_cast<std::size_t>(trials);
  try {
    if (j.contains("solver")) c.solver = parse_solver(detail::get_field<std::string>(j, "solver"));
  } catch (const Error& e) {
    throw Error(Errc::ConfigInvalid, std::string("field 'solver': ") + e.what());
  }
  if (j.contains("statistic")) c.statistic = parse_statistic(detail::get_field<std::string>(j, "statistic"));
  if (j.contains("record_timing")) c.record_timing = detail::get_field<bool>(j, "record_timing");
  c.validate();
  return c;
}

struct ScalingRow {
  ScalingRow() = default;
  ScalingRow(std::size_t n, std::size_t trial) : n(n), trial(trial) {}
  ScalingRow(std::size_t n, std::size_t trial, double md_z, double md_mu, double wall_ms, bool failed)
      : n(n), trial(trial), md_z(md_z), md_mu(md_mu), wall_ms(wall_ms), failed(failed) {}

  std::size_t n = 0;
  std::size_t trial = 0;
  double md_z = std::numeric_limits<double>::quiet_NaN();
  double md_mu = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  bool failed = false;
  std::string failure;  // reason, empty on success
};

/// One (n, trial) cell of the sweep. Failures are recorded, not thrown.
inline ScalingRow run_scaling_trial(const ScalingConfig& cfg, std::size_t n, std::size_t trial) {
  ScalingRow row{n, trial};
  const std::uint64_t seed = derive_seed(cfg.base_seed, n, trial);
  const auto kind = cfg.alpha > 0.0 ? cfg.noise_kind : NoiseKind::none;
  const auto g = add_noise(synthesize(cfg.measure, n), sample_noise(n, {cfg.alpha, kind, seed}));
  try {
    const auto res = run_esprit(g, cfg.measure.r(), cfg.solver, splitmix64(seed));
    if (cfg.record_timing) row.wall_ms = res.wall_time.count();
    if (res.degenerate) {
      row.failed = true;
      row.failure = "degenerate shift-invariance eigenvalue";
      return row;
    }
    const auto truth_z = cfg.measure.dominant_nodes();
    const auto truth_mu = cfg.measure.dominant_intensities();
    const auto match = matching_distance(std::span<const cplx>(res.z_hat), std::span<const cplx>(truth_z));
    row.md_z = match.distance;
    // Intensities are scored under the pairing chosen for the locations.
    row.md_mu = paired_distance(res.mu_hat, truth_mu, match.perm);
  } catch (const Error& e) {
    row.failed = true;
    row.failure = e.what();
  }
  return row;
}

/// Runs every (n, trial) cell on `threads` workers (0 = hardware
/// concurrency). Rows come back ordered by (n, trial) regardless of the
/// schedule.
inline std::vector<ScalingRow> run_scaling(const ScalingConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  std::vector<ScalingRow> rows(cfg.n_grid.size() * cfg.trials);
  // Largest n first so the long tasks do not straggle at the end.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < order.size();) {
      const std::size_t idx = order[k];
      try {
        rows[idx] = run_scaling_trial(cfg, cfg.n_grid[idx / cfg.trials], idx % cfg.trials);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

enum class Metric { location, intensity };

struct PerNStat {
  std::size_t n = 0;
  double value = 0.0;  // chosen statistic over successful trials
  std::size_t successes = 0;
  std::size_t failures = 0;
};

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::vector<PerNStat> per_n;
  /// Every statistic is below 1e-8: the errors sit at rounding level and no
  /// slope is fitted.
  bool floor_reached = false;
};

inline constexpr double kFloorThreshold = 1e-8;

inline double summarize(std::vector<double> v, Statistic s) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == Statistic::mean) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Statistic of md per n, then ordinary least squares of log₂(stat) on log₂(n).
inline SlopeFit fit_slope(std::span<const ScalingRow> rows, Metric metric, Statistic statistic = Statistic::median) {
  std::vector<std::size_t> ns;
  for (const auto& r : rows) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  SlopeFit fit;
  for (std::size_t n : ns) {
    PerNStat p{n};
    std::vector<double> vals;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.failed) {
        ++p.failures;
        continue;
      }
      vals.push_back(metric == Metric::location ? r.md_z : r.md_mu);
    }
    p.successes = vals.size();
    p.value = summarize(std::move(vals), statistic);
    fit.per_n.push_back(p);
  }

  std::vector<double> xs, ys;
  bool all_floor = true;
  for (const auto& p : fit.per_n) {
    if (p.successes == 0) continue;
    all_floor = all_floor && p.value < kFloorThreshold;
    xs.push_back(std::log2(static_cast<double>(p.n)));
    ys.push_back(p.value > 0.0 ? std::log2(p.value) : -std::numeric_limits<double>::infinity());
  }
  if (xs.size() < 3) throw Error(Errc::InsufficientData, "slope fit needs at least 3 values of n with a successful trial");
  if (all_floor) {
    fit.floor_reached = true;
    return fit;
  }
  for (double y : ys)
    if (!std::isfinite(y)) throw Error(Errc::InsufficientData, "statistic is zero at some n; no log-log fit");

  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

inline double failure_rate(std::span<const ScalingRow> rows) {
  if (rows.empty()) return 0.0;
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.failed;
  return static_cast<double>(failed) / static_cast<double>(rows.size());
}

inline void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows) {
  os << "n,trial,md_z,md_mu,wall_ms,failed\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.trial << ',' << format_double(r.md_z) << ',' << format_double(r.md_mu) << ','
       << format_double(r.wall_ms) << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

/// {slope_z, slope_mu, per_n: [{n, median_md_z, median_md_mu}], failure_rate}.
/// Slopes are null when the error floor is reached; the fit uses the
/// configured statistic, the per-n table always reports medians.
inline nlohmann::json scaling_summary(std::span<const ScalingRow> rows, Statistic statistic) {
  const auto fz = fit_slope(rows, Metric::location, statistic);
  const auto fm = fit_slope(rows, Metric::intensity, statistic);
  const auto mz = fit_slope(rows, Metric::location, Statistic::median);
  const auto mm = fit_slope(rows, Metric::intensity, Statistic::median);
  auto number = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };

  nlohmann::json j;
  j["slope_z"] = number(fz.slope);
  j["slope_mu"] = number(fm.slope);
  j["per_n"] = nlohmann::json::array();
  for (std::size_t i = 0; i < mz.per_n.size(); ++i) {
    j["per_n"].push_back({{"n", mz.per_n[i].n},
                          {"median_md_z", number(mz.per_n[i].value)},
                          {"median_md_mu", number(mm.per_n[i].value)}});
  }
  j["failure_rate"] = failure_rate(rows);
  j["statistic"] = std::string(to_string(statistic));
  j["floor_reached_z"] = fz.floor_reached;
  j["floor_reached_mu"] = fm.floor_reached;
  return j;
}

}  // namespace specest
