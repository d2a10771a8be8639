#pragma once

#include <optional>
#include <vector>

#include "gaitsync/gait.hpp"
#include "gaitsync/simnet.hpp"

namespace gaitsync {

/// Inputs for one end-to-end run. Defaults are the synchronized-scheme pair.
struct RunParams {
  double ppm_m1 = -3.0;
  double ppm_m2 = 0.0;
  double ppm_root = 0.0;
  TrueTime duration = TrueTime::from_us(400'000'000);
  TrueTime resync_period = TrueTime::from_us(30'000'000);
  std::uint64_t seed = 1;
  GaitConfig gait;
  LinkModel link;
  double ppm_max = kDefaultPpmMax;

  /// Defaults matching the two reference runs: M1 at -5 ppm for open loop,
  /// -3 ppm otherwise, everything else nominal.
  static RunParams defaults_for(Scheme scheme);
};

struct ErrorTrace {
  Scheme scheme = Scheme::Synchronized;
  std::vector<ErrorSample> samples;
  std::vector<TrueTime> resync_marks;
  RunParams config;
};

struct ExperimentResult {
  ErrorTrace trace;
  double max_abs_error_us = 0.0;
  double fitted_slope_us_per_s = 0.0;
  std::optional<double> analytic_bound_us;
  std::optional<double> opposition_eta_s;
};

/// Three-node topology and link settings used by run_scheme.
SimConfig sim_config_for(Scheme scheme, const RunParams& params);

ExperimentResult run_scheme(Scheme scheme, const RunParams& params);

/// Least-squares slope of error against time. Synchronized traces are fitted
/// separately inside each resync window and the window slopes averaged.
double fit_drift_slope(const ErrorTrace& trace);

/// Ordinary least-squares slope of (x, y).
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Seconds until a drift of `slope_us_per_s` reaches half a gait period.
std::optional<double> time_to_opposition(double slope_us_per_s, double period_s);

/// Drift accumulated over one resync period plus the one-tick residual floor.
double analytic_bound_us(double relative_ppm, double resync_period_s);

struct SweepRow {
  double resync_period_s = 0.0;
  double max_abs_error_us = 0.0;
  double analytic_bound_us = 0.0;
};

/// One synchronized-scheme run per period, run concurrently, sorted by period.
std::vector<SweepRow> sweep_resync_period(const std::vector<double>& periods_s, const RunParams& params);

}  // namespace gaitsync
