#include "gaitsync/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace gaitsync {

RunParams RunParams::defaults_for(Scheme scheme) {
  RunParams p;
  p.ppm_m1 = scheme == Scheme::OpenLoop ? -5.0 : -3.0;
  return p;
}

SimConfig sim_config_for(Scheme scheme, const RunParams& params) {
  SimConfig config = SimConfig::three_node(params.ppm_root, params.ppm_m1, params.ppm_m2);
  config.scheme = scheme;
  config.gait = params.gait;
  config.link = params.link;
  config.keepalive_period = params.resync_period;
  config.ppm_max = params.ppm_max;
  return config;
}

ExperimentResult run_scheme(Scheme scheme, const RunParams& params) {
  params.gait.validate();
  const double period_s = scheme == Scheme::Synchronized
                              ? params.gait.period_slots * kSlotLength.seconds()
                              : params.gait.period.seconds();
  if (params.duration.seconds() < period_s) throw ConfigError("duration shorter than one gait period");

  Sim sim(sim_config_for(scheme, params), params.seed);
  sim.inject_command(Verb::Start, TrueTime{});
  sim.run_until(params.duration);

  ExperimentResult r;
  r.trace.scheme = scheme;
  r.trace.samples = sim.samples();
  r.trace.config = params;
  if (scheme == Scheme::Synchronized) r.trace.resync_marks = sim.resync_marks();

  for (const auto& s : r.trace.samples) r.max_abs_error_us = std::max(r.max_abs_error_us, std::fabs(s.error_us));
  r.fitted_slope_us_per_s = r.trace.samples.size() >= 2 ? fit_drift_slope(r.trace) : 0.0;

  if (scheme == Scheme::Synchronized) {
    const double spread = std::fabs(params.ppm_m1 - params.ppm_root) + std::fabs(params.ppm_m2 - params.ppm_root);
    r.analytic_bound_us = analytic_bound_us(spread, params.resync_period.seconds());
  } else if (scheme == Scheme::OpenLoop) {
    r.opposition_eta_s = time_to_opposition(r.fitted_slope_us_per_s, period_s);
  }
  return r;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("slope fit needs samples at distinct times");
  return sxy / sxx;
}

double fit_drift_slope(const ErrorTrace& trace) {
  const auto& s = trace.samples;
  if (s.size() < 2) throw ConfigError("slope fit needs at least two samples");

  if (trace.resync_marks.empty()) {
    std::vector<double> x, y;
    for (const auto& e : s) {
      x.push_back(e.true_time.seconds());
      y.push_back(e.error_us);
    }
    return least_squares_slope(x, y);
  }

  std::vector<TrueTime> marks = trace.resync_marks;
  std::sort(marks.begin(), marks.end());

  // Group samples by the number of resyncs preceding them; a sample whose two
  // period starts straddle a resync belongs to neither window.
  std::vector<double> slopes;
  std::vector<double> x, y;
  std::size_t current_window = SIZE_MAX;
  auto flush = [&] {
    if (x.size() >= 2) slopes.push_back(least_squares_slope(x, y));
    x.clear();
    y.clear();
  };
  for (const auto& e : s) {
    const TrueTime earlier = e.true_time - TrueTime::from_ns(std::llround(std::fabs(e.error_us) * 1000.0));
    const auto lo = std::upper_bound(marks.begin(), marks.end(), earlier);
    const auto hi = std::upper_bound(marks.begin(), marks.end(), e.true_time);
    if (lo != hi) continue;
    const auto window = static_cast<std::size_t>(hi - marks.begin());
    if (window != current_window) {
      flush();
      current_window = window;
    }
    x.push_back(e.true_time.seconds());
    y.push_back(e.error_us);
  }
  flush();
  if (slopes.empty()) throw ConfigError("no resync window holds two samples");
  double sum = 0;
  for (double v : slopes) sum += v;
  return sum / static_cast<double>(slopes.size());
}

std::optional<double> time_to_opposition(double slope_us_per_s, double period_s) {
  if (!(period_s > 0.0)) throw ConfigError("gait period must be positive");
  if (slope_us_per_s == 0.0) return std::nullopt;
  return (period_s / 2.0 * 1e6) / std::fabs(slope_us_per_s);
}

double analytic_bound_us(double relative_ppm, double resync_period_s) {
  if (relative_ppm < 0.0 || resync_period_s < 0.0) throw ConfigError("bound inputs must be non-negative");
  return relative_ppm * resync_period_s + kTickUs;
}

std::vector<SweepRow> sweep_resync_period(const std::vector<double>& periods_s, const RunParams& params) {
  if (periods_s.empty()) throw ConfigError("sweep needs at least one resync period");
  std::vector<std::future<SweepRow>> jobs;
  for (double p : periods_s) {
    if (!(p > 0.0)) throw ConfigError("resync periods must be positive");
    jobs.push_back(std::async(std::launch::async, [p, params] {
      RunParams run = params;
      run.resync_period = TrueTime::from_seconds(p);
      const ExperimentResult r = run_scheme(Scheme::Synchronized, run);
      return SweepRow{p, r.max_abs_error_us, *r.analytic_bound_us};
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  std::sort(rows.begin(), rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.resync_period_s < b.resync_period_s; });
  return rows;
}

}  // namespace gaitsync
