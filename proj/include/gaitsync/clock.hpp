#pragma once

#include "gaitsync/time.hpp"

namespace gaitsync {

/// A free-running 32.768 kHz crystal with a constant frequency error.
///
/// The tick count is evaluated in closed form from elapsed true time:
///
///   ticks(t) = floor(32768 * (1 + ppm/1e6) * (t - epoch)) + tick_offset
///
/// so queries are O(1) and never accumulate rounding error. The ppm value is
/// held internally as an integer number of 1e-6 ppm, which keeps the rate an
/// exact rational.
class DriftingClock {
 public:
  DriftingClock(double ppm_error, Ticks tick_offset, TrueTime epoch, double ppm_max = kDefaultPpmMax);

  static constexpr std::int64_t nominal_freq_hz() { return kNominalHz; }
  double ppm_error() const { return ppm_error_; }
  Ticks tick_offset() const { return tick_offset_; }
  TrueTime epoch() const { return epoch_; }

  /// Local tick count at true time t. Throws HarnessError if t precedes the epoch.
  Ticks ticks_at(TrueTime t) const;

  /// Smallest true time (ns resolution) whose tick count is k.
  TrueTime true_time_of_tick(Ticks k) const;

  /// ticks_at(t) / 32768.
  double local_seconds_at(TrueTime t) const;

  void adjust_offset(Ticks delta) { tick_offset_ += delta; }

 private:
  double ppm_error_;
  std::int64_t rate_scale_;  // 1e12 * (1 + ppm/1e6)
  Ticks tick_offset_;
  TrueTime epoch_;
};

DriftingClock make_clock(double ppm_error, Ticks tick_offset, double epoch_true_s,
                         double ppm_max = kDefaultPpmMax);

/// a.ppm - b.ppm: microseconds per true second by which a's local time pulls ahead of b's.
double relative_drift_ppm(const DriftingClock& a, const DriftingClock& b);

}  // namespace gaitsync
