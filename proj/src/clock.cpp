#include "gaitsync/clock.hpp"

#include <cmath>
#include <sstream>

namespace gaitsync {

namespace {

using i128 = __int128;

constexpr std::int64_t kRateUnit = 1'000'000'000'000;  // 1e12
constexpr i128 kNsPerSecond = 1'000'000'000;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

}  // namespace

DriftingClock::DriftingClock(double ppm_error, Ticks tick_offset, TrueTime epoch, double ppm_max)
    : ppm_error_(ppm_error), rate_scale_(0), tick_offset_(tick_offset), epoch_(epoch) {
  if (!std::isfinite(ppm_error) || std::fabs(ppm_error) > ppm_max) {
    std::ostringstream os;
    os << "ppm error " << ppm_error << " outside +/-" << ppm_max;
    throw ConfigError(os.str());
  }
  rate_scale_ = kRateUnit + std::llround(ppm_error * 1e6);
  if (rate_scale_ <= 0) throw ConfigError("effective clock frequency must be positive");
}

Ticks DriftingClock::ticks_at(TrueTime t) const {
  if (t < epoch_) throw HarnessError("clock queried before its epoch");
  const i128 elapsed = t.ns() - epoch_.ns();
  const i128 num = elapsed * kNominalHz * rate_scale_;
  return static_cast<Ticks>(num / (kNsPerSecond * kRateUnit)) + tick_offset_;
}

TrueTime DriftingClock::true_time_of_tick(Ticks k) const {
  const i128 n = static_cast<i128>(k) - tick_offset_;
  if (n < 0) throw HarnessError("tick precedes the clock epoch");
  const i128 elapsed = ceil_div(n * kNsPerSecond * kRateUnit, static_cast<i128>(kNominalHz) * rate_scale_);
  return epoch_ + TrueTime::from_ns(static_cast<std::int64_t>(elapsed));
}

double DriftingClock::local_seconds_at(TrueTime t) const {
  return static_cast<double>(ticks_at(t)) / static_cast<double>(kNominalHz);
}

DriftingClock make_clock(double ppm_error, Ticks tick_offset, double epoch_true_s, double ppm_max) {
  return DriftingClock(ppm_error, tick_offset, TrueTime::from_seconds(epoch_true_s), ppm_max);
}

double relative_drift_ppm(const DriftingClock& a, const DriftingClock& b) { return a.ppm_error() - b.ppm_error(); }

}  // namespace gaitsync
