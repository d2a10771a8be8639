#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gaitsync {

/// Raised when a configuration value is out of range or a topology is malformed.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a caller violates a precondition that only a harness bug can produce
/// (querying a clock before its epoch, resyncing the root, ...).
class HarnessError : public std::logic_error {
 public:
  explicit HarnessError(const std::string& what) : std::logic_error(what) {}
};

/// Simulation (true) time, or a span of it, in integer nanoseconds.
///
/// Nanosecond integers keep one tick (~30.5 us) exactly resolvable over 1e6 s
/// and make event ordering free of floating-point ties.
class TrueTime {
 public:
  constexpr TrueTime() = default;

  static constexpr TrueTime from_ns(std::int64_t ns) { return TrueTime(ns); }
  static constexpr TrueTime from_us(std::int64_t us) { return TrueTime(us * 1000); }
  static TrueTime from_seconds(double s) { return TrueTime(std::llround(s * 1e9)); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }
  constexpr double micros() const { return static_cast<double>(ns_) / 1e3; }

  constexpr auto operator<=>(const TrueTime&) const = default;

  constexpr TrueTime operator+(TrueTime o) const { return TrueTime(ns_ + o.ns_); }
  constexpr TrueTime operator-(TrueTime o) const { return TrueTime(ns_ - o.ns_); }
  constexpr TrueTime& operator+=(TrueTime o) {
    ns_ += o.ns_;
    return *this;
  }

 private:
  constexpr explicit TrueTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

using Ticks = std::int64_t;
using NodeId = std::uint32_t;

constexpr std::int64_t kNominalHz = 32768;
constexpr double kTickUs = 1e6 / static_cast<double>(kNominalHz);  // 30.517578125

// One 15 ms slot is 491.52 ticks = 12288/25.
constexpr std::int64_t kSlotTicksNum = 12288;
constexpr std::int64_t kSlotTicksDen = 25;
constexpr TrueTime kSlotLength = TrueTime::from_us(15000);

constexpr double kDefaultPpmMax = 10.0;

}  // namespace gaitsync
