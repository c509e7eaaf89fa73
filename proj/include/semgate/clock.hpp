#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

namespace semgate {

/// Time source used by the store (TTL expiry) and the engine (latency
/// measurement). Injectable so tests and the benchmark harness can run on
/// virtual time; `sleep_for_ms` advances virtual time instead of blocking
/// on a manual clock.
class Clock {
public:
  virtual ~Clock() = default;

  /// Wall time, milliseconds since the Unix epoch.
  virtual std::uint64_t wall_ms() const = 0;

  /// Monotone time, microseconds since an arbitrary origin.
  virtual std::uint64_t steady_us() const = 0;

  virtual void sleep_for_ms(std::uint64_t ms) = 0;
};

/// Real wall/steady clocks; sleeps block the calling thread.
class SystemClock final : public Clock {
public:
  std::uint64_t wall_ms() const override;
  std::uint64_t steady_us() const override;
  void sleep_for_ms(std::uint64_t ms) override;
};

/// Deterministic clock for tests and replay runs. Starts at a fixed epoch;
/// both time bases move only through advance_ms / sleep_for_ms.
class ManualClock final : public Clock {
public:
  explicit ManualClock(std::uint64_t start_wall_ms = 1'700'000'000'000ULL)
      : wall_ms_(start_wall_ms), steady_us_(0) {}

  std::uint64_t wall_ms() const override { return wall_ms_.load(); }
  std::uint64_t steady_us() const override { return steady_us_.load(); }

  void advance_ms(std::uint64_t ms) {
    wall_ms_ += ms;
    steady_us_ += ms * 1000;
  }

  void sleep_for_ms(std::uint64_t ms) override { advance_ms(ms); }

private:
  std::atomic<std::uint64_t> wall_ms_;
  std::atomic<std::uint64_t> steady_us_;
};

using ClockPtr = std::shared_ptr<Clock>;

} // namespace semgate
