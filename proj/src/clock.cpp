#include "semgate/clock.hpp"

#include <chrono>
#include <thread>

namespace semgate {

std::uint64_t SystemClock::wall_ms() const {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch())
          .count());
}

std::uint64_t SystemClock::steady_us() const {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<microseconds>(steady_clock::now().time_since_epoch())
          .count());
}

void SystemClock::sleep_for_ms(std::uint64_t ms) {
  std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

} // namespace semgate
