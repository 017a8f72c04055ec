#include "rwz/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace rwz::par {

namespace {

int initial_cap() {
  if (const char* env = std::getenv("RWZC_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
      // Malformed value: fall through to the hardware default.
    }
  }
  return hardware_threads();
}

std::atomic<int>& cap() {
  static std::atomic<int> value{initial_cap()};
  return value;
}

}  // namespace

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int max_threads() { return cap().load(std::memory_order_relaxed); }

void set_max_threads(int n) {
  cap().store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

}  // namespace rwz::par
