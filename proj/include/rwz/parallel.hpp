#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rwz::par {

/// Which implementation of a kernel to run. Both produce identical bytes;
/// the serial one is the reference the parallel one is tested against.
enum class Exec { Serial, Parallel };

/// Current worker cap. Initialized once from the RWZC_THREADS environment
/// variable if set, else from the hardware thread count. Always >= 1.
int max_threads();

/// Overrides the worker cap for this process (values < 1 clamp to 1).
void set_max_threads(int n);

int hardware_threads();

/// Runs fn(i) for every i in [0, n). Iterations must be independent and
/// write disjoint locations; under that contract the result does not
/// depend on the schedule or the thread count.
template <class F>
void for_index(Exec ex, std::ptrdiff_t n, F&& fn) {
#ifdef _OPENMP
  if (ex == Exec::Parallel && max_threads() > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  (void)ex;
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

template <class F>
void for_index(std::ptrdiff_t n, F&& fn) {
  for_index(Exec::Parallel, n, static_cast<F&&>(fn));
}

/// Sum of term(i) over [0, n) with a fixed reduction tree: partial sums over
/// fixed-size chunks are combined serially in index order, so the result is
/// bit-identical for any thread count.
template <class F>
double chunked_sum(Exec ex, std::ptrdiff_t n, F&& term,
                   std::ptrdiff_t chunk = 4096) {
  if (n <= 0) return 0.0;
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  for_index(ex, nchunks, [&](std::ptrdiff_t c) {
    const std::ptrdiff_t lo = c * chunk;
    const std::ptrdiff_t hi = lo + chunk < n ? lo + chunk : n;
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class F>
double chunked_sum(std::ptrdiff_t n, F&& term, std::ptrdiff_t chunk = 4096) {
  return chunked_sum(Exec::Parallel, n, static_cast<F&&>(term), chunk);
}

}  // namespace rwz::par
