// Times the OpenMP kernels against their serial reference implementations
// and prints one table row per kernel with the speedup.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rwz/channel.hpp"
#include "rwz/codec.hpp"
#include "rwz/features.hpp"
#include "rwz/geometry.hpp"
#include "rwz/parallel.hpp"
#include "rwz/reconstruct.hpp"
#include "rwz/rng.hpp"
#include "rwz/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int reps) {
  fn();  // warm-up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-18s %10.2f %10.2f %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
  using namespace rwz;
  std::printf("threads: %d (RWZC_THREADS caps this)\n", par::max_threads());
  std::printf("%-18s %10s %10s %9s\n", "kernel", "serial ms", "par ms",
              "speedup");

  const Image base = harness::textured_base(768, 768, 7);
  std::array<double, 9> rot{0.9998, -0.0175, 8.0, 0.0175, 0.9998, -5.0,
                            1e-5, -1e-5, 1.0};
  const geometry::Homography h(rot);

  row("warp_image",
      time_ms([&] { geometry::warp_image(base, h, 768, 768,
                                         par::Exec::Serial); }, 3),
      time_ms([&] { geometry::warp_image(base, h, 768, 768,
                                         par::Exec::Parallel); }, 3));

  {
    std::vector<std::vector<double>> blocks(4096,
                                            std::vector<double>(64, 0.0));
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int i = 0; i < 64; ++i)
        blocks[b][i] = rng::uniform01(11, b * 64 + i);
    row("forward_blocks",
        time_ms([&] { codec::forward_blocks(blocks, par::Exec::Serial); }, 5),
        time_ms([&] { codec::forward_blocks(blocks, par::Exec::Parallel); },
                5));
  }

  {
    channel::Codeword z;
    z.symbols.resize(1 << 18);
    for (std::size_t i = 0; i < z.symbols.size(); ++i)
      z.symbols[i] = {rng::uniform01(13, 2 * i) - 0.5,
                      rng::uniform01(13, 2 * i + 1) - 0.5};
    const channel::ChannelConfig cc{3.0, 1.0, 99};
    row("transmit",
        time_ms([&] { channel::transmit(z, cc, par::Exec::Serial); }, 5),
        time_ms([&] { channel::transmit(z, cc, par::Exec::Parallel); }, 5));
  }

  {
    const Image guide = harness::textured_base(384, 384, 21);
    Image seeded(384, 384, 3, 0.5);
    Mask region(384, 384, false);
    for (int y = 100; y < 284; ++y)
      for (int x = 100; x < 284; ++x) region.set(y, x, true);
    row("poisson_correct",
        time_ms([&] { reconstruct::poisson_correct(seeded, region, guide, 50,
                                                   par::Exec::Serial); }, 3),
        time_ms([&] { reconstruct::poisson_correct(seeded, region, guide, 50,
                                                   par::Exec::Parallel); },
                3));
  }

  {
    const Image img = harness::textured_base(512, 512, 31);
    const auto kps = features::detect_keypoints(img, 500);
    const auto dr = features::describe(img, kps);
    const int saved = par::max_threads();
    par::set_max_threads(1);
    const double serial_ms = time_ms(
        [&] { features::match_indices(dr.descriptors, dr.descriptors); }, 5);
    par::set_max_threads(saved);
    const double par_ms = time_ms(
        [&] { features::match_indices(dr.descriptors, dr.descriptors); }, 5);
    row("match_indices", serial_ms, par_ms);
  }
  return 0;
}
