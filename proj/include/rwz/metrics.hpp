#pragma once

#include "rwz/image.hpp"

namespace rwz::harness {

/// Peak signal-to-noise ratio in dB with peak 1.0. Identical images give
/// +infinity; report writers cap that at kPsnrCap.
double psnr(const Image& a, const Image& b);

inline constexpr double kPsnrCap = 99.0;

/// Caps +infinity (and anything larger) at kPsnrCap for tabular output.
double psnr_capped(const Image& a, const Image& b);

/// Multi-scale structural similarity on gray intensity: up to 5 dyadic
/// scales with the standard weights, 11x11 Gaussian window (sigma 1.5),
/// stabilizers C1 = 0.01^2 and C2 = 0.03^2 on the [0,1] range. Images
/// smaller than 176 px use fewer scales with renormalized weights;
/// scales_used reports how many were evaluated.
double ms_ssim(const Image& a, const Image& b, int* scales_used = nullptr);

}  // namespace rwz::harness
