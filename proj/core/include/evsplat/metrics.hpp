#pragma once

#include "evsplat/image.hpp"

namespace evsplat {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(peak^2 / mse); identical images report the cap
double psnr(const Image& a, const Image& b, double peak = 1.0);

// Mean structural similarity with the canonical 11x11 Gaussian window
// (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.0), valid-region
// convolution, averaged over channels. Images must be at least 11x11.
double ssim(const Image& a, const Image& b);

}  // namespace evsplat
