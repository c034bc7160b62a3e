#pragma once

#include "pixsteg/image.hpp"

namespace pixsteg {

inline constexpr double kPsnrCap = 100.0;
inline constexpr int kSsimWindow = 11;

// 10 log10(255^2 / MSE), capped at 100 dB (identical images report the cap).
double psnr(const Image& a, const Image& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1 = (0.01 * 255)^2,
// C2 = (0.03 * 255)^2, averaged over every fully contained window position.
double ssim(const Image& a, const Image& b);

// 1 - mean |H - D| on [0, 1] intensities.
double decoded_rate(const Image& secret, const Image& decoded);

// mean |D_o - D_d| on [0, 1] intensities. Needs no access to the original
// secret, only the two decoded images.
double destruction_rate(const Image& decoded_original, const Image& decoded_after);

struct MetricReport {
  double psnr;
  double ssim;
  double decoded_rate;
  double destruction_rate;
};

}  // namespace pixsteg
