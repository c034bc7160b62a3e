#include "pixsteg/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

namespace pixsteg {

namespace {

// Normalized mean absolute difference; the shared core of both rates.
double mean_normalized_abs_diff(const Image& a, const Image& b, const char* what) {
  require_same_shape(a, b, what);
  long total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(static_cast<int>(a[i]) - b[i]);
  return static_cast<double>(total) / (static_cast<double>(kMaxIntensity) * static_cast<double>(a.size()));
}

std::array<double, kSsimWindow> gaussian_taps() {
  constexpr double kSigma = 1.5;
  std::array<double, kSsimWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    taps[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sq += d * d;
  }
  if (sq == 0.0) return kPsnrCap;
  const double mse = sq / static_cast<double>(a.size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw DataError("ssim: image smaller than the 11x11 window");
  }
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  static const auto taps = gaussian_taps();
  const int rows = a.height() - kSsimWindow + 1;
  const int cols = a.width() - kSsimWindow + 1;
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
          const double w = taps[i] * taps[j];
          const double va = a.at(r + i, c + j);
          const double vb = b.at(r + i, c + j);
          ma += w * va;
          mb += w * vb;
          saa += w * (va * va);
          sbb += w * (vb * vb);
          sab += w * (va * vb);
        }
      }
      const double var_a = saa - ma * ma;
      const double var_b = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
    }
  }
  return total / (static_cast<double>(rows) * cols);
}

double decoded_rate(const Image& secret, const Image& decoded) {
  return 1.0 - mean_normalized_abs_diff(secret, decoded, "decoded_rate");
}

double destruction_rate(const Image& decoded_original, const Image& decoded_after) {
  // Routed through the decoded rate so 1 - DC reproduces DT bit for bit.
  return 1.0 - (1.0 - mean_normalized_abs_diff(decoded_original, decoded_after, "destruction_rate"));
}

}  // namespace pixsteg
