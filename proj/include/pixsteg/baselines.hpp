#pragma once

#include <cstdint>
#include <string>

#include "pixsteg/image.hpp"

namespace pixsteg {

enum class BaselineMethod { kGaussian, kMedian, kWiener };

const char* to_string(BaselineMethod method);
BaselineMethod baseline_from_string(const std::string& name);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kGaussian;
  int epsilon = 0;  // gaussian: noise sigma
  int window = 3;   // median / wiener: odd side length
  std::uint64_t seed = 0;

  void validate() const;
};

// Adds round(N(0, epsilon^2)) per pixel in raster order and clamps.
Image gaussian_noise(const Image& image, int epsilon, std::uint64_t seed);

// Window median with replicate padding.
Image median_filter(const Image& image, int window);

// Local-statistics Wiener filter: m + max(v - vn, 0) / max(v, vn) * (x - m),
// with vn the mean of all local variances. Replicate padding.
Image wiener_restore(const Image& image, int window);

Image apply_baseline(const Image& image, const BaselineConfig& cfg);

}  // namespace pixsteg
