#include "pixsteg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace pixsteg {

const char* to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kGaussian:
      return "gaussian";
    case BaselineMethod::kMedian:
      return "median";
    case BaselineMethod::kWiener:
      return "wiener";
  }
  return "?";
}

BaselineMethod baseline_from_string(const std::string& name) {
  if (name == "gaussian") return BaselineMethod::kGaussian;
  if (name == "median") return BaselineMethod::kMedian;
  if (name == "wiener") return BaselineMethod::kWiener;
  throw DataError("unknown baseline '" + name + "' (expected gaussian, median or wiener)");
}

namespace {

void check_window(int window) {
  if (window < 3 || window % 2 == 0) {
    throw DataError("filter window must be an odd integer >= 3, got " + std::to_string(window));
  }
}

// Visits the window around (r, c) with replicate padding.
template <typename F>
void for_window(const Image& img, int r, int c, int half, F&& f) {
  for (int dr = -half; dr <= half; ++dr) {
    const int rr = std::clamp(r + dr, 0, img.height() - 1);
    for (int dc = -half; dc <= half; ++dc) {
      f(img.at(rr, std::clamp(c + dc, 0, img.width() - 1)));
    }
  }
}

}  // namespace

void BaselineConfig::validate() const {
  if (epsilon < 0) throw DataError("baseline epsilon must be >= 0");
  if (method != BaselineMethod::kGaussian) check_window(window);
}

Image gaussian_noise(const Image& image, int epsilon, std::uint64_t seed) {
  if (epsilon < 0) throw DataError("gaussian noise epsilon must be >= 0");
  if (epsilon == 0) return image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, static_cast<double>(epsilon));
  std::vector<std::uint8_t> out(image.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = clamp_intensity(static_cast<long>(image[i]) + std::lround(noise(rng)));
  }
  return Image(image.height(), image.width(), std::move(out));
}

Image median_filter(const Image& image, int window) {
  check_window(window);
  const int half = window / 2;
  std::vector<std::uint8_t> out(image.size());
  std::vector<std::uint8_t> values;
  values.reserve(static_cast<std::size_t>(window) * window);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      values.clear();
      for_window(image, r, c, half, [&](std::uint8_t v) { values.push_back(v); });
      auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
      std::nth_element(values.begin(), mid, values.end());
      out[static_cast<std::size_t>(r) * image.width() + c] = *mid;
    }
  }
  return Image(image.height(), image.width(), std::move(out));
}

Image wiener_restore(const Image& image, int window) {
  check_window(window);
  const int half = window / 2;
  const double n = static_cast<double>(window) * window;
  std::vector<double> mean(image.size());
  std::vector<double> var(image.size());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double sum = 0.0;
      double sq = 0.0;
      for_window(image, r, c, half, [&](std::uint8_t v) {
        sum += v;
        sq += static_cast<double>(v) * v;
      });
      const std::size_t p = static_cast<std::size_t>(r) * image.width() + c;
      mean[p] = sum / n;
      var[p] = std::max(sq / n - mean[p] * mean[p], 0.0);
    }
  }
  double noise = 0.0;
  for (double v : var) noise += v;
  noise /= static_cast<double>(var.size());

  std::vector<std::uint8_t> out(image.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double denom = std::max(var[p], noise);
    const double gain = denom > 0.0 ? std::max(var[p] - noise, 0.0) / denom : 0.0;
    const double value = mean[p] + gain * (static_cast<double>(image[p]) - mean[p]);
    out[p] = clamp_intensity(std::lround(value));
  }
  return Image(image.height(), image.width(), std::move(out));
}

Image apply_baseline(const Image& image, const BaselineConfig& cfg) {
  cfg.validate();
  switch (cfg.method) {
    case BaselineMethod::kGaussian:
      return gaussian_noise(image, cfg.epsilon, cfg.seed);
    case BaselineMethod::kMedian:
      return median_filter(image, cfg.window);
    case BaselineMethod::kWiener:
      return wiener_restore(image, cfg.window);
  }
  return image;
}

}  // namespace pixsteg
