#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pixsteg/image.hpp"
#include "pixsteg/logistic.hpp"

namespace pixsteg {

// Output head of the analyzer: per pixel an edge logit and, for each of the
// M mixture components, a weight logit, a mean in pixel units and a log-scale.
// Component arrays are pixel-major: [pixel * components + m].
struct HeadActivations {
  int height = 0;
  int width = 0;
  int components = 0;
  std::vector<double> edge_logit;
  std::vector<double> mix_logit;
  std::vector<double> mean;
  std::vector<double> log_scale;

  static HeadActivations zeros(int height, int width, int components);

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  // Throws DataError on inconsistent sizes and NumericalError on non-finite values.
  void validate() const;
};

// I x J x 256 categorical distribution, one row of 256 probabilities per pixel.
class PixelDistribution {
 public:
  PixelDistribution(int height, int width, std::vector<double> probs);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  std::span<const double> at(std::size_t pixel) const {
    return std::span<const double>(probs_).subspan(pixel * kPixelLevels, kPixelLevels);
  }
  const std::vector<double>& probs() const { return probs_; }

  friend bool operator==(const PixelDistribution&, const PixelDistribution&) = default;

 private:
  int height_;
  int width_;
  std::vector<double> probs_;
};

PixelDistribution to_pixel_distribution(const HeadActivations& head);

// log P(x_ij) per pixel under the head's mixture, with P floored at 1e-12.
std::vector<double> pixel_log_prob(const HeadActivations& head, const Image& image);

// Log-probability of level k under one pixel's mixture. When the gradient
// pointers are non-null they receive d/d(logit, mean, log_scale) per component.
double mixture_log_prob(int components, const double* logits, const double* means,
                        const double* log_scales, int k, double* d_logits = nullptr,
                        double* d_means = nullptr, double* d_log_scales = nullptr);

// Distribution dump: "PXSTDIST" magic, u32 version (1), u32 height, u32 width,
// u32 levels (256), then height*width*256 little-endian f64 in row-major
// pixel order.
void save_distribution(const PixelDistribution& dist, const std::filesystem::path& path);
PixelDistribution load_distribution(const std::filesystem::path& path);

}  // namespace pixsteg
