#pragma once

#include <vector>

#include "pixsteg/image.hpp"

namespace pixsteg {

// Per-pixel edge intensity in [0, 1], normalized so the strongest edge is 1
// (or all zero for a flat map).
class EdgeMap {
 public:
  // Divides `raw` (non-negative, finite) by its maximum.
  static EdgeMap normalized(int height, int width, std::vector<double> raw);
  static EdgeMap zeros(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  double operator[](std::size_t index) const { return values_[index]; }
  const std::vector<double>& values() const { return values_; }
  double max() const { return max_; }

  // 8-bit rendering (value * 255, rounded) for inspection.
  Image to_image() const;

 private:
  EdgeMap(int height, int width, std::vector<double> values, double max);

  int height_;
  int width_;
  std::vector<double> values_;
  double max_;
};

// Prewitt magnitude sqrt(gx^2 + gy^2), replicate-padded, max-normalized.
EdgeMap prewitt(const Image& image);

}  // namespace pixsteg
