#include "pixsteg/edge_detect.hpp"

#include <algorithm>
#include <cmath>

#include "pixsteg/kernels.hpp"

namespace pixsteg {

EdgeMap::EdgeMap(int height, int width, std::vector<double> values, double max)
    : height_(height), width_(width), values_(std::move(values)), max_(max) {}

EdgeMap EdgeMap::normalized(int height, int width, std::vector<double> raw) {
  if (raw.size() != static_cast<std::size_t>(height) * width) {
    throw DataError("edge map size does not match dimensions");
  }
  double peak = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) throw NumericalError("edge map values must be finite and >= 0");
    peak = std::max(peak, v);
  }
  if (peak == 0.0) return zeros(height, width);
  for (double& v : raw) v /= peak;
  return EdgeMap(height, width, std::move(raw), 1.0);
}

EdgeMap EdgeMap::zeros(int height, int width) {
  return EdgeMap(height, width, std::vector<double>(static_cast<std::size_t>(height) * width, 0.0),
                 0.0);
}

Image EdgeMap::to_image() const {
  std::vector<std::uint8_t> px(values_.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = clamp_intensity(std::lround(values_[i] * 255.0));
  }
  return Image(height_, width_, std::move(px));
}

EdgeMap prewitt(const Image& image) {
  std::vector<double> magnitude(image.size());
  kernels::parallel::prewitt_magnitude(image.pixels(), image.height(), image.width(), magnitude);
  return EdgeMap::normalized(image.height(), image.width(), std::move(magnitude));
}

}  // namespace pixsteg
