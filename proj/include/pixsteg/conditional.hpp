#pragma once

#include <cstdint>
#include <span>

namespace pixsteg {

// Source of autoregressive per-pixel conditionals p(x_i | x_1..x_{i-1}).
// Consumed by the exact eraser, which re-queries it after every replacement.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  // Writes the 256-bin conditional at raster `index` for the image currently
  // holding `pixels` (row-major, `height` x `width`).
  virtual void conditional(std::span<const std::uint8_t> pixels, int height, int width,
                           std::size_t index, std::span<double> probs) = 0;
};

}  // namespace pixsteg
