#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pixsteg/image.hpp"

namespace testing {

inline pixsteg::Image random_image(int h, int w, std::mt19937_64& rng, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w);
  for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
  return pixsteg::Image(h, w, std::move(px));
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace testing
