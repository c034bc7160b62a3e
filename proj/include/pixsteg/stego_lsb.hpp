#pragma once

#include "pixsteg/image.hpp"

namespace pixsteg {

// Number of low-order cover bit planes that carry the secret.
struct LsbConfig {
  int bits = 4;

  void validate() const;
  std::uint8_t low_mask() const { return static_cast<std::uint8_t>((1u << bits) - 1u); }
};

// Stores the top `bits` bits of each secret pixel in the low bits of the
// matching cover pixel.
Image embed(const Image& cover, const Image& secret, const LsbConfig& cfg);

// Moves the low `bits` bits of each stego pixel back to the top; the
// remaining low bits are zero.
Image extract(const Image& stego, const LsbConfig& cfg);

// What a lossless embed/extract round trip returns for `secret`.
Image quantize_to_top_bits(const Image& secret, const LsbConfig& cfg);

}  // namespace pixsteg
