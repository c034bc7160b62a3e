#include "pixsteg/stego_lsb.hpp"

#include <string>

namespace pixsteg {

void LsbConfig::validate() const {
  if (bits < 1 || bits > 8) {
    throw DataError("LSB bit-plane count must be in [1, 8], got " + std::to_string(bits));
  }
}

Image embed(const Image& cover, const Image& secret, const LsbConfig& cfg) {
  cfg.validate();
  require_same_shape(cover, secret, "embed");
  const unsigned mask = cfg.low_mask();
  const unsigned shift = 8u - static_cast<unsigned>(cfg.bits);
  std::vector<std::uint8_t> out(cover.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((cover[i] & ~mask & 0xFFu) | (secret[i] >> shift));
  }
  return Image(cover.height(), cover.width(), std::move(out));
}

Image extract(const Image& stego, const LsbConfig& cfg) {
  cfg.validate();
  const unsigned mask = cfg.low_mask();
  const unsigned shift = 8u - static_cast<unsigned>(cfg.bits);
  std::vector<std::uint8_t> out(stego.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(((stego[i] & mask) << shift) & 0xFFu);
  }
  return Image(stego.height(), stego.width(), std::move(out));
}

Image quantize_to_top_bits(const Image& secret, const LsbConfig& cfg) {
  cfg.validate();
  const unsigned shift = 8u - static_cast<unsigned>(cfg.bits);
  std::vector<std::uint8_t> out(secret.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(((secret[i] >> shift) << shift) & 0xFFu);
  }
  return Image(secret.height(), secret.width(), std::move(out));
}

}  // namespace pixsteg
