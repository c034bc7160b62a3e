#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pixsteg/errors.hpp"

namespace pixsteg {

inline constexpr int kMinImageSide = 3;
inline constexpr int kMaxIntensity = 255;

// 8-bit grayscale raster, row-major with a top-left origin. Immutable once
// built; every transformation in the library returns a new Image.
class Image {
 public:
  Image(int height, int width, std::vector<std::uint8_t> pixels);

  static Image filled(int height, int width, std::uint8_t value);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }

  std::uint8_t at(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::uint8_t operator[](std::size_t index) const { return pixels_[index]; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> pixels_;
};

// Throws DataError unless both images have identical dimensions.
void require_same_shape(const Image& a, const Image& b, const char* what);

std::uint8_t clamp_intensity(long value);

class ImageIoError : public DataError {
 public:
  enum class Kind { kMissingFile, kMalformedHeader, kUnsupportedBitDepth, kTruncated, kIo };

  ImageIoError(Kind kind, const std::string& message) : DataError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binary PGM (P5, maxval 255). Header comments are accepted on read.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

Image decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const Image& image);

}  // namespace pixsteg
