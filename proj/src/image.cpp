#include "pixsteg/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace pixsteg {

Image::Image(int height, int width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < kMinImageSide || width < kMinImageSide) {
    throw DataError("image must be at least 3x3, got " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  if (pixels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw DataError("pixel count does not match image dimensions");
  }
}

Image Image::filled(int height, int width, std::uint8_t value) {
  return Image(height, width,
               std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, value));
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.height() << "x" << a.width() << " vs "
        << b.height() << "x" << b.width() << ")";
    throw DataError(msg.str());
  }
}

std::uint8_t clamp_intensity(long value) {
  return static_cast<std::uint8_t>(std::clamp<long>(value, 0, kMaxIntensity));
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::optional<long> next_integer() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) return std::nullopt;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) return std::nullopt;
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  bool consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) return false;
    ++pos_;
    return true;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  using Kind = ImageIoError::Kind;
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ImageIoError(Kind::kMalformedHeader, "malformed header: not a binary PGM (P5)");
  }
  HeaderReader reader(bytes);
  const auto width = reader.next_integer();
  const auto height = reader.next_integer();
  const auto maxval = reader.next_integer();
  if (!width || !height || !maxval || !reader.consume_single_space()) {
    throw ImageIoError(Kind::kMalformedHeader, "malformed header: expected width height maxval");
  }
  if (*maxval != kMaxIntensity) {
    throw ImageIoError(Kind::kUnsupportedBitDepth,
                       "unsupported bit depth: maxval " + std::to_string(*maxval));
  }
  if (*width < kMinImageSide || *height < kMinImageSide) {
    throw ImageIoError(Kind::kMalformedHeader, "malformed header: image smaller than 3x3");
  }
  const std::size_t count = static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
  const std::size_t start = reader.position();
  if (bytes.size() - start < count) {
    throw ImageIoError(Kind::kTruncated, "truncated payload: expected " + std::to_string(count) +
                                             " bytes, found " + std::to_string(bytes.size() - start));
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(start + count));
  return Image(static_cast<int>(*height), static_cast<int>(*width), std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const Image& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ImageIoError(ImageIoError::Kind::kMissingFile, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const ImageIoError& e) {
    throw ImageIoError(e.kind(), path.string() + ": " + e.what());
  }
}

void save_image(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ImageIoError(ImageIoError::Kind::kIo, "cannot write " + path.string());
  }
  const auto bytes = encode_pgm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ImageIoError(ImageIoError::Kind::kIo, "write failed for " + path.string());
  }
}

}  // namespace pixsteg
