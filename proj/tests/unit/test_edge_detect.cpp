#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pixsteg/edge_detect.hpp"
#include "pixsteg/kernels.hpp"

using namespace pixsteg;

namespace {

// Direct 3x3 correlation with clamped coordinates.
std::vector<double> brute_prewitt(const Image& img) {
  const int h = img.height(), w = img.width();
  std::vector<double> raw(img.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double gx = 0, gy = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = img.at(std::clamp(r + dy, 0, h - 1), std::clamp(c + dx, 0, w - 1));
          gx += dx * v;
          gy += dy * v;
        }
      }
      raw[static_cast<std::size_t>(r) * w + c] = std::sqrt(gx * gx + gy * gy);
    }
  }
  const double mx = *std::max_element(raw.begin(), raw.end());
  if (mx > 0) {
    for (auto& v : raw) v /= mx;
  }
  return raw;
}

}  // namespace

TEST_CASE("constant image gives zeros") {
  const EdgeMap e = prewitt(Image::filled(5, 4, 77));
  CHECK(e.max() == 0.0);
  for (double v : e.values()) CHECK(v == 0.0);
}

TEST_CASE("vertical step") {
  std::vector<std::uint8_t> px(36);
  for (int r = 0; r < 6; ++r) {
    for (int c = 3; c < 6; ++c) px[r * 6 + c] = 255;
  }
  const EdgeMap e = prewitt(Image(6, 6, px));
  for (int r = 0; r < 6; ++r) {
    CHECK(e.at(r, 2) == 1.0);
    CHECK(e.at(r, 3) == 1.0);
    CHECK(e.at(r, 0) == 0.0);
    CHECK(e.at(r, 1) == 0.0);
    CHECK(e.at(r, 4) == 0.0);
    CHECK(e.at(r, 5) == 0.0);
  }
}

TEST_CASE("single bright pixel matches direct convolution") {
  std::vector<std::uint8_t> px(25, 0);
  px[12] = 200;
  const Image img(5, 5, px);
  const EdgeMap e = prewitt(img);
  const auto oracle = brute_prewitt(img);
  for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(e[i] == doctest::Approx(oracle[i]).epsilon(1e-15));
  CHECK(e.at(2, 2) == 0.0);
  CHECK(e.max() == 1.0);
}

TEST_CASE("random images match direct convolution and stay in range") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Image img = testing::random_image(3 + trial % 9, 3 + trial % 6, rng);
    const EdgeMap e = prewitt(img);
    const auto oracle = brute_prewitt(img);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      REQUIRE(e[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
      REQUIRE(e[i] >= 0.0);
      REQUIRE(e[i] <= 1.0);
    }
    CHECK(*std::max_element(e.values().begin(), e.values().end()) == 1.0);
  }
}

TEST_CASE("additive shift invariance") {
  std::mt19937_64 rng(12);
  const Image img = testing::random_image(8, 8, rng, 20, 200);
  std::vector<std::uint8_t> shifted(img.pixels().begin(), img.pixels().end());
  for (auto& v : shifted) v = static_cast<std::uint8_t>(v + 30);
  CHECK(prewitt(img).values() == prewitt(Image(8, 8, shifted)).values());
}

TEST_CASE("translation equivariance in the interior") {
  std::mt19937_64 rng(13);
  const Image big = testing::random_image(12, 12, rng);
  std::vector<std::uint8_t> moved(big.size());
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) moved[r * 12 + c] = big.at(r, (c + 11) % 12);
  }
  std::vector<double> ma(144), mb(144);
  kernels::serial::prewitt_magnitude(big.pixels(), 12, 12, ma);
  kernels::serial::prewitt_magnitude(moved, 12, 12, mb);
  for (int r = 1; r < 11; ++r) {
    for (int c = 2; c < 11; ++c) CHECK(mb[r * 12 + c] == ma[r * 12 + c - 1]);
  }
}

TEST_CASE("to_image scales by 255") {
  std::vector<std::uint8_t> px(9, 0);
  px[8] = 90;
  const Image out = prewitt(Image(3, 3, px)).to_image();
  CHECK(*std::max_element(out.pixels().begin(), out.pixels().end()) == 255);
}
