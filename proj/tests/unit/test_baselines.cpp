#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pixsteg/baselines.hpp"

using namespace pixsteg;

namespace {

int px_clamped(const Image& img, int r, int c) {
  return img.at(std::clamp(r, 0, img.height() - 1), std::clamp(c, 0, img.width() - 1));
}

Image wiener_oracle(const Image& img, int window) {
  const int half = window / 2;
  const int h = img.height(), w = img.width();
  std::vector<double> m(img.size()), v(img.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::vector<double> vals;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) vals.push_back(px_clamped(img, r + dy, c + dx));
      }
      double mean = 0;
      for (double x : vals) mean += x;
      mean /= vals.size();
      double var = 0;
      for (double x : vals) var += (x - mean) * (x - mean);
      m[r * w + c] = mean;
      v[r * w + c] = var / vals.size();
    }
  }
  double vn = 0;
  for (double x : v) vn += x;
  vn /= v.size();
  std::vector<std::uint8_t> out(img.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double d = std::max(v[p], vn);
    const double g = d > 0 ? std::max(v[p] - vn, 0.0) / d : 0.0;
    out[p] = clamp_intensity(std::lround(m[p] + g * (img[p] - m[p])));
  }
  return Image(h, w, out);
}

}  // namespace

TEST_CASE("gaussian: epsilon 0 is the identity") {
  std::mt19937_64 rng(1);
  const Image img = testing::random_image(6, 6, rng);
  CHECK(gaussian_noise(img, 0, 123) == img);
}

TEST_CASE("gaussian: seeded and reproducible") {
  std::mt19937_64 rng(2);
  const Image img = testing::random_image(16, 16, rng);
  CHECK(gaussian_noise(img, 3, 7) == gaussian_noise(img, 3, 7));
  CHECK_FALSE(gaussian_noise(img, 3, 7) == gaussian_noise(img, 3, 8));
}

TEST_CASE("gaussian: empirical std matches epsilon within 5%") {
  const Image flat = Image::filled(256, 256, 128);
  for (int eps : {1, 2, 4, 8}) {
    const Image out = gaussian_noise(flat, eps, 99);
    double sum = 0, sq = 0;
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double d = int(out[p]) - 128;
      sum += d;
      sq += d * d;
    }
    const double n = static_cast<double>(out.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    CHECK(sd == doctest::Approx(eps).epsilon(0.05));
  }
}

TEST_CASE("gaussian: clamps at the ends") {
  const Image out = gaussian_noise(Image::filled(8, 8, 255), 8, 3);
  CHECK(*std::min_element(out.pixels().begin(), out.pixels().end()) < 255);
  const Image low = gaussian_noise(Image::filled(8, 8, 0), 8, 3);
  CHECK(*std::max_element(low.pixels().begin(), low.pixels().end()) > 0);
}

TEST_CASE("median: constant image unchanged") {
  const Image img = Image::filled(5, 7, 42);
  CHECK(median_filter(img, 3) == img);
  CHECK(median_filter(img, 5) == img);
}

TEST_CASE("median: impulse removed") {
  std::vector<std::uint8_t> px(25, 60);
  px[12] = 250;
  CHECK(median_filter(Image(5, 5, px), 3) == Image::filled(5, 5, 60));
}

TEST_CASE("median: ramp interior unchanged") {
  std::vector<std::uint8_t> px(36);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) px[r * 6 + c] = static_cast<std::uint8_t>(10 * r + 3 * c);
  }
  const Image img(6, 6, px);
  const Image out = median_filter(img, 3);
  for (int r = 1; r < 5; ++r) {
    for (int c = 1; c < 5; ++c) CHECK(out.at(r, c) == img.at(r, c));
  }
}

TEST_CASE("median: matches a direct window sort") {
  std::mt19937_64 rng(4);
  const Image img = testing::random_image(7, 9, rng);
  for (int window : {3, 5}) {
    const Image out = median_filter(img, window);
    const int half = window / 2;
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 9; ++c) {
        std::vector<int> vals;
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx) vals.push_back(px_clamped(img, r + dy, c + dx));
        }
        std::sort(vals.begin(), vals.end());
        CHECK(out.at(r, c) == vals[vals.size() / 2]);
      }
    }
  }
}

TEST_CASE("median: repeated window 3 passes on binary images settle on a root") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> px(100);
    for (auto& v : px) v = (rng() & 1) ? 255 : 0;
    Image cur(10, 10, px);
    int passes = 0;
    for (; passes < 50; ++passes) {
      const Image next = median_filter(cur, 3);
      if (next == cur) break;
      cur = next;
    }
    CHECK(passes < 50);
    CHECK(median_filter(cur, 3) == cur);
    for (std::size_t p = 0; p < cur.size(); ++p) REQUIRE((cur[p] == 0 || cur[p] == 255));
  }
}

TEST_CASE("median: a noisy binary image can need more than one pass") {
  std::mt19937_64 rng(6);
  bool found = false;
  for (int trial = 0; trial < 20 && !found; ++trial) {
    std::vector<std::uint8_t> px(64);
    for (auto& v : px) v = (rng() & 1) ? 255 : 0;
    const Image once = median_filter(Image(8, 8, px), 3);
    found = !(median_filter(once, 3) == once);
  }
  CHECK(found);
}

TEST_CASE("wiener: constant image unchanged") {
  const Image img = Image::filled(6, 6, 77);
  CHECK(wiener_restore(img, 3) == img);
}

TEST_CASE("wiener: strong edge preserved") {
  std::vector<std::uint8_t> px(100, 20);
  for (int r = 0; r < 10; ++r) {
    for (int c = 5; c < 10; ++c) px[r * 10 + c] = 230;
  }
  const Image img(10, 10, px);
  const Image out = wiener_restore(img, 3);
  for (int r = 0; r < 10; ++r) {
    CHECK(std::abs(int(out.at(r, 4)) - 20) <= 25);
    CHECK(std::abs(int(out.at(r, 5)) - 230) <= 25);
  }
}

TEST_CASE("wiener: matches a direct two-pass evaluation") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = testing::random_image(7, 6, rng);
    CHECK(wiener_restore(img, 3) == wiener_oracle(img, 3));
    CHECK(wiener_restore(img, 5) == wiener_oracle(img, 5));
  }
}

TEST_CASE("config and dispatch") {
  BaselineConfig cfg;
  cfg.method = BaselineMethod::kMedian;
  cfg.window = 4;
  CHECK_THROWS_AS(cfg.validate(), DataError);
  cfg.window = 3;
  cfg.epsilon = -1;
  CHECK_THROWS_AS(cfg.validate(), DataError);
  CHECK(baseline_from_string("wiener") == BaselineMethod::kWiener);
  CHECK_THROWS_AS(baseline_from_string("blur"), DataError);
  std::mt19937_64 rng(7);
  const Image img = testing::random_image(5, 5, rng);
  BaselineConfig g{BaselineMethod::kGaussian, 2, 3, 11};
  CHECK(apply_baseline(img, g) == gaussian_noise(img, 2, 11));
  BaselineConfig m{BaselineMethod::kMedian, 0, 3, 0};
  CHECK(apply_baseline(img, m) == median_filter(img, 3));
  for (BaselineMethod method : {BaselineMethod::kGaussian, BaselineMethod::kMedian, BaselineMethod::kWiener}) {
    CHECK(apply_baseline(img, BaselineConfig{method, 4, 3, 1}).same_shape(img));
  }
}
