#include "pixsteg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace pixsteg {

namespace {

using Canvas = std::vector<double>;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Canvas gradient_background(int size, std::mt19937_64& rng) {
  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double base = uniform(rng, 40.0, 215.0);
  const double slope = uniform(rng, 0.0, 120.0) / size;
  Canvas c(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r) {
    for (int col = 0; col < size; ++col) {
      const double t = (col - size / 2.0) * std::cos(angle) + (r - size / 2.0) * std::sin(angle);
      c[static_cast<std::size_t>(r) * size + col] = base + slope * t;
    }
  }
  return c;
}

void add_blob(Canvas& c, int size, std::mt19937_64& rng) {
  const double cy = uniform(rng, 0.0, size);
  const double cx = uniform(rng, 0.0, size);
  const double radius = uniform(rng, size / 8.0, size / 2.5);
  const double amp = uniform(rng, -80.0, 80.0);
  for (int r = 0; r < size; ++r) {
    for (int col = 0; col < size; ++col) {
      const double d2 = (r - cy) * (r - cy) + (col - cx) * (col - cx);
      c[static_cast<std::size_t>(r) * size + col] += amp * std::exp(-d2 / (2.0 * radius * radius));
    }
  }
}

void add_shape(Canvas& c, int size, std::mt19937_64& rng) {
  const double value = uniform(rng, 0.0, 255.0);
  const bool disc = uniform_int(rng, 0, 1) == 1;
  const double cy = uniform(rng, 0.0, size);
  const double cx = uniform(rng, 0.0, size);
  const double ry = uniform(rng, size / 10.0, size / 3.0);
  const double rx = uniform(rng, size / 10.0, size / 3.0);
  for (int r = 0; r < size; ++r) {
    for (int col = 0; col < size; ++col) {
      const double dy = (r - cy) / ry;
      const double dx = (col - cx) / rx;
      const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::fabs(dy) <= 1.0 && std::fabs(dx) <= 1.0;
      if (inside) c[static_cast<std::size_t>(r) * size + col] = value;
    }
  }
}

void add_stripes(Canvas& c, int size, std::mt19937_64& rng) {
  const double angle = uniform(rng, 0.0, std::numbers::pi);
  const double period = uniform(rng, 3.0, size / 3.0);
  const double lo = uniform(rng, 0.0, 120.0);
  const double hi = uniform(rng, 135.0, 255.0);
  const int r0 = uniform_int(rng, 0, size / 2);
  const int c0 = uniform_int(rng, 0, size / 2);
  const int r1 = uniform_int(rng, r0 + size / 4, size);
  const int c1 = uniform_int(rng, c0 + size / 4, size);
  for (int r = r0; r < r1; ++r) {
    for (int col = c0; col < c1; ++col) {
      const double t = col * std::cos(angle) + r * std::sin(angle);
      const bool on = std::fmod(std::fabs(t), period) < period / 2.0;
      c[static_cast<std::size_t>(r) * size + col] = on ? hi : lo;
    }
  }
}

Image to_image(const Canvas& c, int size, std::mt19937_64& rng, double texture) {
  std::normal_distribution<double> noise(0.0, texture);
  std::vector<std::uint8_t> px(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = texture > 0.0 ? c[i] + noise(rng) : c[i];
    px[i] = clamp_intensity(std::lround(v));
  }
  return Image(size, size, std::move(px));
}

}  // namespace

Image synth_natural(int size, std::mt19937_64& rng) {
  Canvas c = gradient_background(size, rng);
  const int blobs = uniform_int(rng, 1, 3);
  for (int i = 0; i < blobs; ++i) add_blob(c, size, rng);
  const int shapes = uniform_int(rng, 1, 2);
  for (int i = 0; i < shapes; ++i) add_shape(c, size, rng);
  return to_image(c, size, rng, 1.0);
}

Image synth_edge_rich(int size, std::mt19937_64& rng) {
  Canvas c = gradient_background(size, rng);
  add_stripes(c, size, rng);
  const int shapes = uniform_int(rng, 3, 6);
  for (int i = 0; i < shapes; ++i) add_shape(c, size, rng);
  return to_image(c, size, rng, 1.0);
}

Image synth_step(int size, std::mt19937_64& rng) {
  const double a = uniform(rng, 0.0, 255.0);
  double b = uniform(rng, 0.0, 255.0);
  if (std::fabs(a - b) < 60.0) b = a < 128.0 ? a + 100.0 : a - 100.0;
  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double offset = uniform(rng, -size / 4.0, size / 4.0);
  Canvas c(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r) {
    for (int col = 0; col < size; ++col) {
      const double t = (col - size / 2.0) * std::cos(angle) + (r - size / 2.0) * std::sin(angle);
      c[static_cast<std::size_t>(r) * size + col] = t < offset ? a : b;
    }
  }
  return to_image(c, size, rng, 0.0);
}

std::vector<Image> synth_images(int count, int size, std::uint64_t seed, CorpusStyle style) {
  std::mt19937_64 rng(seed);
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(style == CorpusStyle::kNatural ? synth_natural(size, rng) : synth_edge_rich(size, rng));
  }
  return out;
}

std::vector<CorpusPair> synth_corpus(int count, int size, std::uint64_t seed, CorpusStyle style) {
  const auto covers = synth_images(count, size, seed, style);
  // Secrets come from an independent stream so they never mirror their cover.
  const auto secrets = synth_images(count, size, seed ^ 0x9e3779b97f4a7c15ULL, CorpusStyle::kNatural);
  std::vector<CorpusPair> out;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img%04d", i);
    out.push_back(CorpusPair{name, covers[i], secrets[i]});
  }
  return out;
}

void write_corpus(const std::vector<CorpusPair>& pairs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : pairs) {
    save_image(p.cover, dir / (p.name + ".cover.pgm"));
    save_image(p.secret, dir / (p.name + ".secret.pgm"));
  }
}

std::vector<CorpusPair> read_corpus(const std::filesystem::path& dir) {
  static const std::string kCoverSuffix = ".cover.pgm";
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() > kCoverSuffix.size() && file.ends_with(kCoverSuffix)) {
      names.push_back(file.substr(0, file.size() - kCoverSuffix.size()));
    }
  }
  std::sort(names.begin(), names.end());
  std::vector<CorpusPair> out;
  for (const auto& name : names) {
    const auto secret = dir / (name + ".secret.pgm");
    if (!std::filesystem::exists(secret)) throw DataError("missing secret for " + name);
    out.push_back(CorpusPair{name, load_image(dir / (name + kCoverSuffix)), load_image(secret)});
  }
  return out;
}

}  // namespace pixsteg
