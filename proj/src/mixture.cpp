#include "pixsteg/mixture.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "pixsteg/errors.hpp"
#include "pixsteg/kernels.hpp"

namespace pixsteg {

namespace {

constexpr char kDistMagic[8] = {'P', 'X', 'S', 'T', 'D', 'I', 'S', 'T'};
constexpr std::uint32_t kDistVersion = 1;
constexpr int kMaxComponents = 256;

void check_finite(const std::vector<double>& values, const char* name) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError(std::string("non-finite ") + name + " at index " + std::to_string(i));
    }
  }
}

template <typename T>
void put(std::vector<char>& out, T value) {
  const auto* p = reinterpret_cast<const char*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T take(const std::vector<char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DataError("distribution file truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

HeadActivations HeadActivations::zeros(int height, int width, int components) {
  HeadActivations h;
  h.height = height;
  h.width = width;
  h.components = components;
  const std::size_t n = static_cast<std::size_t>(height) * width;
  h.edge_logit.assign(n, 0.0);
  h.mix_logit.assign(n * components, 0.0);
  h.mean.assign(n * components, 0.0);
  h.log_scale.assign(n * components, 0.0);
  return h;
}

void HeadActivations::validate() const {
  if (components < 1 || components > kMaxComponents) {
    throw DataError("mixture component count out of range");
  }
  const std::size_t n = pixels();
  if (edge_logit.size() != n || mix_logit.size() != n * components || mean.size() != n * components ||
      log_scale.size() != n * components) {
    throw DataError("head activation sizes do not match dimensions");
  }
  check_finite(edge_logit, "edge logit");
  check_finite(mix_logit, "mixture logit");
  check_finite(mean, "mixture mean");
  check_finite(log_scale, "mixture log-scale");
}

PixelDistribution::PixelDistribution(int height, int width, std::vector<double> probs)
    : height_(height), width_(width), probs_(std::move(probs)) {
  if (probs_.size() != static_cast<std::size_t>(height) * width * kPixelLevels) {
    throw DataError("distribution size does not match dimensions");
  }
}

PixelDistribution to_pixel_distribution(const HeadActivations& head) {
  head.validate();
  std::vector<double> probs(head.pixels() * kPixelLevels);
  kernels::parallel::mixture_pmf(static_cast<int>(head.pixels()), head.components, head.mix_logit,
                                 head.mean, head.log_scale, probs);
  return PixelDistribution(head.height, head.width, std::move(probs));
}

double mixture_log_prob(int components, const double* logits, const double* means,
                        const double* log_scales, int k, double* d_logits, double* d_means,
                        double* d_log_scales) {
  std::array<double, kMaxComponents> weights{};
  std::array<BinGradient, kMaxComponents> bins{};
  softmax(std::span<const double>(logits, components), std::span<double>(weights.data(), components));
  double total = 0.0;
  for (int m = 0; m < components; ++m) {
    bins[m] = bin_probability_with_grad(k, means[m], log_scales[m]);
    total += weights[m] * bins[m].probability;
  }
  const bool floored = !(total >= kProbabilityFloor);
  if (d_logits != nullptr) {
    for (int m = 0; m < components; ++m) {
      if (floored) {
        d_logits[m] = d_means[m] = d_log_scales[m] = 0.0;
        continue;
      }
      const double share = weights[m] / total;
      d_logits[m] = weights[m] * (bins[m].probability / total - 1.0);
      d_means[m] = share * bins[m].d_mean;
      d_log_scales[m] = share * bins[m].d_log_scale;
    }
  }
  return std::log(floored ? kProbabilityFloor : total);
}

std::vector<double> pixel_log_prob(const HeadActivations& head, const Image& image) {
  head.validate();
  if (head.height != image.height() || head.width != image.width()) {
    throw DataError("pixel_log_prob: head and image dimensions differ");
  }
  const int m = head.components;
  std::vector<double> out(head.pixels());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const std::size_t off = p * m;
    out[p] = mixture_log_prob(m, head.mix_logit.data() + off, head.mean.data() + off,
                              head.log_scale.data() + off, image[p]);
  }
  return out;
}

void save_distribution(const PixelDistribution& dist, const std::filesystem::path& path) {
  std::vector<char> bytes(std::begin(kDistMagic), std::end(kDistMagic));
  put<std::uint32_t>(bytes, kDistVersion);
  put<std::uint32_t>(bytes, static_cast<std::uint32_t>(dist.height()));
  put<std::uint32_t>(bytes, static_cast<std::uint32_t>(dist.width()));
  put<std::uint32_t>(bytes, kPixelLevels);
  const auto* raw = reinterpret_cast<const char*>(dist.probs().data());
  bytes.insert(bytes.end(), raw, raw + dist.probs().size() * sizeof(double));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write distribution file " + path.string());
}

PixelDistribution load_distribution(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open distribution file " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kDistMagic) || std::memcmp(bytes.data(), kDistMagic, sizeof(kDistMagic)) != 0) {
    throw DataError("not a pixel distribution file: " + path.string());
  }
  std::size_t pos = sizeof(kDistMagic);
  if (take<std::uint32_t>(bytes, pos) != kDistVersion) {
    throw DataError("unsupported distribution file version");
  }
  const auto height = take<std::uint32_t>(bytes, pos);
  const auto width = take<std::uint32_t>(bytes, pos);
  if (take<std::uint32_t>(bytes, pos) != kPixelLevels) {
    throw DataError("distribution file must have 256 levels");
  }
  const std::size_t count = static_cast<std::size_t>(height) * width * kPixelLevels;
  if (bytes.size() - pos != count * sizeof(double)) throw DataError("distribution file truncated");
  std::vector<double> probs(count);
  std::memcpy(probs.data(), bytes.data() + pos, count * sizeof(double));
  return PixelDistribution(static_cast<int>(height), static_cast<int>(width), std::move(probs));
}

}  // namespace pixsteg
