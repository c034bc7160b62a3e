#include "pixsteg/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <stdexcept>

#include "pixsteg/logistic.hpp"

namespace pixsteg::kernels {

namespace {

constexpr std::array<Tap, 4> kCausalStrictTaps{{{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}}};
constexpr std::array<Tap, 5> kCausalTaps{{{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}}};
constexpr std::array<Tap, 9> kFullTaps{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
constexpr std::array<Tap, 1> kPointTaps{{{0, 0}}};

constexpr int kMaxComponents = 256;

inline bool inside(int y, int x, int h, int w) { return y >= 0 && y < h && x >= 0 && x < w; }

// Valid [begin, end) of an output coordinate when the input is read at offset d.
inline int lo_for(int d) { return std::max(0, -d); }
inline int hi_for(int d, int n) { return std::min(n, n - d); }

void forward_channel(const ConvGeometry& g, int o, std::span<const double> input,
                     std::span<const double> weight, std::span<const double> bias,
                     std::span<double> output, int row_begin, int row_end) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  const int h = g.height;
  const int w = g.width;
  double* out = output.data() + o * g.plane();
  const double b = bias.empty() ? 0.0 : bias[o];
  std::fill(out + static_cast<std::size_t>(row_begin) * w, out + static_cast<std::size_t>(row_end) * w,
            b);
  for (int i = 0; i < g.in_channels; ++i) {
    const double* in = input.data() + i * g.plane();
    const double* wrow = weight.data() + (static_cast<std::size_t>(o) * g.in_channels + i) * nt;
    for (int t = 0; t < nt; ++t) {
      const int dy = taps[t].dy;
      const int dx = taps[t].dx;
      const double wt = wrow[t];
      const int y0 = std::max(row_begin, lo_for(dy));
      const int y1 = std::min(row_end, hi_for(dy, h));
      const int x0 = lo_for(dx);
      const int x1 = hi_for(dx, w);
      for (int y = y0; y < y1; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        const double* irow = in + static_cast<std::size_t>(y + dy) * w + dx;
        for (int x = x0; x < x1; ++x) orow[x] += wt * irow[x];
      }
    }
  }
}

void backward_input_channel(const ConvGeometry& g, int i, std::span<const double> grad_output,
                            std::span<const double> weight, std::span<double> grad_input) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  const int h = g.height;
  const int w = g.width;
  double* din = grad_input.data() + i * g.plane();
  std::fill(din, din + g.plane(), 0.0);
  for (int o = 0; o < g.out_channels; ++o) {
    const double* dout = grad_output.data() + o * g.plane();
    const double* wrow = weight.data() + (static_cast<std::size_t>(o) * g.in_channels + i) * nt;
    for (int t = 0; t < nt; ++t) {
      // Input (y, x) feeds output (y - dy, x - dx).
      const int dy = -taps[t].dy;
      const int dx = -taps[t].dx;
      const double wt = wrow[t];
      const int y0 = lo_for(dy), y1 = hi_for(dy, h);
      const int x0 = lo_for(dx), x1 = hi_for(dx, w);
      for (int y = y0; y < y1; ++y) {
        double* drow = din + static_cast<std::size_t>(y) * w;
        const double* orow = dout + static_cast<std::size_t>(y + dy) * w + dx;
        for (int x = x0; x < x1; ++x) drow[x] += wt * orow[x];
      }
    }
  }
}

void backward_params_channel(const ConvGeometry& g, int o, std::span<const double> input,
                             std::span<const double> grad_output, std::span<double> grad_weight,
                             std::span<double> grad_bias) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  const int h = g.height;
  const int w = g.width;
  const double* dout = grad_output.data() + o * g.plane();
  if (!grad_bias.empty()) {
    double acc = 0.0;
    for (std::size_t p = 0; p < g.plane(); ++p) acc += dout[p];
    grad_bias[o] += acc;
  }
  for (int i = 0; i < g.in_channels; ++i) {
    const double* in = input.data() + i * g.plane();
    double* gw = grad_weight.data() + (static_cast<std::size_t>(o) * g.in_channels + i) * nt;
    for (int t = 0; t < nt; ++t) {
      const int dy = taps[t].dy;
      const int dx = taps[t].dx;
      double acc = 0.0;
      for (int y = lo_for(dy); y < hi_for(dy, h); ++y) {
        const double* orow = dout + static_cast<std::size_t>(y) * w;
        const double* irow = in + static_cast<std::size_t>(y + dy) * w + dx;
        for (int x = lo_for(dx); x < hi_for(dx, w); ++x) acc += orow[x] * irow[x];
      }
      gw[t] += acc;
    }
  }
}

inline int replicate(int v, int n) { return std::clamp(v, 0, n - 1); }

double prewitt_at(std::span<const std::uint8_t> px, int height, int width, int r, int c) {
  auto at = [&](int rr, int cc) {
    return static_cast<int>(px[static_cast<std::size_t>(replicate(rr, height)) * width +
                               replicate(cc, width)]);
  };
  int gx = 0;
  int gy = 0;
  for (int d = -1; d <= 1; ++d) {
    gx += at(r + d, c + 1) - at(r + d, c - 1);
    gy += at(r + 1, c + d) - at(r - 1, c + d);
  }
  return std::sqrt(static_cast<double>(gx * gx + gy * gy));
}

void check_components(int components) {
  if (components < 1 || components > kMaxComponents) {
    throw std::invalid_argument("mixture component count out of range");
  }
}

}  // namespace

std::span<const Tap> stencil_taps(Stencil stencil) {
  switch (stencil) {
    case Stencil::kCausalStrict:
      return kCausalStrictTaps;
    case Stencil::kCausal:
      return kCausalTaps;
    case Stencil::kFull3x3:
      return kFullTaps;
    case Stencil::kPointwise:
      return kPointTaps;
  }
  std::abort();
}

void pixel_mixture_pmf(int components, const double* logits, const double* means,
                       const double* log_scales, double* probs) {
  std::array<double, kMaxComponents> weights{};
  softmax(std::span<const double>(logits, components), std::span<double>(weights.data(), components));
  std::array<EdgeSigmoid, kPixelLevels - 1> edges;
  std::array<double, kPixelLevels - 1> zs;
  std::fill(probs, probs + kPixelLevels, 0.0);
  for (int m = 0; m < components; ++m) {
    const double inv = inverse_scale(log_scales[m]);
    for (int k = 0; k < kPixelLevels - 1; ++k) {
      zs[k] = upper_edge(k, means[m], inv);
      edges[k] = edge_sigmoid(zs[k]);
    }
    const double wm = weights[m];
    probs[0] += wm * bin_mass(0, EdgeSigmoid{}, 0.0, edges[0]);
    for (int k = 1; k < kPixelLevels - 1; ++k) {
      probs[k] += wm * bin_mass(k, edges[k - 1], zs[k - 1], edges[k]);
    }
    probs[kPixelLevels - 1] +=
        wm * bin_mass(kPixelLevels - 1, edges[kPixelLevels - 2], zs[kPixelLevels - 2], EdgeSigmoid{});
  }
}

std::uint8_t pixel_restricted_argmax(const double* probs, std::uint8_t current, int budget) {
  const int x = current;
  const int lo = std::max(x - budget, 0);
  const int hi = std::min(x + budget, kPixelLevels - 1);
  int best = lo;
  for (int k = lo + 1; k <= hi; ++k) {
    if (probs[k] > probs[best] ||
        (probs[k] == probs[best] && std::abs(k - x) < std::abs(best - x))) {
      best = k;
    }
  }
  return static_cast<std::uint8_t>(best);
}

namespace serial {

void conv_forward(const ConvGeometry& g, std::span<const double> input,
                  std::span<const double> weight, std::span<const double> bias,
                  std::span<double> output, int row_begin, int row_end) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  for (int o = 0; o < g.out_channels; ++o) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < g.width; ++x) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < g.in_channels; ++i) {
          for (int t = 0; t < nt; ++t) {
            const int yy = y + taps[t].dy;
            const int xx = x + taps[t].dx;
            if (!inside(yy, xx, g.height, g.width)) continue;
            acc += weight[(static_cast<std::size_t>(o) * g.in_channels + i) * nt + t] *
                   input[i * g.plane() + static_cast<std::size_t>(yy) * g.width + xx];
          }
        }
        output[o * g.plane() + static_cast<std::size_t>(y) * g.width + x] = acc;
      }
    }
  }
}

void conv_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                         std::span<const double> weight, std::span<double> grad_input) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  for (int i = 0; i < g.in_channels; ++i) {
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        double acc = 0.0;
        for (int o = 0; o < g.out_channels; ++o) {
          for (int t = 0; t < nt; ++t) {
            const int yo = y - taps[t].dy;
            const int xo = x - taps[t].dx;
            if (!inside(yo, xo, g.height, g.width)) continue;
            acc += weight[(static_cast<std::size_t>(o) * g.in_channels + i) * nt + t] *
                   grad_output[o * g.plane() + static_cast<std::size_t>(yo) * g.width + xo];
          }
        }
        grad_input[i * g.plane() + static_cast<std::size_t>(y) * g.width + x] = acc;
      }
    }
  }
}

void conv_backward_params(const ConvGeometry& g, std::span<const double> input,
                          std::span<const double> grad_output, std::span<double> grad_weight,
                          std::span<double> grad_bias) {
  const auto taps = stencil_taps(g.stencil);
  const int nt = static_cast<int>(taps.size());
  for (int o = 0; o < g.out_channels; ++o) {
    const double* dout = grad_output.data() + o * g.plane();
    if (!grad_bias.empty()) {
      double acc = 0.0;
      for (std::size_t p = 0; p < g.plane(); ++p) acc += dout[p];
      grad_bias[o] += acc;
    }
    for (int i = 0; i < g.in_channels; ++i) {
      for (int t = 0; t < nt; ++t) {
        double acc = 0.0;
        for (int y = 0; y < g.height; ++y) {
          for (int x = 0; x < g.width; ++x) {
            const int yy = y + taps[t].dy;
            const int xx = x + taps[t].dx;
            if (!inside(yy, xx, g.height, g.width)) continue;
            acc += dout[static_cast<std::size_t>(y) * g.width + x] *
                   input[i * g.plane() + static_cast<std::size_t>(yy) * g.width + xx];
          }
        }
        grad_weight[(static_cast<std::size_t>(o) * g.in_channels + i) * nt + t] += acc;
      }
    }
  }
}

void prewitt_magnitude(std::span<const std::uint8_t> pixels, int height, int width,
                       std::span<double> magnitude) {
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      magnitude[static_cast<std::size_t>(r) * width + c] = prewitt_at(pixels, height, width, r, c);
    }
  }
}

void mixture_pmf(int pixels, int components, std::span<const double> logits,
                 std::span<const double> means, std::span<const double> log_scales,
                 std::span<double> probs) {
  check_components(components);
  for (int p = 0; p < pixels; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * components;
    pixel_mixture_pmf(components, logits.data() + off, means.data() + off, log_scales.data() + off,
                      probs.data() + static_cast<std::size_t>(p) * kPixelLevels);
  }
}

void restricted_argmax(std::span<const double> probs, std::span<const std::uint8_t> current,
                       std::span<const int> budget, std::span<std::uint8_t> out) {
  for (std::size_t p = 0; p < current.size(); ++p) {
    out[p] = pixel_restricted_argmax(probs.data() + p * kPixelLevels, current[p], budget[p]);
  }
}

}  // namespace serial

namespace parallel {

void conv_forward(const ConvGeometry& g, std::span<const double> input,
                  std::span<const double> weight, std::span<const double> bias,
                  std::span<double> output, int row_begin, int row_end) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < g.out_channels; ++o) {
    forward_channel(g, o, input, weight, bias, output, row_begin, row_end);
  }
}

void conv_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                         std::span<const double> weight, std::span<double> grad_input) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.in_channels; ++i) {
    backward_input_channel(g, i, grad_output, weight, grad_input);
  }
}

void conv_backward_params(const ConvGeometry& g, std::span<const double> input,
                          std::span<const double> grad_output, std::span<double> grad_weight,
                          std::span<double> grad_bias) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < g.out_channels; ++o) {
    backward_params_channel(g, o, input, grad_output, grad_weight, grad_bias);
  }
}

void prewitt_magnitude(std::span<const std::uint8_t> pixels, int height, int width,
                       std::span<double> magnitude) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      magnitude[static_cast<std::size_t>(r) * width + c] = prewitt_at(pixels, height, width, r, c);
    }
  }
}

void mixture_pmf(int pixels, int components, std::span<const double> logits,
                 std::span<const double> means, std::span<const double> log_scales,
                 std::span<double> probs) {
  check_components(components);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < pixels; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * components;
    pixel_mixture_pmf(components, logits.data() + off, means.data() + off, log_scales.data() + off,
                      probs.data() + static_cast<std::size_t>(p) * kPixelLevels);
  }
}

void restricted_argmax(std::span<const double> probs, std::span<const std::uint8_t> current,
                       std::span<const int> budget, std::span<std::uint8_t> out) {
  const auto n = static_cast<std::ptrdiff_t>(current.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    out[p] = pixel_restricted_argmax(probs.data() + p * kPixelLevels, current[p], budget[p]);
  }
}

}  // namespace parallel

}  // namespace pixsteg::kernels
