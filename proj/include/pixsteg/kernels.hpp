#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference in
// `serial` and an OpenMP version in `parallel`. For every output element both
// versions perform the same floating-point operations in the same order, so
// their results are bit-identical for any thread count.

#include <cstdint>
#include <span>

namespace pixsteg::kernels {

struct Tap {
  int dy;
  int dx;
};

enum class Stencil {
  kCausalStrict,  // rows above plus left neighbour; excludes the centre
  kCausal,        // kCausalStrict plus the centre
  kFull3x3,
  kPointwise,
};

std::span<const Tap> stencil_taps(Stencil stencil);

// Zero-padded "same" convolution over channel-major planes. Weights are laid
// out [out][in][tap] over the stencil's active taps only, so masked positions
// are absent rather than multiplied by zero.
struct ConvGeometry {
  int in_channels;
  int out_channels;
  int height;
  int width;
  Stencil stencil;

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  int taps() const { return static_cast<int>(stencil_taps(stencil).size()); }
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_channels * taps();
  }
};

namespace serial {

// Writes output rows [row_begin, row_end) of every channel; other rows are
// left untouched. An empty bias means no bias term.
void conv_forward(const ConvGeometry& g, std::span<const double> input,
                  std::span<const double> weight, std::span<const double> bias,
                  std::span<double> output, int row_begin, int row_end);
void conv_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                         std::span<const double> weight, std::span<double> grad_input);
// Accumulates into grad_weight / grad_bias (grad_bias may be empty).
void conv_backward_params(const ConvGeometry& g, std::span<const double> input,
                          std::span<const double> grad_output, std::span<double> grad_weight,
                          std::span<double> grad_bias);

// Raw Prewitt gradient magnitude with replicate padding.
void prewitt_magnitude(std::span<const std::uint8_t> pixels, int height, int width,
                       std::span<double> magnitude);

// Per-pixel 256-bin discretized logistic mixture; parameters are pixel-major
// [pixel][component].
void mixture_pmf(int pixels, int components, std::span<const double> logits,
                 std::span<const double> means, std::span<const double> log_scales,
                 std::span<double> probs);

// Per-pixel argmax of probs over [x - budget, x + budget] clamped to [0, 255].
// Ties go to the value closest to x, then to the smaller value.
void restricted_argmax(std::span<const double> probs, std::span<const std::uint8_t> current,
                       std::span<const int> budget, std::span<std::uint8_t> out);

}  // namespace serial

namespace parallel {

void conv_forward(const ConvGeometry& g, std::span<const double> input,
                  std::span<const double> weight, std::span<const double> bias,
                  std::span<double> output, int row_begin, int row_end);
void conv_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                         std::span<const double> weight, std::span<double> grad_input);
void conv_backward_params(const ConvGeometry& g, std::span<const double> input,
                          std::span<const double> grad_output, std::span<double> grad_weight,
                          std::span<double> grad_bias);
void prewitt_magnitude(std::span<const std::uint8_t> pixels, int height, int width,
                       std::span<double> magnitude);
void mixture_pmf(int pixels, int components, std::span<const double> logits,
                 std::span<const double> means, std::span<const double> log_scales,
                 std::span<double> probs);
void restricted_argmax(std::span<const double> probs, std::span<const std::uint8_t> current,
                       std::span<const int> budget, std::span<std::uint8_t> out);

}  // namespace parallel

// Single-pixel building blocks used by both kernel families.
void pixel_mixture_pmf(int components, const double* logits, const double* means,
                       const double* log_scales, double* probs);
std::uint8_t pixel_restricted_argmax(const double* probs, std::uint8_t current, int budget);

}  // namespace pixsteg::kernels
