#pragma once

// Layer graph of the analyzer. Internal to the library.
//
//   trunk.input        causal-strict 3x3, 1 -> C
//   trunk.blockR.conv1 causal 3x3, C -> C     (pre-activation residual block)
//   trunk.blockR.conv2 causal 3x3, C -> C
//   head.hidden        1x1, C -> C
//   head.mixture       1x1, C -> 3M           (logits | means | log-scales)
//   edge.conv1         3x3, 1 -> E
//   edge.conv2         3x3, E -> E
//   edge.output        1x1, E -> 1
//   edge.trunk         1x1, C -> 1 (no bias)  trunk features into the edge logit

#include <string>
#include <vector>

#include "pixsteg/analyzer.hpp"
#include "pixsteg/kernels.hpp"

namespace pixsteg::detail {

inline constexpr double kMeanOffset = 127.5;
inline constexpr double kMeanScale = 127.5;

struct LayerSpec {
  std::string name;
  kernels::ConvGeometry geometry;
  bool has_bias;
};

std::vector<LayerSpec> layer_specs(const AnalyzerConfig& cfg);

double elu(double x);
double elu_grad(double x);

struct Activations {
  std::vector<double> input;               // 1 x HW, scaled to [-1, 1]
  std::vector<std::vector<double>> trunk;  // R + 1 entries, C x HW
  std::vector<std::vector<double>> act1, pre2, act2, res;  // per block
  std::vector<double> features;            // elu(trunk[R])
  std::vector<double> hidden_pre, hidden;  // head.hidden before / after elu
  std::vector<double> mixture;             // 3M x HW
  std::vector<double> edge1_pre, edge1, edge2_pre, edge2;
  std::vector<double> edge_logit;          // HW
};

class Network {
 public:
  explicit Network(const ModelWeights& weights);

  int height() const { return size_; }
  int width() const { return size_; }
  const AnalyzerConfig& config() const { return weights_->config; }

  void allocate(Activations& a) const;
  void load_input(const Image& image, Activations& a) const;
  void set_input_pixel(Activations& a, std::size_t index, std::uint8_t value) const;

  void forward(Activations& a, bool with_edge_branch) const;
  // Recomputes trunk rows [row_begin, row_end) from the input; rows above must
  // already be current.
  void forward_trunk_rows(Activations& a, int row_begin, int row_end) const;
  // Mixture parameters at one pixel from current trunk features.
  void mixture_at(const Activations& a, std::size_t pixel, double* logits, double* means,
                  double* log_scales) const;

  HeadActivations head(const Activations& a) const;

  // d_mixture: 3M x HW channel-major gradient w.r.t. the raw head.mixture
  // output; d_edge: HW gradient w.r.t. the edge logit. Accumulates into grad.
  void backward(const Activations& a, const std::vector<double>& d_mixture,
                const std::vector<double>& d_edge, ModelWeights& grad) const;

 private:
  struct Layer {
    kernels::ConvGeometry geometry;
    const Tensor* weight;
    const Tensor* bias;
    std::string name;
  };

  void conv(const Layer& l, const std::vector<double>& in, std::vector<double>& out, int row_begin,
            int row_end) const;

  const ModelWeights* weights_;
  int size_;
  int channels_;
  int components_;
  int edge_channels_;
  int blocks_;
  std::vector<Layer> layers_;
};

}  // namespace pixsteg::detail
