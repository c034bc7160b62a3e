#include "network.hpp"

#include <cmath>

namespace pixsteg::detail {

using kernels::ConvGeometry;
using kernels::Stencil;

std::vector<LayerSpec> layer_specs(const AnalyzerConfig& cfg) {
  const int s = cfg.image_size;
  const int c = cfg.hidden_channels;
  const int e = cfg.edge_channels;
  std::vector<LayerSpec> specs;
  specs.push_back({"trunk.input", ConvGeometry{1, c, s, s, Stencil::kCausalStrict}, true});
  for (int r = 0; r < cfg.residual_blocks; ++r) {
    const std::string prefix = "trunk.block" + std::to_string(r);
    specs.push_back({prefix + ".conv1", ConvGeometry{c, c, s, s, Stencil::kCausal}, true});
    specs.push_back({prefix + ".conv2", ConvGeometry{c, c, s, s, Stencil::kCausal}, true});
  }
  specs.push_back({"head.hidden", ConvGeometry{c, c, s, s, Stencil::kPointwise}, true});
  specs.push_back(
      {"head.mixture", ConvGeometry{c, 3 * cfg.components, s, s, Stencil::kPointwise}, true});
  specs.push_back({"edge.conv1", ConvGeometry{1, e, s, s, Stencil::kFull3x3}, true});
  specs.push_back({"edge.conv2", ConvGeometry{e, e, s, s, Stencil::kFull3x3}, true});
  specs.push_back({"edge.output", ConvGeometry{e, 1, s, s, Stencil::kPointwise}, true});
  specs.push_back({"edge.trunk", ConvGeometry{c, 1, s, s, Stencil::kPointwise}, false});
  return specs;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

namespace {

void elu_rows(const std::vector<double>& in, std::vector<double>& out, int channels,
              std::size_t plane, std::size_t begin, std::size_t end) {
  for (int ch = 0; ch < channels; ++ch) {
    const std::size_t off = ch * plane;
    for (std::size_t p = begin; p < end; ++p) out[off + p] = elu(in[off + p]);
  }
}

void add_rows(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
              int channels, std::size_t plane, std::size_t begin, std::size_t end) {
  for (int ch = 0; ch < channels; ++ch) {
    const std::size_t off = ch * plane;
    for (std::size_t p = begin; p < end; ++p) out[off + p] = a[off + p] + b[off + p];
  }
}

void mul_elu_grad(std::vector<double>& grad, const std::vector<double>& pre) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= elu_grad(pre[i]);
}

// Indices into the layer list, fixed by layer_specs order.
struct Index {
  int blocks;
  int conv1(int r) const { return 1 + 2 * r; }
  int conv2(int r) const { return 2 + 2 * r; }
  int hidden() const { return 1 + 2 * blocks; }
  int mixture() const { return hidden() + 1; }
  int edge1() const { return hidden() + 2; }
  int edge2() const { return hidden() + 3; }
  int edge_out() const { return hidden() + 4; }
  int edge_trunk() const { return hidden() + 5; }
};

}  // namespace

Network::Network(const ModelWeights& weights)
    : weights_(&weights),
      size_(weights.config.image_size),
      channels_(weights.config.hidden_channels),
      components_(weights.config.components),
      edge_channels_(weights.config.edge_channels),
      blocks_(weights.config.residual_blocks) {
  for (const auto& spec : layer_specs(weights.config)) {
    const Tensor& w = weights.at(spec.name + ".weight");
    if (w.values.size() != spec.geometry.weight_count()) {
      throw DataError("tensor " + spec.name + ".weight has the wrong size");
    }
    const Tensor* b = nullptr;
    if (spec.has_bias) {
      b = &weights.at(spec.name + ".bias");
      if (b->values.size() != static_cast<std::size_t>(spec.geometry.out_channels)) {
        throw DataError("tensor " + spec.name + ".bias has the wrong size");
      }
    }
    layers_.push_back(Layer{spec.geometry, &w, b, spec.name});
  }
}

void Network::conv(const Layer& l, const std::vector<double>& in, std::vector<double>& out,
                   int row_begin, int row_end) const {
  const std::span<const double> bias =
      l.bias != nullptr ? std::span<const double>(l.bias->values) : std::span<const double>();
  kernels::parallel::conv_forward(l.geometry, in, l.weight->values, bias, out, row_begin, row_end);
}

void Network::allocate(Activations& a) const {
  const std::size_t plane = static_cast<std::size_t>(size_) * size_;
  const std::size_t hidden = plane * channels_;
  a.input.assign(plane, 0.0);
  a.trunk.assign(blocks_ + 1, std::vector<double>(hidden, 0.0));
  a.act1.assign(blocks_, std::vector<double>(hidden, 0.0));
  a.pre2 = a.act1;
  a.act2 = a.act1;
  a.res = a.act1;
  a.features.assign(hidden, 0.0);
  a.hidden_pre.assign(hidden, 0.0);
  a.hidden.assign(hidden, 0.0);
  a.mixture.assign(plane * 3 * components_, 0.0);
  a.edge1_pre.assign(plane * edge_channels_, 0.0);
  a.edge1 = a.edge1_pre;
  a.edge2_pre = a.edge1_pre;
  a.edge2 = a.edge1_pre;
  a.edge_logit.assign(plane, 0.0);
}

void Network::load_input(const Image& image, Activations& a) const {
  if (image.height() != size_ || image.width() != size_) {
    throw DataError("analyzer expects " + std::to_string(size_) + "x" + std::to_string(size_) +
                    " images, got " + std::to_string(image.height()) + "x" +
                    std::to_string(image.width()));
  }
  if (a.input.empty()) allocate(a);
  for (std::size_t p = 0; p < image.size(); ++p) set_input_pixel(a, p, image[p]);
}

void Network::set_input_pixel(Activations& a, std::size_t index, std::uint8_t value) const {
  a.input[index] = (static_cast<double>(value) - kMeanOffset) / kMeanScale;
}

void Network::forward_trunk_rows(Activations& a, int row_begin, int row_end) const {
  const Index ix{blocks_};
  const std::size_t plane = static_cast<std::size_t>(size_) * size_;
  const std::size_t pb = static_cast<std::size_t>(row_begin) * size_;
  const std::size_t pe = static_cast<std::size_t>(row_end) * size_;
  conv(layers_[0], a.input, a.trunk[0], row_begin, row_end);
  for (int r = 0; r < blocks_; ++r) {
    elu_rows(a.trunk[r], a.act1[r], channels_, plane, pb, pe);
    conv(layers_[ix.conv1(r)], a.act1[r], a.pre2[r], row_begin, row_end);
    elu_rows(a.pre2[r], a.act2[r], channels_, plane, pb, pe);
    conv(layers_[ix.conv2(r)], a.act2[r], a.res[r], row_begin, row_end);
    add_rows(a.trunk[r], a.res[r], a.trunk[r + 1], channels_, plane, pb, pe);
  }
  elu_rows(a.trunk[blocks_], a.features, channels_, plane, pb, pe);
}

void Network::forward(Activations& a, bool with_edge_branch) const {
  const Index ix{blocks_};
  const std::size_t plane = static_cast<std::size_t>(size_) * size_;
  forward_trunk_rows(a, 0, size_);
  conv(layers_[ix.hidden()], a.features, a.hidden_pre, 0, size_);
  elu_rows(a.hidden_pre, a.hidden, channels_, plane, 0, plane);
  conv(layers_[ix.mixture()], a.hidden, a.mixture, 0, size_);
  if (!with_edge_branch) return;
  conv(layers_[ix.edge1()], a.input, a.edge1_pre, 0, size_);
  elu_rows(a.edge1_pre, a.edge1, edge_channels_, plane, 0, plane);
  conv(layers_[ix.edge2()], a.edge1, a.edge2_pre, 0, size_);
  elu_rows(a.edge2_pre, a.edge2, edge_channels_, plane, 0, plane);
  conv(layers_[ix.edge_out()], a.edge2, a.edge_logit, 0, size_);
  std::vector<double> from_trunk(plane);
  conv(layers_[ix.edge_trunk()], a.features, from_trunk, 0, size_);
  for (std::size_t p = 0; p < plane; ++p) a.edge_logit[p] += from_trunk[p];
}

void Network::mixture_at(const Activations& a, std::size_t pixel, double* logits, double* means,
                         double* log_scales) const {
  const Index ix{blocks_};
  const std::size_t plane = static_cast<std::size_t>(size_) * size_;
  const Layer& hl = layers_[ix.hidden()];
  const Layer& ml = layers_[ix.mixture()];
  // Same accumulation order as the pointwise convolution kernels.
  std::vector<double> hidden(channels_);
  for (int o = 0; o < channels_; ++o) {
    double acc = hl.bias->values[o];
    for (int i = 0; i < channels_; ++i) {
      acc += hl.weight->values[static_cast<std::size_t>(o) * channels_ + i] * a.features[i * plane + pixel];
    }
    hidden[o] = elu(acc);
  }
  const int m3 = 3 * components_;
  for (int o = 0; o < m3; ++o) {
    double acc = ml.bias->values[o];
    for (int i = 0; i < channels_; ++i) {
      acc += ml.weight->values[static_cast<std::size_t>(o) * channels_ + i] * hidden[i];
    }
    if (o < components_) {
      logits[o] = acc;
    } else if (o < 2 * components_) {
      means[o - components_] = kMeanOffset + kMeanScale * acc;
    } else {
      log_scales[o - 2 * components_] = acc;
    }
  }
}

HeadActivations Network::head(const Activations& a) const {
  const std::size_t plane = static_cast<std::size_t>(size_) * size_;
  HeadActivations h = HeadActivations::zeros(size_, size_, components_);
  h.edge_logit = a.edge_logit;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int m = 0; m < components_; ++m) {
      const std::size_t dst = p * components_ + m;
      h.mix_logit[dst] = a.mixture[m * plane + p];
      h.mean[dst] = kMeanOffset + kMeanScale * a.mixture[(components_ + m) * plane + p];
      h.log_scale[dst] = a.mixture[(2 * components_ + m) * plane + p];
    }
  }
  return h;
}

void Network::backward(const Activations& a, const std::vector<double>& d_mixture,
                       const std::vector<double>& d_edge, ModelWeights& grad) const {
  const Index ix{blocks_};
  auto params = [&](const Layer& l, const std::vector<double>& in, const std::vector<double>& dout) {
    auto& gw = grad.at(l.name + ".weight").values;
    std::span<double> gb;
    if (l.bias != nullptr) gb = grad.at(l.name + ".bias").values;
    kernels::parallel::conv_backward_params(l.geometry, in, dout, gw, gb);
  };
  auto back_input = [&](const Layer& l, const std::vector<double>& dout, std::vector<double>& din) {
    din.assign(static_cast<std::size_t>(l.geometry.in_channels) * l.geometry.plane(), 0.0);
    kernels::parallel::conv_backward_input(l.geometry, dout, l.weight->values, din);
  };

  std::vector<double> d_hidden, d_features, tmp;
  params(layers_[ix.mixture()], a.hidden, d_mixture);
  back_input(layers_[ix.mixture()], d_mixture, d_hidden);
  mul_elu_grad(d_hidden, a.hidden_pre);
  params(layers_[ix.hidden()], a.features, d_hidden);
  back_input(layers_[ix.hidden()], d_hidden, d_features);

  params(layers_[ix.edge_trunk()], a.features, d_edge);
  back_input(layers_[ix.edge_trunk()], d_edge, tmp);
  for (std::size_t i = 0; i < d_features.size(); ++i) d_features[i] += tmp[i];

  std::vector<double> d_e2, d_e1;
  params(layers_[ix.edge_out()], a.edge2, d_edge);
  back_input(layers_[ix.edge_out()], d_edge, d_e2);
  mul_elu_grad(d_e2, a.edge2_pre);
  params(layers_[ix.edge2()], a.edge1, d_e2);
  back_input(layers_[ix.edge2()], d_e2, d_e1);
  mul_elu_grad(d_e1, a.edge1_pre);
  params(layers_[ix.edge1()], a.input, d_e1);

  std::vector<double> d_trunk = std::move(d_features);
  mul_elu_grad(d_trunk, a.trunk[blocks_]);
  std::vector<double> d_act2, d_act1;
  for (int r = blocks_ - 1; r >= 0; --r) {
    params(layers_[ix.conv2(r)], a.act2[r], d_trunk);
    back_input(layers_[ix.conv2(r)], d_trunk, d_act2);
    mul_elu_grad(d_act2, a.pre2[r]);
    params(layers_[ix.conv1(r)], a.act1[r], d_act2);
    back_input(layers_[ix.conv1(r)], d_act2, d_act1);
    for (std::size_t i = 0; i < d_trunk.size(); ++i) d_trunk[i] += d_act1[i] * elu_grad(a.trunk[r][i]);
  }
  params(layers_[0], a.input, d_trunk);
}

}  // namespace pixsteg::detail
