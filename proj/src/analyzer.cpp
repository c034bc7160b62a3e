#include "pixsteg/analyzer.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>

#include "network.hpp"
#include "pixsteg/format.hpp"
#include "pixsteg/kernels.hpp"

namespace pixsteg {

namespace {

constexpr char kWeightsMagic[8] = {'P', 'X', 'S', 'T', 'G', 'W', 'T', 'S'};

void check_positive(int value, const char* name) {
  if (value < 1) throw DataError(std::string("analyzer config: ") + name + " must be >= 1");
}

}  // namespace

const char* to_string(Optimizer optimizer) {
  return optimizer == Optimizer::kSgd ? "sgd" : "adam";
}

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "adam") return Optimizer::kAdam;
  throw DataError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

void AnalyzerConfig::validate() const {
  if (image_size < kMinImageSide) throw DataError("analyzer config: image_size must be >= 3");
  if (components < 1 || components > 256) {
    throw DataError("analyzer config: components must be in [1, 256]");
  }
  check_positive(hidden_channels, "hidden_channels");
  check_positive(edge_channels, "edge_channels");
  check_positive(batch_size, "batch_size");
  if (residual_blocks < 0) throw DataError("analyzer config: residual_blocks must be >= 0");
  if (epochs < 0) throw DataError("analyzer config: epochs must be >= 0");
  if (!(lambda_image >= 0.0) || !(lambda_edge >= 0.0)) {
    throw DataError("analyzer config: loss weights must be non-negative");
  }
  if (lambda_image == 0.0 && lambda_edge == 0.0) {
    throw DataError("analyzer config: lambda_image and lambda_edge cannot both be zero");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw DataError("analyzer config: learning_rate must be positive");
  }
}

bool AnalyzerConfig::same_architecture(const AnalyzerConfig& other) const {
  return image_size == other.image_size && components == other.components &&
         hidden_channels == other.hidden_channels && residual_blocks == other.residual_blocks &&
         edge_channels == other.edge_channels;
}

Tensor& ModelWeights::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("missing tensor " + name);
  return it->second;
}

const Tensor& ModelWeights::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("missing tensor " + name);
  return it->second;
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors) n += t.values.size();
  return n;
}

ModelWeights ModelWeights::zeros_like() const {
  ModelWeights out;
  out.config = config;
  for (const auto& [name, t] : tensors) {
    out.tensors[name] = Tensor{t.shape, std::vector<double>(t.values.size(), 0.0)};
  }
  return out;
}

bool bitwise_equal(const ModelWeights& a, const ModelWeights& b) {
  if (!a.config.same_architecture(b.config) || a.tensors.size() != b.tensors.size()) return false;
  for (const auto& [name, t] : a.tensors) {
    auto it = b.tensors.find(name);
    if (it == b.tensors.end() || it->second.shape != t.shape ||
        it->second.values.size() != t.values.size()) {
      return false;
    }
    if (std::memcmp(t.values.data(), it->second.values.data(), t.values.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

ModelWeights init_weights(const AnalyzerConfig& cfg) {
  cfg.validate();
  ModelWeights w;
  w.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  for (const auto& spec : detail::layer_specs(cfg)) {
    const auto& g = spec.geometry;
    const double fan_in = static_cast<double>(g.in_channels) * g.taps();
    double bound = std::sqrt(3.0 / fan_in);
    if (spec.name == "head.mixture" || spec.name == "edge.trunk") bound *= 0.1;
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor weight{{static_cast<std::size_t>(g.out_channels), static_cast<std::size_t>(g.in_channels),
                   static_cast<std::size_t>(g.taps())},
                  std::vector<double>(g.weight_count())};
    for (double& v : weight.values) v = dist(rng);
    w.tensors[spec.name + ".weight"] = std::move(weight);
    if (spec.has_bias) {
      w.tensors[spec.name + ".bias"] =
          Tensor{{static_cast<std::size_t>(g.out_channels)},
                 std::vector<double>(static_cast<std::size_t>(g.out_channels), 0.0)};
    }
  }
  // Spread the initial component means over the intensity range and start
  // with scales wide enough that every level has usable gradient.
  auto& bias = w.at("head.mixture.bias").values;
  const int m = cfg.components;
  for (int c = 0; c < m; ++c) {
    bias[m + c] = -1.0 + (2.0 * c + 1.0) / m;
    bias[2 * m + c] = std::log(255.0 / (2.0 * m));
  }
  return w;
}

void zero_mixture_head(ModelWeights& weights) {
  std::ranges::fill(weights.at("head.mixture.weight").values, 0.0);
  std::ranges::fill(weights.at("head.mixture.bias").values, 0.0);
}

HeadActivations forward(const ModelWeights& weights, const Image& image) {
  detail::Network net(weights);
  detail::Activations a;
  net.load_input(image, a);
  net.forward(a, true);
  HeadActivations head = net.head(a);
  head.validate();
  return head;
}

double image_nll(const ModelWeights& weights, const Image& image) {
  const auto logp = pixel_log_prob(forward(weights, image), image);
  double nll = 0.0;
  for (double v : logp) nll -= v;
  if (!std::isfinite(nll)) throw NumericalError("image NLL is not finite");
  return nll;
}

double edge_loss_from_logits(std::span<const double> edge_logits, const EdgeMap& target) {
  if (edge_logits.size() != target.size()) throw DataError("edge_loss: size mismatch");
  double sum = 0.0;
  for (std::size_t p = 0; p < edge_logits.size(); ++p) {
    const double d = target[p] - sigmoid(edge_logits[p]);
    sum += d * d;
  }
  return sum / static_cast<double>(edge_logits.size());
}

double edge_loss(const ModelWeights& weights, const Image& image) {
  return edge_loss_from_logits(forward(weights, image).edge_logit, prewitt(image));
}

EdgeMap predicted_edges(const HeadActivations& head) {
  std::vector<double> probs(head.edge_logit.size());
  for (std::size_t p = 0; p < probs.size(); ++p) probs[p] = sigmoid(head.edge_logit[p]);
  return EdgeMap::normalized(head.height, head.width, std::move(probs));
}

LossReport evaluate_loss(const ModelWeights& weights, const Image& image) {
  const HeadActivations head = forward(weights, image);
  LossReport r;
  for (double v : pixel_log_prob(head, image)) r.image -= v;
  r.edge = edge_loss_from_logits(head.edge_logit, prewitt(image));
  r.total = weights.config.lambda_image * r.image + weights.config.lambda_edge * r.edge;
  return r;
}

LossReport accumulate_gradient(const ModelWeights& weights, const Image& image,
                               ModelWeights& gradient, const EdgeMap* edge_target) {
  const AnalyzerConfig& cfg = weights.config;
  detail::Network net(weights);
  detail::Activations a;
  net.load_input(image, a);
  net.forward(a, true);

  const std::size_t plane = image.size();
  const int m = cfg.components;
  std::vector<double> d_mixture(plane * 3 * m, 0.0);
  std::vector<double> d_edge(plane, 0.0);
  std::vector<double> logits(m), means(m), scales(m), dl(m), dm(m), ds(m);

  LossReport r;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < m; ++c) {
      logits[c] = a.mixture[c * plane + p];
      means[c] = detail::kMeanOffset + detail::kMeanScale * a.mixture[(m + c) * plane + p];
      scales[c] = a.mixture[(2 * m + c) * plane + p];
    }
    r.image -= mixture_log_prob(m, logits.data(), means.data(), scales.data(), image[p], dl.data(),
                                dm.data(), ds.data());
    for (int c = 0; c < m; ++c) {
      d_mixture[c * plane + p] = -cfg.lambda_image * dl[c];
      d_mixture[(m + c) * plane + p] = -cfg.lambda_image * dm[c] * detail::kMeanScale;
      d_mixture[(2 * m + c) * plane + p] = -cfg.lambda_image * ds[c];
    }
  }

  std::optional<EdgeMap> computed;
  if (edge_target == nullptr) computed = prewitt(image);
  const EdgeMap& target = edge_target == nullptr ? *computed : *edge_target;
  r.edge = edge_loss_from_logits(a.edge_logit, target);
  const double n = static_cast<double>(plane);
  for (std::size_t p = 0; p < plane; ++p) {
    const double pe = sigmoid(a.edge_logit[p]);
    d_edge[p] = cfg.lambda_edge * 2.0 * (pe - target[p]) * pe * (1.0 - pe) / n;
  }
  r.total = cfg.lambda_image * r.image + cfg.lambda_edge * r.edge;
  if (!std::isfinite(r.total)) throw NumericalError("loss is not finite");

  net.backward(a, d_mixture, d_edge, gradient);
  return r;
}

namespace {

class AdamState {
 public:
  explicit AdamState(const ModelWeights& w) : m_(w.zeros_like()), v_(w.zeros_like()) {}

  void step(ModelWeights& w, const ModelWeights& g, double lr) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (auto& [name, tensor] : w.tensors) {
      const auto& grad = g.at(name).values;
      auto& m = m_.at(name).values;
      auto& v = v_.at(name).values;
      for (std::size_t i = 0; i < tensor.values.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        tensor.values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
  }

 private:
  ModelWeights m_;
  ModelWeights v_;
  int t_ = 0;
};

void sgd_step(ModelWeights& w, const ModelWeights& g, double lr) {
  for (auto& [name, tensor] : w.tensors) {
    const auto& grad = g.at(name).values;
    for (std::size_t i = 0; i < tensor.values.size(); ++i) tensor.values[i] -= lr * grad[i];
  }
}

bool all_finite(const ModelWeights& g) {
  for (const auto& [name, t] : g.tensors) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

TrainResult train(std::span<const Image> dataset, const AnalyzerConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw DataError("train: dataset is empty");
  for (const Image& img : dataset) {
    if (img.height() != cfg.image_size || img.width() != cfg.image_size) {
      throw DataError("train: every image must be " + std::to_string(cfg.image_size) + "x" +
                      std::to_string(cfg.image_size));
    }
  }

  TrainResult result{init_weights(cfg), {}, {}};
  ModelWeights& weights = result.weights;
  std::vector<EdgeMap> targets;
  targets.reserve(dataset.size());
  for (const Image& img : dataset) targets.push_back(prewitt(img));

  std::seed_seq seq{cfg.seed, std::uint64_t{0x5eedULL}};
  std::mt19937_64 rng(seq);
  AdamState adam(weights);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossReport epoch_sum;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ModelWeights grad = weights.zeros_like();
      LossReport batch;
      try {
        for (std::size_t b = start; b < end; ++b) {
          const LossReport r = accumulate_gradient(weights, dataset[order[b]], grad, &targets[order[b]]);
          batch.total += r.total;
          batch.image += r.image;
          batch.edge += r.edge;
        }
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      epoch_sum.total += batch.total;
      epoch_sum.image += batch.image;
      epoch_sum.edge += batch.edge;
      const double n = static_cast<double>(end - start);
      for (auto& [name, t] : grad.tensors) {
        for (double& v : t.values) v /= n;
      }
      if (!all_finite(grad)) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             ": non-finite gradient");
      }
      result.steps.push_back(LossReport{batch.total / n, batch.image / n, batch.edge / n});
      if (cfg.optimizer == Optimizer::kAdam) {
        adam.step(weights, grad, cfg.learning_rate);
      } else {
        sgd_step(weights, grad, cfg.learning_rate);
      }
    }
    const double n = static_cast<double>(dataset.size());
    const LossReport mean{epoch_sum.total / n, epoch_sum.image / n, epoch_sum.edge / n};
    if (!std::isfinite(mean.total)) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    }
    result.epochs.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

void write_training_log(const std::vector<LossReport>& epochs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write training log " + path.string());
  out << "epoch,L,L_I,L_E\n";
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    out << (e + 1) << ',' << format_double(epochs[e].total) << ',' << format_double(epochs[e].image)
        << ',' << format_double(epochs[e].edge) << '\n';
  }
}

// ---- weights file ----

namespace {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, std::size_t n) {
    if (pos_ + n > size_) {
      throw WeightsFormatError(WeightsFormatError::Kind::kMalformed, "weights file: unexpected end");
    }
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == size_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const unsigned char* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, data, static_cast<uInt>(n)));
}

}  // namespace

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  const AnalyzerConfig& c = weights.config;
  ByteWriter w;
  w.put_bytes(kWeightsMagic, sizeof(kWeightsMagic));
  w.put<std::uint32_t>(ModelWeights::kFormatVersion);
  w.put<std::int32_t>(c.image_size);
  w.put<std::int32_t>(c.components);
  w.put<std::int32_t>(c.hidden_channels);
  w.put<std::int32_t>(c.residual_blocks);
  w.put<std::int32_t>(c.edge_channels);
  w.put<double>(c.lambda_image);
  w.put<double>(c.lambda_edge);
  w.put<double>(c.learning_rate);
  w.put<std::int32_t>(c.batch_size);
  w.put<std::int32_t>(c.epochs);
  w.put<std::uint64_t>(c.seed);
  w.put<std::uint8_t>(c.optimizer == Optimizer::kSgd ? 0 : 1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(weights.tensors.size()));
  for (const auto& [name, t] : weights.tensors) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.put<std::uint64_t>(d);
    w.put_bytes(t.values.data(), t.values.size() * sizeof(double));
  }
  auto& bytes = w.bytes();
  const std::uint32_t crc = checksum(bytes.data(), bytes.size());
  w.put<std::uint32_t>(crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw WeightsFormatError(WeightsFormatError::Kind::kIo, "cannot write weights " + path.string());
  }
}

ModelWeights load_weights(const std::filesystem::path& path) {
  using Kind = WeightsFormatError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsFormatError(Kind::kIo, "cannot open weights " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kWeightsMagic) ||
      std::memcmp(bytes.data(), kWeightsMagic, sizeof(kWeightsMagic)) != 0) {
    throw WeightsFormatError(Kind::kBadMagic, path.string() + " is not a weights file");
  }
  if (bytes.size() < sizeof(kWeightsMagic) + 8) {
    throw WeightsFormatError(Kind::kChecksum, "weights file checksum failure (file too short)");
  }
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof(kWeightsMagic), sizeof(version));
  if (version != ModelWeights::kFormatVersion) {
    throw WeightsFormatError(Kind::kVersionMismatch,
                             "weights format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(ModelWeights::kFormatVersion) + ")");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  if (checksum(bytes.data(), body) != stored) {
    throw WeightsFormatError(Kind::kChecksum, "weights file checksum failure: " + path.string());
  }

  ByteReader r(bytes.data() + sizeof(kWeightsMagic) + sizeof(version),
               body - sizeof(kWeightsMagic) - sizeof(version));
  ModelWeights w;
  AnalyzerConfig& c = w.config;
  c.image_size = r.get<std::int32_t>();
  c.components = r.get<std::int32_t>();
  c.hidden_channels = r.get<std::int32_t>();
  c.residual_blocks = r.get<std::int32_t>();
  c.edge_channels = r.get<std::int32_t>();
  c.lambda_image = r.get<double>();
  c.lambda_edge = r.get<double>();
  c.learning_rate = r.get<double>();
  c.batch_size = r.get<std::int32_t>();
  c.epochs = r.get<std::int32_t>();
  c.seed = r.get<std::uint64_t>();
  c.optimizer = r.get<std::uint8_t>() == 0 ? Optimizer::kSgd : Optimizer::kAdam;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.get<std::uint32_t>(), '\0');
    r.get_bytes(name.data(), name.size());
    Tensor t;
    t.shape.resize(r.get<std::uint32_t>());
    std::size_t n = 1;
    for (auto& d : t.shape) {
      d = static_cast<std::size_t>(r.get<std::uint64_t>());
      n *= d;
    }
    t.values.resize(n);
    r.get_bytes(t.values.data(), n * sizeof(double));
    for (double v : t.values) {
      if (!std::isfinite(v)) throw WeightsFormatError(Kind::kMalformed, "non-finite weight in " + name);
    }
    w.tensors[std::move(name)] = std::move(t);
  }
  if (!r.done()) throw WeightsFormatError(Kind::kMalformed, "weights file has trailing data");
  try {
    c.validate();
    detail::Network check(w);
  } catch (const DataError& e) {
    throw WeightsFormatError(Kind::kMalformed, std::string("inconsistent weights file: ") + e.what());
  }
  return w;
}

ModelWeights load_weights(const std::filesystem::path& path, const AnalyzerConfig& expected) {
  ModelWeights w = load_weights(path);
  if (!w.config.same_architecture(expected)) {
    throw WeightsFormatError(WeightsFormatError::Kind::kConfigMismatch,
                             "weights file architecture does not match the requested config");
  }
  return w;
}

// ---- conditional source for the exact eraser ----

struct AnalyzerConditional::State {
  State(const ModelWeights& w, Recompute m) : weights(w), net(weights), mode(m) {}

  ModelWeights weights;
  detail::Network net;
  Recompute mode;
  detail::Activations acts;
  std::vector<std::uint8_t> cached;
  int valid_rows = 0;
};

AnalyzerConditional::AnalyzerConditional(const ModelWeights& weights, Recompute mode)
    : state_(std::make_unique<State>(weights, mode)) {}

AnalyzerConditional::~AnalyzerConditional() = default;

void AnalyzerConditional::conditional(std::span<const std::uint8_t> pixels, int height, int width,
                                      std::size_t index, std::span<double> probs) {
  State& s = *state_;
  const int size = s.net.height();
  if (height != size || width != size) {
    throw DataError("analyzer expects " + std::to_string(size) + "x" + std::to_string(size) + " images");
  }
  if (s.cached.empty()) {
    s.net.allocate(s.acts);
    s.cached.assign(pixels.begin(), pixels.end());
    for (std::size_t p = 0; p < pixels.size(); ++p) s.net.set_input_pixel(s.acts, p, pixels[p]);
    s.valid_rows = 0;
  } else {
    for (std::size_t p = 0; p < pixels.size(); ++p) {
      if (pixels[p] == s.cached[p]) continue;
      s.cached[p] = pixels[p];
      s.net.set_input_pixel(s.acts, p, pixels[p]);
      s.valid_rows = std::min(s.valid_rows, static_cast<int>(p / width));
    }
  }

  const int m = s.net.config().components;
  std::vector<double> logits(m), means(m), scales(m);
  if (s.mode == Recompute::kFull) {
    s.net.forward(s.acts, false);
    const std::size_t plane = pixels.size();
    for (int c = 0; c < m; ++c) {
      logits[c] = s.acts.mixture[c * plane + index];
      means[c] = detail::kMeanOffset + detail::kMeanScale * s.acts.mixture[(m + c) * plane + index];
      scales[c] = s.acts.mixture[(2 * m + c) * plane + index];
    }
  } else {
    const int target = static_cast<int>(index / width) + 1;
    if (s.valid_rows < target) {
      s.net.forward_trunk_rows(s.acts, s.valid_rows, target);
      s.valid_rows = target;
    }
    s.net.mixture_at(s.acts, index, logits.data(), means.data(), scales.data());
  }
  for (int c = 0; c < m; ++c) {
    if (!std::isfinite(logits[c]) || !std::isfinite(means[c]) || !std::isfinite(scales[c])) {
      throw NumericalError("non-finite analyzer output at pixel " + std::to_string(index));
    }
  }
  kernels::pixel_mixture_pmf(m, logits.data(), means.data(), scales.data(), probs.data());
}

}  // namespace pixsteg
