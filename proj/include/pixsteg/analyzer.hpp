#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pixsteg/conditional.hpp"
#include "pixsteg/edge_detect.hpp"
#include "pixsteg/image.hpp"
#include "pixsteg/mixture.hpp"

namespace pixsteg {

enum class Optimizer { kSgd, kAdam };

const char* to_string(Optimizer optimizer);
Optimizer optimizer_from_string(const std::string& name);

struct AnalyzerConfig {
  int image_size = 32;
  int components = 5;
  int hidden_channels = 32;
  int residual_blocks = 3;
  int edge_channels = 8;
  double lambda_image = 1.0;
  double lambda_edge = 1.0;
  double learning_rate = 2e-3;
  int batch_size = 8;
  int epochs = 20;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kAdam;

  void validate() const;
  // Fields that determine tensor shapes and accepted image size.
  bool same_architecture(const AnalyzerConfig& other) const;
};

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

// Named parameter store. Gradients use the same structure.
struct ModelWeights {
  static constexpr std::uint32_t kFormatVersion = 1;

  AnalyzerConfig config;
  std::map<std::string, Tensor> tensors;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  std::size_t parameter_count() const;
  ModelWeights zeros_like() const;
};

bool bitwise_equal(const ModelWeights& a, const ModelWeights& b);

// Seeded initialization; deterministic for a given config.
ModelWeights init_weights(const AnalyzerConfig& cfg);

// Zeroes the mixture output layer: uniform weights, mean 127.5 and unit scale
// at every pixel regardless of the input.
void zero_mixture_head(ModelWeights& weights);

struct LossReport {
  double total = 0.0;  // lambda_image * image + lambda_edge * edge
  double image = 0.0;  // nats per image
  double edge = 0.0;   // mean squared error
};

// Full forward pass. The mixture parameters at raster index i depend only on
// pixels before i; the edge logits see the whole image.
HeadActivations forward(const ModelWeights& weights, const Image& image);

double image_nll(const ModelWeights& weights, const Image& image);
double edge_loss(const ModelWeights& weights, const Image& image);
// Mean of (target - sigmoid(logit))^2.
double edge_loss_from_logits(std::span<const double> edge_logits, const EdgeMap& target);

// sigmoid(e) normalized by its maximum.
EdgeMap predicted_edges(const HeadActivations& head);

LossReport evaluate_loss(const ModelWeights& weights, const Image& image);

// Adds dL/dtheta for this image into `gradient` (shaped like `weights`) and
// returns the loss. `edge_target` defaults to prewitt(image).
LossReport accumulate_gradient(const ModelWeights& weights, const Image& image,
                               ModelWeights& gradient, const EdgeMap* edge_target = nullptr);

struct TrainResult {
  ModelWeights weights;
  std::vector<LossReport> epochs;  // mean over the epoch's images
  std::vector<LossReport> steps;   // mean over each batch, pre-update
};

using EpochCallback = std::function<void(int epoch, const LossReport&)>;

TrainResult train(std::span<const Image> dataset, const AnalyzerConfig& cfg,
                  const EpochCallback& on_epoch = {});

// CSV with header "epoch,L,L_I,L_E".
void write_training_log(const std::vector<LossReport>& epochs, const std::filesystem::path& path);

class WeightsFormatError : public DataError {
 public:
  enum class Kind { kBadMagic, kVersionMismatch, kChecksum, kConfigMismatch, kMalformed, kIo };

  WeightsFormatError(Kind kind, const std::string& message) : DataError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Weights file layout (little-endian):
//   "PXSTGWTS" | u32 version | config block | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values |
//   u32 CRC-32 of every preceding byte.
// Config block: i32 image_size, components, hidden_channels, residual_blocks,
// edge_channels; f64 lambda_image, lambda_edge, learning_rate; i32 batch_size,
// epochs; u64 seed; u8 optimizer.
void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);
// Also rejects files whose architecture differs from `expected`.
ModelWeights load_weights(const std::filesystem::path& path, const AnalyzerConfig& expected);

enum class Recompute { kIncremental, kFull };

// Conditional source backed by the analyzer. kFull runs the whole forward pass
// per query; kIncremental recomputes only the feature rows invalidated since
// the previous query and gives bit-identical results.
class AnalyzerConditional : public ConditionalModel {
 public:
  AnalyzerConditional(const ModelWeights& weights, Recompute mode);
  ~AnalyzerConditional() override;

  void conditional(std::span<const std::uint8_t> pixels, int height, int width, std::size_t index,
                   std::span<double> probs) override;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace pixsteg
