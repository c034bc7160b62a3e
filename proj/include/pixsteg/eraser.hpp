#pragma once

#include <vector>

#include "pixsteg/analyzer.hpp"
#include "pixsteg/conditional.hpp"
#include "pixsteg/edge_detect.hpp"
#include "pixsteg/image.hpp"
#include "pixsteg/mixture.hpp"

namespace pixsteg {

enum class EraserMode { kExact, kApproximate };

const char* to_string(EraserMode mode);
EraserMode eraser_mode_from_string(const std::string& name);

struct EraserConfig {
  int epsilon = 1;  // least allowed modification; the largest is 2 * epsilon
  EraserMode mode = EraserMode::kApproximate;
  bool edge_guided = true;  // false pins every budget to epsilon

  void validate() const;
  int max_budget() const { return 2 * epsilon; }
};

struct PixelRange {
  int e_norm;
  int r_min;
  int r_max;
};

// ceil(edge / edge_max * (2eps - eps)) + eps, in [eps, 2eps].
int compute_e_norm(const EdgeMap& edge, int row, int col, const EraserConfig& cfg);

PixelRange adaptive_range(int value, int e_norm);

struct Purified {
  Image image;
  std::vector<int> e_norm;  // budget used at each pixel
};

// Every pixel independently takes the most probable level of the frozen
// distribution inside its range.
Purified purify_approx(const Image& stego, const PixelDistribution& dist, const EdgeMap& edge,
                       const EraserConfig& cfg);

// Raster-order sweep; the conditional is re-queried from the partially
// purified image before each pixel. The edge map stays fixed.
Purified purify_exact(const Image& stego, ConditionalModel& model, const EdgeMap& edge,
                      const EraserConfig& cfg);

// Analyzer-backed entry point: the edge map and (approximate mode) the pixel
// distribution come from one forward pass over the stego image.
Purified purify(const Image& stego, const ModelWeights& weights, const EraserConfig& cfg);

}  // namespace pixsteg
