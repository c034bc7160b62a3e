#include "pixsteg/eraser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pixsteg/kernels.hpp"

namespace pixsteg {

const char* to_string(EraserMode mode) {
  return mode == EraserMode::kExact ? "exact" : "approx";
}

EraserMode eraser_mode_from_string(const std::string& name) {
  if (name == "exact") return EraserMode::kExact;
  if (name == "approx" || name == "approximate") return EraserMode::kApproximate;
  throw DataError("unknown eraser mode '" + name + "' (expected exact or approx)");
}

void EraserConfig::validate() const {
  if (epsilon < 1) throw DataError("eraser epsilon must be >= 1, got " + std::to_string(epsilon));
}

int compute_e_norm(const EdgeMap& edge, int row, int col, const EraserConfig& cfg) {
  if (!cfg.edge_guided) return cfg.epsilon;
  const double ratio = edge.max() > 0.0 ? edge.at(row, col) / edge.max() : 0.0;
  const int extra = static_cast<int>(std::ceil(ratio * (cfg.max_budget() - cfg.epsilon)));
  return std::clamp(extra + cfg.epsilon, cfg.epsilon, cfg.max_budget());
}

PixelRange adaptive_range(int value, int e_norm) {
  return PixelRange{e_norm, std::max(value - e_norm, 0), std::min(value + e_norm, kMaxIntensity)};
}

namespace {

std::vector<int> budgets(const Image& stego, const EdgeMap& edge, const EraserConfig& cfg) {
  if (edge.height() != stego.height() || edge.width() != stego.width()) {
    throw DataError("eraser: edge map and image dimensions differ");
  }
  std::vector<int> out(stego.size());
  for (int r = 0; r < stego.height(); ++r) {
    for (int c = 0; c < stego.width(); ++c) {
      out[static_cast<std::size_t>(r) * stego.width() + c] = compute_e_norm(edge, r, c, cfg);
    }
  }
  return out;
}

}  // namespace

Purified purify_approx(const Image& stego, const PixelDistribution& dist, const EdgeMap& edge,
                       const EraserConfig& cfg) {
  cfg.validate();
  if (dist.height() != stego.height() || dist.width() != stego.width()) {
    throw DataError("eraser: distribution and image dimensions differ");
  }
  std::vector<int> e_norm = budgets(stego, edge, cfg);
  std::vector<std::uint8_t> out(stego.size());
  kernels::parallel::restricted_argmax(dist.probs(), stego.pixels(), e_norm, out);
  return Purified{Image(stego.height(), stego.width(), std::move(out)), std::move(e_norm)};
}

Purified purify_exact(const Image& stego, ConditionalModel& model, const EdgeMap& edge,
                      const EraserConfig& cfg) {
  cfg.validate();
  std::vector<int> e_norm = budgets(stego, edge, cfg);
  std::vector<std::uint8_t> current(stego.pixels().begin(), stego.pixels().end());
  std::vector<double> probs(kPixelLevels);
  for (std::size_t p = 0; p < current.size(); ++p) {
    model.conditional(current, stego.height(), stego.width(), p, probs);
    for (double v : probs) {
      if (!std::isfinite(v)) throw NumericalError("non-finite conditional at pixel " + std::to_string(p));
    }
    current[p] = kernels::pixel_restricted_argmax(probs.data(), current[p], e_norm[p]);
  }
  return Purified{Image(stego.height(), stego.width(), std::move(current)), std::move(e_norm)};
}

Purified purify(const Image& stego, const ModelWeights& weights, const EraserConfig& cfg) {
  cfg.validate();
  const HeadActivations head = forward(weights, stego);
  const EdgeMap edge = predicted_edges(head);
  if (cfg.mode == EraserMode::kApproximate) {
    return purify_approx(stego, to_pixel_distribution(head), edge, cfg);
  }
  AnalyzerConditional model(weights, Recompute::kIncremental);
  return purify_exact(stego, model, edge, cfg);
}

}  // namespace pixsteg
