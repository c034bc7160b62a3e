#pragma once

// Scalar discretized-logistic math shared by the mixture transformer, the
// analyzer loss and the distribution kernels. Every caller goes through these
// helpers so probabilities agree bit for bit across code paths.

#include <algorithm>
#include <cmath>
#include <span>

namespace pixsteg {

inline constexpr int kPixelLevels = 256;
inline constexpr double kScaleFloor = 1e-5;
inline constexpr double kProbabilityFloor = 1e-12;

// sigma(z) and sigma(-z) from a single exp, accurate in both tails.
struct EdgeSigmoid {
  double below;  // mass to the left of the bin edge
  double above;  // mass to the right of the bin edge
};

inline EdgeSigmoid edge_sigmoid(double z) {
  const double t = std::exp(-std::fabs(z));
  const double big = 1.0 / (1.0 + t);
  const double small = t / (1.0 + t);
  return z >= 0.0 ? EdgeSigmoid{big, small} : EdgeSigmoid{small, big};
}

inline double sigmoid(double z) { return edge_sigmoid(z).below; }

inline bool scale_is_floored(double log_scale) { return std::exp(log_scale) < kScaleFloor; }

inline double inverse_scale(double log_scale) {
  return 1.0 / std::max(std::exp(log_scale), kScaleFloor);
}

// Standardized position of the upper edge of bin k (k + 0.5 on the raw grid).
inline double upper_edge(int k, double mean, double inv_scale) {
  return (static_cast<double>(k) + 0.5 - mean) * inv_scale;
}

// Probability of bin k given both edge sigmoids. Bins entirely above the mean
// are differenced in the right tail so small masses keep their precision.
inline double bin_mass(int k, const EdgeSigmoid& lower, double lower_z, const EdgeSigmoid& upper) {
  if (k == 0) return upper.below;
  if (k == kPixelLevels - 1) return lower.above;
  if (lower_z > 0.0) return lower.above - upper.above;
  return upper.below - lower.below;
}

inline double bin_probability(int k, double mean, double log_scale) {
  const double inv = inverse_scale(log_scale);
  const double zl = k > 0 ? upper_edge(k - 1, mean, inv) : 0.0;
  const double zu = k < kPixelLevels - 1 ? upper_edge(k, mean, inv) : 0.0;
  return bin_mass(k, edge_sigmoid(zl), zl, edge_sigmoid(zu));
}

struct BinGradient {
  double probability;
  double d_mean;
  double d_log_scale;
};

inline BinGradient bin_probability_with_grad(int k, double mean, double log_scale) {
  const double inv = inverse_scale(log_scale);
  const bool floored = scale_is_floored(log_scale);
  const double zl = k > 0 ? upper_edge(k - 1, mean, inv) : 0.0;
  const double zu = k < kPixelLevels - 1 ? upper_edge(k, mean, inv) : 0.0;
  const EdgeSigmoid lo = edge_sigmoid(zl);
  const EdgeSigmoid hi = edge_sigmoid(zu);
  // d sigma(z) / dz at each edge; absent edges contribute nothing.
  const double dhi = k < kPixelLevels - 1 ? hi.below * hi.above : 0.0;
  const double dlo = k > 0 ? lo.below * lo.above : 0.0;
  BinGradient g{};
  g.probability = bin_mass(k, lo, zl, hi);
  g.d_mean = -inv * (dhi - dlo);
  g.d_log_scale = floored ? 0.0 : -(zu * dhi) + zl * dlo;
  return g;
}

// Numerically stable softmax of `logits` into `out` (same length).
inline void softmax(std::span<const double> logits, std::span<double> out) {
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  double total = 0.0;
  for (std::size_t m = 0; m < logits.size(); ++m) {
    out[m] = std::exp(logits[m] - peak);
    total += out[m];
  }
  for (double& v : out) v /= total;
}

}  // namespace pixsteg
