#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pixsteg/analyzer.hpp"
#include "pixsteg/corpus.hpp"

namespace pixsteg {

enum class Method { kOursApprox, kOursExact, kGaussian, kMedian, kWiener };

const char* to_string(Method method);
Method method_from_string(const std::string& name);
bool uses_analyzer(Method method);

struct SweepConfig {
  std::vector<int> epsilons{1, 2, 4, 8};
  std::vector<Method> methods{Method::kOursApprox, Method::kGaussian, Method::kMedian, Method::kWiener};
  int lsb_bits = 4;
  std::filesystem::path dataset;
  std::filesystem::path weights;
  std::filesystem::path output_csv;
  std::uint64_t seed = 1;
  bool edge_guided = true;
  int window = 3;   // median / wiener
  int threads = 0;  // 0: OpenMP default

  // Epsilon 0 is accepted only for the baselines (an identity attack for gaussian).
  void validate() const;
};

struct CellResult {
  std::string image;
  Method method = Method::kGaussian;
  int epsilon = 0;
  bool ok = false;
  std::string error;
  double psnr_cover_purified = 0.0;
  double psnr_stego_purified = 0.0;
  double ssim = 0.0;  // stego vs purified
  double decoded_rate = 0.0;
  double destruction_rate = 0.0;
  double wall_time_ms = 0.0;
  int max_abs_change = 0;
  // Eraser instrumentation; left at -1 for the baselines.
  int e_norm_min = -1;
  int e_norm_max = -1;
  std::size_t budget_violations = 0;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct CellAggregate {
  Method method;
  int epsilon;
  std::size_t count;   // successful cells
  std::size_t failed;
  Stat psnr_cover_purified;
  Stat psnr_stego_purified;
  Stat ssim;
  Stat decoded_rate;
  Stat destruction_rate;
  Stat wall_time_ms;
};

struct RunReport {
  bool edge_guided = true;
  std::vector<CellResult> cells;  // image-major, then method, then epsilon
  std::vector<CellAggregate> aggregates;

  const CellAggregate& aggregate(Method method, int epsilon) const;
  std::size_t budget_violations() const;
};

// Stable per-cell stream: depends only on (seed, image, method, epsilon).
std::uint64_t cell_seed(std::uint64_t seed, const std::string& image, Method method, int epsilon);

// In-memory sweep. `weights` may be empty when no analyzer method is configured.
RunReport run_sweep(const SweepConfig& cfg, const std::vector<CorpusPair>& pairs,
                    const std::optional<ModelWeights>& weights);
// Loads dataset and weights from the configured paths and writes the CSVs
// when output_csv is set.
RunReport run_sweep(const SweepConfig& cfg);

struct AblationReport {
  RunReport guided;
  RunReport unguided;
};

AblationReport run_ablation_no_edge(const SweepConfig& cfg, const std::vector<CorpusPair>& pairs,
                                    const ModelWeights& weights);
AblationReport run_ablation_no_edge(const SweepConfig& cfg);

// Per-cell rows; deterministic under a fixed seed (no timing columns).
void write_cells_csv(const RunReport& report, const std::filesystem::path& path);
std::string cells_csv(const RunReport& report);
// image,method,epsilon,wall_time_ms
void write_timing_csv(const RunReport& report, const std::filesystem::path& path);
// Per (method, epsilon) mean and std.
void write_summary_csv(const RunReport& report, const std::filesystem::path& path);
// method,epsilon,guided_destruction,unguided_destruction,guided_decoded,unguided_decoded,...
void write_ablation_csv(const AblationReport& report, const std::filesystem::path& path);

// Sidecar paths derived from the main CSV: foo.csv -> foo.timing.csv, foo.summary.csv.
std::filesystem::path sidecar_path(const std::filesystem::path& csv, const std::string& tag);

struct ModeTiming {
  std::string image;
  double approx_ms;
  double exact_ms;
  std::size_t differing_pixels;
  double mean_abs_diff;  // between the two purified images, in levels
  double decoded_rate_approx;
  double decoded_rate_exact;
};

struct TimingReport {
  int epsilon;
  std::vector<ModeTiming> rows;
  double median_approx_ms;
  double median_exact_ms;
};

// Serial wall-clock comparison of the two eraser modes.
TimingReport time_modes(const std::vector<CorpusPair>& pairs, const ModelWeights& weights, int epsilon,
                        int lsb_bits);
void write_timing_report(const TimingReport& report, const std::filesystem::path& path);

}  // namespace pixsteg
