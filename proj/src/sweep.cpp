#include "pixsteg/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pixsteg/baselines.hpp"
#include "pixsteg/eraser.hpp"
#include "pixsteg/format.hpp"
#include "pixsteg/metrics.hpp"
#include "pixsteg/stego_lsb.hpp"

namespace pixsteg {

namespace {

constexpr Method kAllMethods[] = {Method::kOursApprox, Method::kOursExact, Method::kGaussian,
                                  Method::kMedian, Method::kWiener};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Shared per-image state, computed once before the cell loop.
struct Prepared {
  Image stego;
  Image decoded_original;
  std::optional<HeadActivations> head;
  std::optional<EdgeMap> edge;
};

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

void record_budget(CellResult& cell, const Image& stego, const Purified& out, const EraserConfig& cfg) {
  cell.e_norm_min = *std::min_element(out.e_norm.begin(), out.e_norm.end());
  cell.e_norm_max = *std::max_element(out.e_norm.begin(), out.e_norm.end());
  for (std::size_t p = 0; p < stego.size(); ++p) {
    const int change = std::abs(int(out.image[p]) - int(stego[p]));
    const int e = out.e_norm[p];
    bool bad = change > cfg.max_budget() || change > e || e < cfg.epsilon || e > cfg.max_budget();
    if (!cfg.edge_guided && e != cfg.epsilon) bad = true;
    if (bad) ++cell.budget_violations;
  }
}

Image attack(const SweepConfig& cfg, const Prepared& prep, const ModelWeights* weights, Method method,
             int epsilon, std::uint64_t seed, CellResult& cell) {
  switch (method) {
    case Method::kOursApprox:
    case Method::kOursExact: {
      EraserConfig ecfg;
      ecfg.epsilon = epsilon;
      ecfg.edge_guided = cfg.edge_guided;
      ecfg.mode = method == Method::kOursExact ? EraserMode::kExact : EraserMode::kApproximate;
      Purified out = [&] {
        if (ecfg.mode == EraserMode::kApproximate) {
          return purify_approx(prep.stego, to_pixel_distribution(*prep.head), *prep.edge, ecfg);
        }
        AnalyzerConditional model(*weights, Recompute::kIncremental);
        return purify_exact(prep.stego, model, *prep.edge, ecfg);
      }();
      record_budget(cell, prep.stego, out, ecfg);
      return out.image;
    }
    case Method::kGaussian:
      return gaussian_noise(prep.stego, epsilon, seed);
    case Method::kMedian:
      return median_filter(prep.stego, cfg.window);
    case Method::kWiener:
      return wiener_restore(prep.stego, cfg.window);
  }
  throw DataError("unknown method");
}

std::vector<CellAggregate> aggregate(const SweepConfig& cfg, const std::vector<CellResult>& cells) {
  std::vector<CellAggregate> out;
  for (Method m : cfg.methods) {
    for (int eps : cfg.epsilons) {
      std::vector<double> pc, ps, ss, dc, dt, ms;
      std::size_t failed = 0;
      for (const auto& c : cells) {
        if (c.method != m || c.epsilon != eps) continue;
        if (!c.ok) {
          ++failed;
          continue;
        }
        pc.push_back(c.psnr_cover_purified);
        ps.push_back(c.psnr_stego_purified);
        ss.push_back(c.ssim);
        dc.push_back(c.decoded_rate);
        dt.push_back(c.destruction_rate);
        ms.push_back(c.wall_time_ms);
      }
      out.push_back(CellAggregate{m, eps, pc.size(), failed, stat_of(pc), stat_of(ps), stat_of(ss),
                                  stat_of(dc), stat_of(dt), stat_of(ms)});
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kOursApprox: return "ours-approx";
    case Method::kOursExact: return "ours-exact";
    case Method::kGaussian: return "gaussian";
    case Method::kMedian: return "median";
    case Method::kWiener: return "wiener";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : kAllMethods) {
    if (name == to_string(m)) return m;
  }
  throw DataError("unknown method '" + name + "'");
}

bool uses_analyzer(Method method) {
  return method == Method::kOursApprox || method == Method::kOursExact;
}

void SweepConfig::validate() const {
  if (epsilons.empty()) throw DataError("sweep: empty epsilon list");
  if (methods.empty()) throw DataError("sweep: empty method list");
  LsbConfig{lsb_bits}.validate();
  const bool analyzer = std::any_of(methods.begin(), methods.end(), uses_analyzer);
  for (int eps : epsilons) {
    if (eps < 0) throw DataError("sweep: epsilon must be nonnegative");
    if (eps == 0 && analyzer) throw DataError("sweep: eraser methods need epsilon >= 1");
  }
  if (window < 1 || window % 2 == 0) throw DataError("sweep: window must be odd and positive");
  if (threads < 0) throw DataError("sweep: threads must be >= 0");
}

const CellAggregate& RunReport::aggregate(Method method, int epsilon) const {
  for (const auto& a : aggregates) {
    if (a.method == method && a.epsilon == epsilon) return a;
  }
  throw DataError(std::string("no aggregate for ") + to_string(method) + " at epsilon " +
                  std::to_string(epsilon));
}

std::size_t RunReport::budget_violations() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.budget_violations;
  return n;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& image, Method method, int epsilon) {
  std::uint64_t h = fnv1a(image, 0xcbf29ce484222325ULL);
  h = splitmix(h ^ splitmix(seed));
  h = splitmix(h ^ static_cast<std::uint64_t>(method));
  return splitmix(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(epsilon)));
}

RunReport run_sweep(const SweepConfig& cfg, const std::vector<CorpusPair>& pairs,
                    const std::optional<ModelWeights>& weights) {
  cfg.validate();
  if (pairs.empty()) throw DataError("sweep: empty dataset");
  const bool analyzer = std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_analyzer);
  if (analyzer && !weights) throw DataError("sweep: eraser methods need trained weights");
  const LsbConfig lsb{cfg.lsb_bits};
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

  const std::size_t n_images = pairs.size();
  std::vector<std::optional<Prepared>> prepared(n_images);
  std::vector<std::string> prep_error(n_images);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < n_images; ++i) {
    try {
      Prepared p{embed(pairs[i].cover, pairs[i].secret, lsb), Image::filled(3, 3, 0), std::nullopt,
                 std::nullopt};
      p.decoded_original = extract(p.stego, lsb);
      if (analyzer) {
        p.head = forward(*weights, p.stego);
        p.edge = predicted_edges(*p.head);
      }
      prepared[i] = std::move(p);
    } catch (const std::exception& e) {
      prep_error[i] = e.what();
    }
  }

  const std::size_t per_image = cfg.methods.size() * cfg.epsilons.size();
  std::vector<CellResult> cells(n_images * per_image);
  const auto n_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t idx = 0; idx < n_cells; ++idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / per_image;
    const std::size_t rest = static_cast<std::size_t>(idx) % per_image;
    CellResult& cell = cells[static_cast<std::size_t>(idx)];
    cell.image = pairs[i].name;
    cell.method = cfg.methods[rest / cfg.epsilons.size()];
    cell.epsilon = cfg.epsilons[rest % cfg.epsilons.size()];
    if (!prepared[i]) {
      cell.error = prep_error[i];
      continue;
    }
    const Prepared& prep = *prepared[i];
    const auto start = Clock::now();
    try {
      const std::uint64_t seed = cell_seed(cfg.seed, cell.image, cell.method, cell.epsilon);
      const Image purified =
          attack(cfg, prep, weights ? &*weights : nullptr, cell.method, cell.epsilon, seed, cell);
      const Image decoded = extract(purified, lsb);
      cell.psnr_cover_purified = psnr(pairs[i].cover, purified);
      cell.psnr_stego_purified = psnr(prep.stego, purified);
      cell.ssim = ssim(prep.stego, purified);
      cell.decoded_rate = decoded_rate(pairs[i].secret, decoded);
      cell.destruction_rate = destruction_rate(prep.decoded_original, decoded);
      for (std::size_t p = 0; p < purified.size(); ++p) {
        cell.max_abs_change = std::max(cell.max_abs_change, std::abs(int(purified[p]) - int(prep.stego[p])));
      }
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.wall_time_ms = elapsed_ms(start);
  }

  RunReport report;
  report.edge_guided = cfg.edge_guided;
  report.aggregates = aggregate(cfg, cells);
  report.cells = std::move(cells);
  return report;
}

namespace {

std::optional<ModelWeights> load_if_needed(const SweepConfig& cfg) {
  if (!std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_analyzer)) return std::nullopt;
  if (cfg.weights.empty()) throw DataError("sweep: eraser methods need a weights path");
  return load_weights(cfg.weights);
}

}  // namespace

RunReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto pairs = read_corpus(cfg.dataset);
  const auto weights = load_if_needed(cfg);
  RunReport report = run_sweep(cfg, pairs, weights);
  if (!cfg.output_csv.empty()) {
    write_cells_csv(report, cfg.output_csv);
    write_timing_csv(report, sidecar_path(cfg.output_csv, "timing"));
    write_summary_csv(report, sidecar_path(cfg.output_csv, "summary"));
  }
  return report;
}

AblationReport run_ablation_no_edge(const SweepConfig& cfg, const std::vector<CorpusPair>& pairs,
                                    const ModelWeights& weights) {
  SweepConfig guided = cfg;
  guided.edge_guided = true;
  SweepConfig unguided = cfg;
  unguided.edge_guided = false;
  return AblationReport{run_sweep(guided, pairs, weights), run_sweep(unguided, pairs, weights)};
}

AblationReport run_ablation_no_edge(const SweepConfig& cfg) {
  cfg.validate();
  const auto pairs = read_corpus(cfg.dataset);
  if (cfg.weights.empty()) throw DataError("ablate: a weights path is required");
  const ModelWeights weights = load_weights(cfg.weights);
  AblationReport report = run_ablation_no_edge(cfg, pairs, weights);
  if (!cfg.output_csv.empty()) {
    write_ablation_csv(report, cfg.output_csv);
    write_cells_csv(report.guided, sidecar_path(cfg.output_csv, "guided"));
    write_cells_csv(report.unguided, sidecar_path(cfg.output_csv, "unguided"));
  }
  return report;
}

std::string cells_csv(const RunReport& report) {
  std::ostringstream out;
  out << "image,method,epsilon,edge_guided,status,psnr_cover_purified,psnr_stego_purified,ssim,"
         "decoded_rate,destruction_rate,max_abs_change,e_norm_min,e_norm_max,budget_violations,error\n";
  for (const auto& c : report.cells) {
    std::string error = c.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << c.image << ',' << to_string(c.method) << ',' << c.epsilon << ',' << (report.edge_guided ? 1 : 0)
        << ',' << (c.ok ? "ok" : "error") << ',' << format_double(c.psnr_cover_purified) << ','
        << format_double(c.psnr_stego_purified) << ',' << format_double(c.ssim) << ','
        << format_double(c.decoded_rate) << ',' << format_double(c.destruction_rate) << ','
        << c.max_abs_change << ',' << c.e_norm_min << ',' << c.e_norm_max << ',' << c.budget_violations
        << ',' << error << '\n';
  }
  return out.str();
}

void write_cells_csv(const RunReport& report, const std::filesystem::path& path) {
  write_text(path, cells_csv(report));
}

void write_timing_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "image,method,epsilon,wall_time_ms\n";
  for (const auto& c : report.cells) {
    out << c.image << ',' << to_string(c.method) << ',' << c.epsilon << ',' << format_double(c.wall_time_ms)
        << '\n';
  }
  write_text(path, out.str());
}

void write_summary_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "method,epsilon,count,failed,psnr_cover_purified_mean,psnr_cover_purified_std,"
         "psnr_stego_purified_mean,psnr_stego_purified_std,ssim_mean,ssim_std,decoded_rate_mean,"
         "decoded_rate_std,destruction_rate_mean,destruction_rate_std\n";
  for (const auto& a : report.aggregates) {
    out << to_string(a.method) << ',' << a.epsilon << ',' << a.count << ',' << a.failed;
    for (const Stat* s : {&a.psnr_cover_purified, &a.psnr_stego_purified, &a.ssim, &a.decoded_rate,
                          &a.destruction_rate}) {
      out << ',' << format_double(s->mean) << ',' << format_double(s->std);
    }
    out << '\n';
  }
  write_text(path, out.str());
}

void write_ablation_csv(const AblationReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "method,epsilon,guided_destruction_rate,unguided_destruction_rate,guided_decoded_rate,"
         "unguided_decoded_rate,guided_psnr_stego_purified,unguided_psnr_stego_purified\n";
  for (const auto& g : report.guided.aggregates) {
    const auto& u = report.unguided.aggregate(g.method, g.epsilon);
    out << to_string(g.method) << ',' << g.epsilon << ',' << format_double(g.destruction_rate.mean) << ','
        << format_double(u.destruction_rate.mean) << ',' << format_double(g.decoded_rate.mean) << ','
        << format_double(u.decoded_rate.mean) << ',' << format_double(g.psnr_stego_purified.mean) << ','
        << format_double(u.psnr_stego_purified.mean) << '\n';
  }
  write_text(path, out.str());
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv, const std::string& tag) {
  std::filesystem::path out = csv;
  out.replace_extension("." + tag + ".csv");
  return out;
}

TimingReport time_modes(const std::vector<CorpusPair>& pairs, const ModelWeights& weights, int epsilon,
                        int lsb_bits) {
  if (pairs.empty()) throw DataError("time: empty dataset");
  const LsbConfig lsb{lsb_bits};
  lsb.validate();
  TimingReport report{epsilon, {}, 0.0, 0.0};
  EraserConfig cfg;
  cfg.epsilon = epsilon;
  cfg.validate();
  for (const auto& pair : pairs) {
    const Image stego = embed(pair.cover, pair.secret, lsb);
    cfg.mode = EraserMode::kApproximate;
    auto start = Clock::now();
    const Purified approx = purify(stego, weights, cfg);
    const double approx_ms = elapsed_ms(start);
    cfg.mode = EraserMode::kExact;
    start = Clock::now();
    const Purified exact = purify(stego, weights, cfg);
    const double exact_ms = elapsed_ms(start);
    std::size_t differing = 0;
    double abs_sum = 0.0;
    for (std::size_t p = 0; p < stego.size(); ++p) {
      const int d = std::abs(int(approx.image[p]) - int(exact.image[p]));
      differing += d != 0;
      abs_sum += d;
    }
    report.rows.push_back(ModeTiming{pair.name, approx_ms, exact_ms, differing,
                                     abs_sum / static_cast<double>(stego.size()),
                                     decoded_rate(pair.secret, extract(approx.image, lsb)),
                                     decoded_rate(pair.secret, extract(exact.image, lsb))});
  }
  auto median = [&](auto field) {
    std::vector<double> xs;
    for (const auto& r : report.rows) xs.push_back(r.*field);
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  };
  report.median_approx_ms = median(&ModeTiming::approx_ms);
  report.median_exact_ms = median(&ModeTiming::exact_ms);
  return report;
}

void write_timing_report(const TimingReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "image,epsilon,approx_ms,exact_ms,differing_pixels,mean_abs_diff,decoded_rate_approx,"
         "decoded_rate_exact\n";
  for (const auto& r : report.rows) {
    out << r.image << ',' << report.epsilon << ',' << format_double(r.approx_ms) << ','
        << format_double(r.exact_ms) << ',' << r.differing_pixels << ',' << format_double(r.mean_abs_diff)
        << ',' << format_double(r.decoded_rate_approx) << ',' << format_double(r.decoded_rate_exact) << '\n';
  }
  out << "median,," << format_double(report.median_approx_ms) << ',' << format_double(report.median_exact_ms)
      << ",,,,\n";
  write_text(path, out.str());
}

}  // namespace pixsteg
