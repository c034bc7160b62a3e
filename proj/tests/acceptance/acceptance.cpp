// End-to-end acceptance run. Prints one [PASS]/[FAIL] line per criterion and
// exits non-zero if any criterion fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "pixsteg/analyzer.hpp"
#include "pixsteg/corpus.hpp"
#include "pixsteg/eraser.hpp"
#include "pixsteg/metrics.hpp"
#include "pixsteg/mixture.hpp"
#include "pixsteg/stego_lsb.hpp"
#include "pixsteg/sweep.hpp"

using namespace pixsteg;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::map<int, Outcome> outcomes;
std::size_t sweep_budget_violations = 0;
std::size_t sweep_eraser_cells = 0;
std::size_t sweep_range_violations = 0;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

void run(int id, const std::function<Outcome()>& body) {
  std::fprintf(stderr, "criterion %d ...\n", id);
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = Outcome{false, std::string("exception: ") + e.what()};
  }
  o.seconds = seconds_since(start);
  std::fprintf(stderr, "criterion %d %s (%.1f s): %s\n", id, o.pass ? "pass" : "FAIL", o.seconds, o.detail.c_str());
  outcomes[id] = o;
}

Image random_image(int h, int w, std::mt19937_64& rng) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng());
  return Image(h, w, std::move(px));
}

// Budget instrumentation shared by every sweep in this run.
void audit(const RunReport& r) {
  for (const auto& c : r.cells) {
    if (!uses_analyzer(c.method) || !c.ok) continue;
    ++sweep_eraser_cells;
    sweep_budget_violations += c.budget_violations;
    if (c.max_abs_change > 2 * c.epsilon) ++sweep_budget_violations;
    if (c.e_norm_min < c.epsilon || c.e_norm_max > 2 * c.epsilon) ++sweep_range_violations;
  }
}

bool all_ok(const RunReport& r) {
  return std::all_of(r.cells.begin(), r.cells.end(), [](const CellResult& c) { return c.ok; });
}

AnalyzerConfig desk_config(int size) {
  AnalyzerConfig cfg;
  cfg.image_size = size;
  cfg.components = 5;
  cfg.hidden_channels = 32;
  cfg.residual_blocks = 3;
  cfg.edge_channels = 8;
  cfg.epochs = 10;
  cfg.batch_size = 8;
  cfg.learning_rate = 2e-3;
  cfg.seed = 1;
  return cfg;
}

ModelWeights train_on(const std::vector<Image>& covers, const AnalyzerConfig& cfg, const char* tag) {
  const auto start = Clock::now();
  const TrainResult r = train(covers, cfg, [&](int epoch, const LossReport& l) {
    std::fprintf(stderr, "  [%s] epoch %d  L=%.3f  L_I=%.3f  L_E=%.5f\n", tag, epoch, l.total, l.image, l.edge);
  });
  std::fprintf(stderr, "  [%s] trained on %zu images in %.1f s\n", tag, covers.size(), seconds_since(start));
  return r.weights;
}

}  // namespace

int main() {
  const std::filesystem::path out_dir = "acceptance_out";
  std::filesystem::create_directories(out_dir);

  run(1, [] {
    std::mt19937_64 rng(101);
    int exact = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      const int h = 3 + static_cast<int>(rng() % 30), w = 3 + static_cast<int>(rng() % 30);
      const LsbConfig cfg{1 + static_cast<int>(rng() % 8)};
      const Image cover = random_image(h, w, rng);
      const Image secret = random_image(h, w, rng);
      exact += extract(embed(cover, secret, cfg), cfg) == quantize_to_top_bits(secret, cfg);
    }
    return Outcome{exact == trials, fmt("%d/%d triples round-trip exactly", exact, trials)};
  });
  outcomes[1].pass = outcomes[1].pass && outcomes[1].seconds < 5.0;

  run(2, [] {
    std::mt19937_64 rng(102);
    double worst_sum = 0.0;
    std::size_t non_monotone = 0, negative = 0;
    for (int t = 0; t < 100; ++t) {
      const int m = 1 + static_cast<int>(rng() % 8);
      HeadActivations head = HeadActivations::zeros(8, 8, m);
      std::uniform_real_distribution<double> logit(-6, 6), mean(-40, 295), scale(-8, 6);
      for (auto& v : head.mix_logit) v = logit(rng);
      for (auto& v : head.mean) v = mean(rng);
      for (auto& v : head.log_scale) v = scale(rng);
      const PixelDistribution d = to_pixel_distribution(head);
      for (std::size_t p = 0; p < d.pixels(); ++p) {
        double cdf = 0.0;
        for (double v : d.at(p)) {
          negative += v < 0.0;
          const double next = cdf + v;
          non_monotone += next < cdf;
          cdf = next;
        }
        worst_sum = std::max(worst_sum, std::fabs(cdf - 1.0));
      }
    }
    return Outcome{worst_sum <= 1e-6 && non_monotone == 0 && negative == 0,
                   fmt("max |sum - 1| = %.3g, non-monotone steps %zu, negative entries %zu", worst_sum,
                       non_monotone, negative)};
  });
  outcomes[2].pass = outcomes[2].pass && outcomes[2].seconds < 10.0;

  run(3, [] {
    AnalyzerConfig cfg;
    cfg.image_size = 8;
    cfg.components = 2;
    cfg.hidden_channels = 4;
    cfg.residual_blocks = 1;
    cfg.edge_channels = 2;
    cfg.seed = 103;
    ModelWeights w = init_weights(cfg);
    std::mt19937_64 rng(103);
    std::normal_distribution<double> jitter(0.0, 0.2);
    for (auto& [name, t] : w.tensors) {
      for (double& v : t.values) v += jitter(rng);
    }
    const Image img = random_image(8, 8, rng);
    ModelWeights grad = w.zeros_like();
    accumulate_gradient(w, img, grad);
    const double h = 1e-6;
    double diff = 0, na = 0, nn = 0;
    for (auto& [name, t] : w.tensors) {
      const auto& analytic = grad.at(name).values;
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        const double keep = t.values[i];
        t.values[i] = keep + h;
        const double up = evaluate_loss(w, img).total;
        t.values[i] = keep - h;
        const double down = evaluate_loss(w, img).total;
        t.values[i] = keep;
        const double fd = (up - down) / (2 * h);
        diff += (fd - analytic[i]) * (fd - analytic[i]);
        na += analytic[i] * analytic[i];
        nn += fd * fd;
      }
    }
    const double rel = std::sqrt(diff) / (std::sqrt(na) + std::sqrt(nn));

    // Two-parameter toy: one logistic component, gradient in (mu, log s).
    double toy_worst = 0.0;
    const double zero = 0.0;
    for (int k : {0, 60, 128, 200, 255}) {
      for (double mu : {30.0, 127.2, 220.0}) {
        for (double s : {0.0, 1.5, 3.0}) {
          double dl, dm, ds;
          mixture_log_prob(1, &zero, &mu, &s, k, &dl, &dm, &ds);
          auto f = [&](double m_, double s_) { return mixture_log_prob(1, &zero, &m_, &s_, k); };
          const double e = 1e-5;
          const double fm = (f(mu + e, s) - f(mu - e, s)) / (2 * e);
          const double fs = (f(mu, s + e) - f(mu, s - e)) / (2 * e);
          const double r = std::hypot(dm - fm, ds - fs) / std::max(std::hypot(dm, ds) + std::hypot(fm, fs), 1e-12);
          toy_worst = std::max(toy_worst, r);
        }
      }
    }
    return Outcome{rel < 1e-4 && toy_worst < 1e-4,
                   fmt("8x8 network: relative error %.3g over %zu parameters; toy (mu, s): worst %.3g", rel,
                       w.parameter_count(), toy_worst)};
  });
  outcomes[3].pass = outcomes[3].pass && outcomes[3].seconds < 60.0;

  run(6, [] {
    std::mt19937_64 rng(106);
    int ok = 0;
    for (int t = 0; t < 200; ++t) {
      const Image a = random_image(8, 8, rng);
      const Image b = random_image(8, 8, rng);
      ok += decoded_rate(a, a) == 1.0 && destruction_rate(a, a) == 0.0 &&
            destruction_rate(a, b) == 1.0 - decoded_rate(a, b);
    }
    return Outcome{ok == 200, fmt("%d/200 pairs satisfy all three identities exactly", ok)};
  });

  // Desk-scale analyzers: 16x16 for causality, exact-mode and determinism
  // runs; 32x32 for the end-to-end comparison.
  const auto t16 = Clock::now();
  const ModelWeights model16 =
      train_on(synth_images(120, 16, 1601, CorpusStyle::kNatural), desk_config(16), "16x16");
  const double train16_s = seconds_since(t16);

  run(4, [&] {
    std::mt19937_64 rng(104);
    int violations = 0;
    const auto images = synth_images(50, 16, 1602, CorpusStyle::kNatural);
    for (int t = 0; t < 50; ++t) {
      const Image& img = images[t];
      const std::size_t i = rng() % img.size();
      std::vector<std::uint8_t> px(img.pixels().begin(), img.pixels().end());
      px[i] = static_cast<std::uint8_t>(px[i] ^ (1 + rng() % 255));
      const HeadActivations a = forward(model16, img);
      const HeadActivations b = forward(model16, Image(16, 16, px));
      const std::size_t limit = (i + 1) * a.components;
      auto same = [&](const std::vector<double>& x, const std::vector<double>& y) {
        return std::memcmp(x.data(), y.data(), limit * sizeof(double)) == 0;
      };
      violations += !(same(a.mix_logit, b.mix_logit) && same(a.mean, b.mean) && same(a.log_scale, b.log_scale));
    }
    return Outcome{violations == 0, fmt("%d/50 toggles changed an output at or before the toggled pixel", violations)};
  });

  const auto t32 = Clock::now();
  const ModelWeights model32 =
      train_on(synth_images(200, 32, 3201, CorpusStyle::kNatural), desk_config(32), "32x32");
  const double train32_s = seconds_since(t32);

  run(7, [&] {
    const auto start = Clock::now();
    const auto pairs = synth_corpus(50, 32, 3202, CorpusStyle::kNatural);
    SweepConfig cfg;
    cfg.epsilons = {1, 2, 4, 8};
    cfg.methods = {Method::kOursApprox, Method::kGaussian, Method::kMedian, Method::kWiener};
    cfg.lsb_bits = 4;
    cfg.seed = 7;
    const RunReport r = run_sweep(cfg, pairs, model32);
    audit(r);
    write_cells_csv(r, out_dir / "sweep32.csv");
    write_summary_csv(r, out_dir / "sweep32.summary.csv");
    const auto& ours = r.aggregate(Method::kOursApprox, 4);
    const auto& gauss = r.aggregate(Method::kGaussian, 4);
    const double gap = gauss.decoded_rate.mean - ours.decoded_rate.mean;
    const double total = train32_s + seconds_since(start);
    const bool pass = all_ok(r) && gap >= 0.10 && ours.psnr_stego_purified.mean >= gauss.psnr_stego_purified.mean &&
                      total < 15 * 60;
    return Outcome{pass, fmt("eps=4 on %zu images: DC approx %.4f vs gaussian %.4f (gap %.1f points, need >= 10); "
                             "PSNR(stego, purified) approx %.2f dB vs gaussian %.2f dB; %.0f s incl. training",
                             pairs.size(), ours.decoded_rate.mean, gauss.decoded_rate.mean, 100 * gap,
                             ours.psnr_stego_purified.mean, gauss.psnr_stego_purified.mean, total)};
  });

  run(8, [&] {
    const auto start = Clock::now();
    const auto pairs = synth_corpus(20, 16, 1603, CorpusStyle::kNatural);
    SweepConfig cfg;
    cfg.epsilons = {1};
    cfg.methods = {Method::kOursApprox, Method::kOursExact};
    cfg.seed = 8;
    const RunReport r = run_sweep(cfg, pairs, model16);
    audit(r);
    write_cells_csv(r, out_dir / "exact_vs_approx16.csv");
    const double a = r.aggregate(Method::kOursApprox, 1).decoded_rate.mean;
    const double e = r.aggregate(Method::kOursExact, 1).decoded_rate.mean;
    const double total = train16_s + seconds_since(start);
    return Outcome{all_ok(r) && std::fabs(a - e) <= 0.05 && total < 60 * 60,
                   fmt("eps=1 on %zu 16x16 images: DC approx %.4f, exact %.4f, |diff| %.2f points (<= 5); %.0f s",
                       pairs.size(), a, e, 100 * std::fabs(a - e), total)};
  });

  run(9, [&] {
    const auto pairs = synth_corpus(50, 32, 3203, CorpusStyle::kEdgeRich);
    SweepConfig cfg;
    cfg.epsilons = {1, 2};
    cfg.methods = {Method::kOursApprox};
    cfg.seed = 9;
    const AblationReport r = run_ablation_no_edge(cfg, pairs, model32);
    audit(r.guided);
    audit(r.unguided);
    write_ablation_csv(r, out_dir / "edge_ablation32.csv");
    bool pass = all_ok(r.guided) && all_ok(r.unguided);
    std::ostringstream detail;
    for (int eps : {1, 2}) {
      const double g = r.guided.aggregate(Method::kOursApprox, eps).destruction_rate.mean;
      const double u = r.unguided.aggregate(Method::kOursApprox, eps).destruction_rate.mean;
      pass = pass && g >= u;
      detail << fmt("eps=%d DT guided %.4f vs unguided %.4f; ", eps, g, u);
    }
    detail << pairs.size() << " edge-rich images";
    return Outcome{pass, detail.str()};
  });

  run(10, [&] {
    const auto pairs = synth_corpus(10, 32, 3204, CorpusStyle::kNatural);
    const TimingReport t = time_modes(pairs, model32, 1, 4);
    write_timing_report(t, out_dir / "timing32.csv");
    bool slower = true;
    for (const auto& row : t.rows) slower = slower && row.exact_ms > row.approx_ms;
    return Outcome{t.median_approx_ms < 100.0 && slower,
                   fmt("32x32 median approx %.1f ms (< 100), exact %.1f ms; exact slower on every image: %s",
                       t.median_approx_ms, t.median_exact_ms, slower ? "yes" : "no")};
  });

  run(11, [&] {
    const auto pairs = synth_corpus(12, 16, 1604, CorpusStyle::kNatural);
    SweepConfig cfg;
    cfg.epsilons = {1, 2, 4, 8};
    cfg.methods = {Method::kOursApprox, Method::kOursExact, Method::kGaussian, Method::kMedian, Method::kWiener};
    cfg.seed = 11;
    cfg.threads = 1;
    const RunReport serial = run_sweep(cfg, pairs, model16);
    const RunReport serial_again = run_sweep(cfg, pairs, model16);
    cfg.threads = 4;
    const RunReport concurrent = run_sweep(cfg, pairs, model16);
    audit(serial);
    audit(concurrent);
    const std::string a = cells_csv(serial), b = cells_csv(serial_again), c = cells_csv(concurrent);
    write_cells_csv(serial, out_dir / "determinism16.csv");
    return Outcome{a == b && a == c && all_ok(serial),
                   fmt("%zu-row CSV identical across repeat run: %s, 1 vs 4 threads: %s", serial.cells.size(),
                       a == b ? "yes" : "no", a == c ? "yes" : "no")};
  });

  run(5, [] {
    return Outcome{sweep_budget_violations == 0 && sweep_range_violations == 0 && sweep_eraser_cells > 0,
                   fmt("%zu eraser cells across all sweeps: %zu pixel budget violations, %zu cells with e_norm "
                       "outside [eps, 2eps]",
                       sweep_eraser_cells, sweep_budget_violations, sweep_range_violations)};
  });

  static const char* kNames[] = {"",
                                 "LSB round trip",
                                 "distribution validity",
                                 "gradient correctness",
                                 "causality",
                                 "eraser budget",
                                 "metric identities",
                                 "end-to-end effectiveness",
                                 "exact vs approximate",
                                 "edge-guidance ablation",
                                 "performance",
                                 "determinism"};
  int failed = 0;
  for (int id = 1; id <= 11; ++id) {
    const Outcome& o = outcomes[id];
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, kNames[id], o.detail.c_str(), o.seconds);
  }
  std::printf("%d/11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}
