#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pixsteg/analyzer.hpp"
#include "pixsteg/baselines.hpp"
#include "pixsteg/corpus.hpp"
#include "pixsteg/edge_detect.hpp"
#include "pixsteg/eraser.hpp"
#include "pixsteg/format.hpp"
#include "pixsteg/metrics.hpp"
#include "pixsteg/stego_lsb.hpp"
#include "pixsteg/sweep.hpp"

using namespace pixsteg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct SweepArgs {
  std::string data, weights, out;
  std::vector<int> epsilons{1, 2, 4, 8};
  std::vector<std::string> methods{"ours-approx", "gaussian", "median", "wiener"};
  int bits = 4;
  int window = 3;
  std::uint64_t seed = 1;
  bool no_edge = false;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--data", a.data, "corpus directory of <name>.cover.pgm / <name>.secret.pgm")->required();
  cmd->add_option("--weights", a.weights, "trained analyzer weights");
  cmd->add_option("--out", a.out, "output CSV");
  cmd->add_option("--epsilons", a.epsilons, "epsilon list")->delimiter(',');
  cmd->add_option("--methods", a.methods, "ours-approx,ours-exact,gaussian,median,wiener")->delimiter(',');
  cmd->add_option("--bits", a.bits, "LSB bits");
  cmd->add_option("--window", a.window, "median/wiener window");
  cmd->add_option("--seed", a.seed, "sweep seed");
  cmd->add_flag("--no-edge", a.no_edge, "disable edge guidance");
}

SweepConfig to_sweep_config(const SweepArgs& a, int threads) {
  SweepConfig cfg;
  cfg.epsilons = a.epsilons;
  cfg.methods.clear();
  for (const auto& m : a.methods) cfg.methods.push_back(method_from_string(m));
  cfg.lsb_bits = a.bits;
  cfg.dataset = a.data;
  cfg.weights = a.weights;
  cfg.output_csv = a.out;
  cfg.seed = a.seed;
  cfg.edge_guided = !a.no_edge;
  cfg.window = a.window;
  cfg.threads = threads;
  return cfg;
}

void print_summary(const RunReport& report) {
  std::printf("%-12s %4s %6s %10s %10s %8s %8s %8s\n", "method", "eps", "n", "psnr_cp", "psnr_sp", "ssim",
              "DC", "DT");
  for (const auto& a : report.aggregates) {
    std::printf("%-12s %4d %6zu %10.3f %10.3f %8.4f %8.4f %8.4f\n", to_string(a.method), a.epsilon, a.count,
                a.psnr_cover_purified.mean, a.psnr_stego_purified.mean, a.ssim.mean, a.decoded_rate.mean,
                a.destruction_rate.mean);
  }
  std::size_t failed = 0;
  for (const auto& c : report.cells) failed += !c.ok;
  if (failed) std::fprintf(stderr, "%zu cell(s) failed; see the status column\n", failed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pixsteg: LSB steganography removal with an autoregressive pixel analyzer"};
  app.set_config("--config", "", "key=value config file mirroring the flags");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the analyzer on the covers of a corpus");
  AnalyzerConfig acfg;
  std::string train_data, train_out, train_log, optimizer_name = "adam";
  train_cmd->add_option("--data", train_data, "corpus directory")->required();
  train_cmd->add_option("--out", train_out, "weights file")->required();
  train_cmd->add_option("--log", train_log, "training log CSV");
  train_cmd->add_option("--image-size", acfg.image_size);
  train_cmd->add_option("--components", acfg.components);
  train_cmd->add_option("--hidden", acfg.hidden_channels);
  train_cmd->add_option("--blocks", acfg.residual_blocks);
  train_cmd->add_option("--edge-channels", acfg.edge_channels);
  train_cmd->add_option("--lambda-image", acfg.lambda_image);
  train_cmd->add_option("--lambda-edge", acfg.lambda_edge);
  train_cmd->add_option("--lr", acfg.learning_rate);
  train_cmd->add_option("--batch", acfg.batch_size);
  train_cmd->add_option("--epochs", acfg.epochs);
  train_cmd->add_option("--seed", acfg.seed);
  train_cmd->add_option("--optimizer", optimizer_name, "adam or sgd");

  // embed / extract
  auto* embed_cmd = app.add_subcommand("embed", "hide the top bits of a secret in a cover");
  std::string cover_path, secret_path, out_path, stego_path, image_path, weights_path;
  int bits = 4;
  embed_cmd->add_option("--cover", cover_path)->required();
  embed_cmd->add_option("--secret", secret_path)->required();
  embed_cmd->add_option("--out", out_path)->required();
  embed_cmd->add_option("--bits", bits);

  auto* extract_cmd = app.add_subcommand("extract", "recover the hidden image from a stego image");
  extract_cmd->add_option("--stego", stego_path)->required();
  extract_cmd->add_option("--out", out_path)->required();
  extract_cmd->add_option("--bits", bits);

  // edges
  auto* edges_cmd = app.add_subcommand("edges", "Prewitt (or analyzer-predicted) edge map as PGM");
  edges_cmd->add_option("--image", image_path)->required();
  edges_cmd->add_option("--out", out_path)->required();
  edges_cmd->add_option("--weights", weights_path, "use the analyzer's edge head instead of Prewitt");

  // purify
  auto* purify_cmd = app.add_subcommand("purify", "remove hidden data with the analyzer-guided eraser");
  EraserConfig ecfg;
  std::string mode_name = "approx", dist_path;
  bool no_edge = false;
  purify_cmd->add_option("--stego", stego_path)->required();
  purify_cmd->add_option("--weights", weights_path)->required();
  purify_cmd->add_option("--out", out_path)->required();
  purify_cmd->add_option("--epsilon", ecfg.epsilon);
  purify_cmd->add_option("--mode", mode_name, "approx or exact");
  purify_cmd->add_flag("--no-edge", no_edge, "constant budget epsilon");
  purify_cmd->add_option("--dump-distribution", dist_path, "write the per-pixel distribution");

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "gaussian noise, median or wiener attack");
  BaselineConfig bcfg;
  std::string baseline_name = "gaussian";
  baseline_cmd->add_option("--image", image_path)->required();
  baseline_cmd->add_option("--out", out_path)->required();
  baseline_cmd->add_option("--method", baseline_name, "gaussian, median or wiener");
  baseline_cmd->add_option("--epsilon", bcfg.epsilon, "gaussian sigma");
  baseline_cmd->add_option("--window", bcfg.window);
  baseline_cmd->add_option("--seed", bcfg.seed);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "metrics for one purified image, as a CSV row");
  std::string purified_path, decoded_o_path, decoded_d_path;
  bool header = true;
  eval_cmd->add_option("--cover", cover_path)->required();
  eval_cmd->add_option("--stego", stego_path)->required();
  eval_cmd->add_option("--purified", purified_path)->required();
  eval_cmd->add_option("--secret", secret_path)->required();
  eval_cmd->add_option("--decoded-original", decoded_o_path)->required();
  eval_cmd->add_option("--decoded-after", decoded_d_path)->required();
  eval_cmd->add_flag("!--no-header", header, "omit the CSV header");

  // sweep / ablate
  SweepArgs sweep_args, ablate_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "corpus sweep over methods and epsilons");
  add_sweep_options(sweep_cmd, sweep_args);
  auto* ablate_cmd = app.add_subcommand("ablate", "guided vs unguided eraser on a corpus");
  ablate_args.methods = {"ours-approx"};
  ablate_args.epsilons = {1, 2};
  add_sweep_options(ablate_cmd, ablate_args);

  // time
  auto* time_cmd = app.add_subcommand("time", "wall-clock approx vs exact eraser");
  std::string time_data, time_out;
  int time_eps = 1;
  time_cmd->add_option("--data", time_data)->required();
  time_cmd->add_option("--weights", weights_path)->required();
  time_cmd->add_option("--epsilon", time_eps);
  time_cmd->add_option("--bits", bits);
  time_cmd->add_option("--out", time_out, "per-image timing CSV");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic cover/secret corpus");
  std::string synth_out, style_name = "natural";
  int synth_count = 64, synth_size = 32;
  std::uint64_t synth_seed = 1;
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--count", synth_count)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", synth_size)->check(CLI::Range(3, 4096));
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--style", style_name, "natural or edge-rich");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*train_cmd) {
      acfg.optimizer = optimizer_from_string(optimizer_name);
      acfg.validate();
      std::vector<Image> covers;
      for (auto& pair : read_corpus(train_data)) covers.push_back(std::move(pair.cover));
      if (covers.empty()) throw DataError("no training images in " + train_data);
      const TrainResult result = train(covers, acfg, [](int epoch, const LossReport& r) {
        std::fprintf(stderr, "epoch %d  L=%.6f  L_I=%.6f  L_E=%.6f\n", epoch, r.total, r.image, r.edge);
      });
      save_weights(result.weights, train_out);
      if (!train_log.empty()) write_training_log(result.epochs, train_log);
    } else if (*embed_cmd) {
      save_image(embed(load_image(cover_path), load_image(secret_path), LsbConfig{bits}), out_path);
    } else if (*extract_cmd) {
      save_image(extract(load_image(stego_path), LsbConfig{bits}), out_path);
    } else if (*edges_cmd) {
      const Image image = load_image(image_path);
      const EdgeMap edge =
          weights_path.empty() ? prewitt(image) : predicted_edges(forward(load_weights(weights_path), image));
      save_image(edge.to_image(), out_path);
    } else if (*purify_cmd) {
      ecfg.mode = eraser_mode_from_string(mode_name);
      ecfg.edge_guided = !no_edge;
      const Image stego = load_image(stego_path);
      const ModelWeights weights = load_weights(weights_path);
      save_image(purify(stego, weights, ecfg).image, out_path);
      if (!dist_path.empty()) save_distribution(to_pixel_distribution(forward(weights, stego)), dist_path);
    } else if (*baseline_cmd) {
      bcfg.method = baseline_from_string(baseline_name);
      save_image(apply_baseline(load_image(image_path), bcfg), out_path);
    } else if (*eval_cmd) {
      const Image cover = load_image(cover_path), stego = load_image(stego_path);
      const Image purified = load_image(purified_path), secret = load_image(secret_path);
      const Image decoded_o = load_image(decoded_o_path), decoded_d = load_image(decoded_d_path);
      if (header) std::cout << "psnr_cover_purified,psnr_stego_purified,ssim,decoded_rate,destruction_rate\n";
      std::cout << format_double(psnr(cover, purified)) << ',' << format_double(psnr(stego, purified)) << ','
                << format_double(ssim(stego, purified)) << ',' << format_double(decoded_rate(secret, decoded_d))
                << ',' << format_double(destruction_rate(decoded_o, decoded_d)) << '\n';
    } else if (*sweep_cmd) {
      print_summary(run_sweep(to_sweep_config(sweep_args, threads)));
    } else if (*ablate_cmd) {
      const AblationReport report = run_ablation_no_edge(to_sweep_config(ablate_args, threads));
      std::printf("guided\n");
      print_summary(report.guided);
      std::printf("unguided\n");
      print_summary(report.unguided);
    } else if (*time_cmd) {
      const TimingReport report = time_modes(read_corpus(time_data), load_weights(weights_path), time_eps, bits);
      if (!time_out.empty()) write_timing_report(report, time_out);
      std::printf("median approx %.3f ms, median exact %.3f ms over %zu images\n", report.median_approx_ms,
                  report.median_exact_ms, report.rows.size());
    } else if (*synth_cmd) {
      CorpusStyle style;
      if (style_name == "natural") {
        style = CorpusStyle::kNatural;
      } else if (style_name == "edge-rich") {
        style = CorpusStyle::kEdgeRich;
      } else {
        throw DataError("unknown style '" + style_name + "'");
      }
      write_corpus(synth_corpus(synth_count, synth_size, synth_seed, style), synth_out);
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
