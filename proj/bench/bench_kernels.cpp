#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pixsteg/kernels.hpp"

using namespace pixsteg::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<std::uint8_t> pixels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng());
  return v;
}

template <bool Parallel>
void BM_Conv(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ConvGeometry g{32, 32, side, side, Stencil::kCausal};
  const auto in = noise(g.plane() * 32, 1, -1, 1);
  const auto w = noise(g.weight_count(), 2, -0.1, 0.1);
  const auto b = noise(32, 3, -0.1, 0.1);
  std::vector<double> out(g.plane() * 32);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::conv_forward(g, in, w, b, out, 0, side);
    } else {
      serial::conv_forward(g, in, w, b, out, 0, side);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.plane()));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ConvGeometry g{32, 32, side, side, Stencil::kCausal};
  const auto in = noise(g.plane() * 32, 1, -1, 1);
  const auto grad = noise(g.plane() * 32, 4, -1, 1);
  const auto w = noise(g.weight_count(), 2, -0.1, 0.1);
  std::vector<double> gin(in.size()), gw(w.size()), gb(32);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::conv_backward_input(g, grad, w, gin);
      parallel::conv_backward_params(g, in, grad, gw, gb);
    } else {
      serial::conv_backward_input(g, grad, w, gin);
      serial::conv_backward_params(g, in, grad, gw, gb);
    }
    benchmark::DoNotOptimize(gin.data());
    benchmark::DoNotOptimize(gw.data());
  }
}

template <bool Parallel>
void BM_Prewitt(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto px = pixels(static_cast<std::size_t>(side) * side, 5);
  std::vector<double> out(px.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::prewitt_magnitude(px, side, side, out);
    } else {
      serial::prewitt_magnitude(px, side, side, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_MixturePmf(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int n = side * side, m = 5;
  const auto logits = noise(static_cast<std::size_t>(n) * m, 6, -2, 2);
  const auto means = noise(static_cast<std::size_t>(n) * m, 7, 0, 255);
  const auto scales = noise(static_cast<std::size_t>(n) * m, 8, 0, 3);
  std::vector<double> probs(static_cast<std::size_t>(n) * 256);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::mixture_pmf(n, m, logits, means, scales, probs);
    } else {
      serial::mixture_pmf(n, m, logits, means, scales, probs);
    }
    benchmark::DoNotOptimize(probs.data());
  }
}

template <bool Parallel>
void BM_RestrictedArgmax(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const std::size_t n = static_cast<std::size_t>(side) * side;
  const auto probs = noise(n * 256, 9, 0, 1);
  const auto cur = pixels(n, 10);
  std::vector<int> budget(n, 8);
  std::vector<std::uint8_t> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::restricted_argmax(probs, cur, budget, out);
    } else {
      serial::restricted_argmax(probs, cur, budget, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Conv<false>)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(BM_Conv<true>)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(BM_ConvBackward<false>)->Arg(32);
BENCHMARK(BM_ConvBackward<true>)->Arg(32);
BENCHMARK(BM_Prewitt<false>)->Arg(32)->Arg(256);
BENCHMARK(BM_Prewitt<true>)->Arg(32)->Arg(256);
BENCHMARK(BM_MixturePmf<false>)->Arg(32);
BENCHMARK(BM_MixturePmf<true>)->Arg(32);
BENCHMARK(BM_RestrictedArgmax<false>)->Arg(32);
BENCHMARK(BM_RestrictedArgmax<true>)->Arg(32);

BENCHMARK_MAIN();
