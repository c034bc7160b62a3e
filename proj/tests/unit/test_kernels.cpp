#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cstring>
#include <numeric>

#include "helpers.hpp"
#include "pixsteg/kernels.hpp"

using namespace pixsteg;
using namespace pixsteg::kernels;

namespace {

constexpr Stencil kStencils[] = {Stencil::kCausalStrict, Stencil::kCausal, Stencil::kFull3x3,
                                 Stencil::kPointwise};

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Naive zero-padded correlation straight from the tap list.
std::vector<double> naive_conv(const ConvGeometry& g, const std::vector<double>& in,
                               const std::vector<double>& w, const std::vector<double>& b) {
  const auto taps = stencil_taps(g.stencil);
  std::vector<double> out(g.plane() * g.out_channels, 0.0);
  for (int o = 0; o < g.out_channels; ++o) {
    for (int r = 0; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        double acc = b.empty() ? 0.0 : b[o];
        for (int i = 0; i < g.in_channels; ++i) {
          for (int t = 0; t < g.taps(); ++t) {
            const int rr = r + taps[t].dy, cc = c + taps[t].dx;
            if (rr < 0 || rr >= g.height || cc < 0 || cc >= g.width) continue;
            acc += w[(static_cast<std::size_t>(o) * g.in_channels + i) * g.taps() + t] *
                   in[i * g.plane() + rr * g.width + cc];
          }
        }
        out[o * g.plane() + r * g.width + c] = acc;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("stencil shapes") {
  CHECK(stencil_taps(Stencil::kCausalStrict).size() == 4);
  CHECK(stencil_taps(Stencil::kCausal).size() == 5);
  CHECK(stencil_taps(Stencil::kFull3x3).size() == 9);
  CHECK(stencil_taps(Stencil::kPointwise).size() == 1);
  for (const Tap& t : stencil_taps(Stencil::kCausalStrict)) {
    CHECK((t.dy < 0 || (t.dy == 0 && t.dx < 0)));
  }
}

TEST_CASE("conv forward matches the naive oracle; serial and parallel agree bitwise") {
  std::mt19937_64 rng(5);
  for (Stencil s : kStencils) {
    const ConvGeometry g{3, 4, 7, 9, s};
    const auto in = testing::random_vector(g.plane() * 3, rng, -1, 1);
    const auto w = testing::random_vector(g.weight_count(), rng, -1, 1);
    const auto b = testing::random_vector(4, rng, -1, 1);
    std::vector<double> ser(g.plane() * 4), par(g.plane() * 4);
    serial::conv_forward(g, in, w, b, ser, 0, g.height);
    const auto oracle = naive_conv(g, in, w, b);
    for (std::size_t i = 0; i < ser.size(); ++i) REQUIRE(ser[i] == doctest::Approx(oracle[i]).epsilon(1e-13));
    for (int threads : {1, 2, 3, 4}) {
      omp_set_num_threads(threads);
      std::fill(par.begin(), par.end(), 0.0);
      parallel::conv_forward(g, in, w, b, par, 0, g.height);
      CHECK(bit_equal(ser, par));
    }
  }
}

TEST_CASE("row-range forward writes only its rows") {
  std::mt19937_64 rng(6);
  const ConvGeometry g{2, 2, 6, 5, Stencil::kCausal};
  const auto in = testing::random_vector(g.plane() * 2, rng, -1, 1);
  const auto w = testing::random_vector(g.weight_count(), rng, -1, 1);
  std::vector<double> full(g.plane() * 2), part(g.plane() * 2, 42.0);
  serial::conv_forward(g, in, w, {}, full, 0, g.height);
  serial::conv_forward(g, in, w, {}, part, 2, 4);
  for (int o = 0; o < 2; ++o) {
    for (int r = 0; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        const std::size_t i = o * g.plane() + r * g.width + c;
        if (r >= 2 && r < 4) {
          CHECK(part[i] == full[i]);
        } else {
          CHECK(part[i] == 42.0);
        }
      }
    }
  }
}

TEST_CASE("backward passes are the adjoints of forward") {
  std::mt19937_64 rng(7);
  for (Stencil s : kStencils) {
    const ConvGeometry g{3, 2, 5, 6, s};
    const auto x = testing::random_vector(g.plane() * 3, rng, -1, 1);
    const auto w = testing::random_vector(g.weight_count(), rng, -1, 1);
    const auto y = testing::random_vector(g.plane() * 2, rng, -1, 1);
    std::vector<double> fx(g.plane() * 2);
    serial::conv_forward(g, x, w, {}, fx, 0, g.height);

    std::vector<double> gx(x.size(), 0.0), gx_par(x.size(), 0.0);
    serial::conv_backward_input(g, y, w, gx);
    parallel::conv_backward_input(g, y, w, gx_par);
    CHECK(bit_equal(gx, gx_par));
    CHECK(dot(fx, y) == doctest::Approx(dot(x, gx)).epsilon(1e-12));

    std::vector<double> gw(w.size(), 0.0), gb(2, 0.0), gw_par(w.size(), 0.0), gb_par(2, 0.0);
    serial::conv_backward_params(g, x, y, gw, gb);
    parallel::conv_backward_params(g, x, y, gw_par, gb_par);
    CHECK(bit_equal(gw, gw_par));
    CHECK(bit_equal(gb, gb_par));
    CHECK(dot(fx, y) == doctest::Approx(dot(w, gw)).epsilon(1e-12));
    double ysum0 = 0, ysum1 = 0;
    for (std::size_t i = 0; i < g.plane(); ++i) {
      ysum0 += y[i];
      ysum1 += y[g.plane() + i];
    }
    CHECK(gb[0] == doctest::Approx(ysum0));
    CHECK(gb[1] == doctest::Approx(ysum1));
  }
}

TEST_CASE("prewitt, mixture and argmax kernels agree bitwise") {
  std::mt19937_64 rng(8);
  std::vector<std::uint8_t> px(13 * 11);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng());
  std::vector<double> ms(px.size()), mp(px.size());
  serial::prewitt_magnitude(px, 13, 11, ms);

  const int pixels = 40, m = 3;
  const auto logits = testing::random_vector(pixels * m, rng, -3, 3);
  const auto means = testing::random_vector(pixels * m, rng, -20, 275);
  const auto scales = testing::random_vector(pixels * m, rng, -4, 4);
  std::vector<double> ps(pixels * 256), pp(pixels * 256);
  serial::mixture_pmf(pixels, m, logits, means, scales, ps);

  std::vector<std::uint8_t> cur(pixels), os(pixels), op(pixels);
  std::vector<int> budget(pixels);
  for (int i = 0; i < pixels; ++i) {
    cur[i] = static_cast<std::uint8_t>(rng());
    budget[i] = 1 + static_cast<int>(rng() % 8);
  }
  serial::restricted_argmax(ps, cur, budget, os);

  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    parallel::prewitt_magnitude(px, 13, 11, mp);
    CHECK(bit_equal(ms, mp));
    parallel::mixture_pmf(pixels, m, logits, means, scales, pp);
    CHECK(bit_equal(ps, pp));
    parallel::restricted_argmax(ps, cur, budget, op);
    CHECK(os == op);
  }
}

TEST_CASE("restricted argmax ties and clamping") {
  std::vector<double> probs(256, 0.0);
  probs[98] = 0.3;
  probs[102] = 0.3;
  CHECK(pixel_restricted_argmax(probs.data(), 100, 2) == 98);  // equal distance: smaller
  probs[101] = 0.3;
  CHECK(pixel_restricted_argmax(probs.data(), 100, 2) == 101);  // closer wins
  probs[100] = 0.3;
  CHECK(pixel_restricted_argmax(probs.data(), 100, 2) == 100);
  std::vector<double> flat(256, 1.0 / 256);
  CHECK(pixel_restricted_argmax(flat.data(), 3, 5) == 3);
  std::vector<double> ramp(256);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  CHECK(pixel_restricted_argmax(ramp.data(), 253, 4) == 255);
  CHECK(pixel_restricted_argmax(ramp.data(), 200, 4) == 204);
  CHECK(pixel_restricted_argmax(flat.data(), 0, 1) == 0);
}
