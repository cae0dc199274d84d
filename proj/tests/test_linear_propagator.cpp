#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qpnls/grid.hpp"
#include "qpnls/linear_propagator.hpp"
#include "qpnls/trajectories.hpp"

using namespace qpnls;
using testutil::cplx;
using testutil::gauss_evolve;
using testutil::gauss_field;
using testutil::GaussianState;
using testutil::grid1;
using testutil::grid2;
using testutil::l2_diff;
using testutil::make_spec;
using testutil::unit_gaussian;

namespace {

WaveFunction phase_times(const WaveFunction& psi, cplx factor) {
  WaveFunction out = psi;
  for (auto& a : out.amp) a *= factor;
  return out;
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("oscillator eigenstates pick up exactly their eigenphase") {
  auto g = grid1(256, 10.0);
  const double w = 1.3;
  const PotentialSpec spec = make_spec({1}, {w});

  const WaveFunction psi0 = make_hermite(g, spec, {0});
  WaveFunction evolved = mehler_apply(psi0, spec, 0.9);
  WaveFunction expected = phase_times(psi0, std::polar(1.0, -0.5 * w * 0.9));
  CHECK(l2_diff(evolved, expected) < 1e-8);

  const WaveFunction psi2 = make_hermite(g, spec, {2});
  evolved = mehler_apply(psi2, spec, 0.9);
  expected = phase_times(psi2, std::polar(1.0, -2.5 * w * 0.9));
  CHECK(l2_diff(evolved, expected) < 1e-8);
}

TEST_CASE("composition through a kernel zero still yields the eigenphase") {
  // duration pi/2 is a focal time for omega = 2; the adaptive composition
  // reaches it through nonsingular partial steps
  auto g = grid1(256, 10.0);
  const double w = 2.0;
  const PotentialSpec spec = make_spec({1}, {w});
  const WaveFunction psi0 = make_hermite(g, spec, {0});
  const double t = M_PI / 2.0;
  CHECK_THROWS_AS(mehler_apply(psi0, spec, t), SingularTimeError);
  const WaveFunction evolved = propagate_linear(psi0, spec, 0.0, t);
  const WaveFunction expected = phase_times(psi0, std::polar(1.0, -0.5 * w * t));
  CHECK(l2_diff(evolved, expected) < 1e-8);
}

TEST_CASE("free gaussian matches the closed-form spread") {
  auto g = grid1(256, 24.0);
  const PotentialSpec spec = make_spec({0}, {1.0});
  const WaveFunction psi0 = unit_gaussian(g);
  const double t = 2.0;
  const WaveFunction evolved = mehler_apply(psi0, spec, t);
  const GaussianState s =
      gauss_evolve(cplx(1.0, 0.0), cplx(std::pow(M_PI, -0.25), 0.0), 0, 1.0, t);
  const WaveFunction oracle = gauss_field(g, {s});
  CHECK(l2_diff(evolved, oracle) < 1e-8);
  CHECK(mass(evolved) == doctest::Approx(mass(psi0)).epsilon(1e-12));
}

TEST_CASE("repulsive gaussian matches the closed form in modulus and phase") {
  auto g = grid1(768, 22.0);
  const PotentialSpec spec = make_spec({-1}, {1.0});
  const WaveFunction psi0 = unit_gaussian(g);
  const double t = 1.0;
  const WaveFunction evolved = mehler_apply(psi0, spec, t);

  const GaussianState s =
      gauss_evolve(cplx(1.0, 0.0), cplx(std::pow(M_PI, -0.25), 0.0), -1, 1.0, t);
  const WaveFunction oracle = gauss_field(g, {s});
  CHECK(l2_diff(evolved, oracle) < 1e-8);

  // known modulus law |u|^2 = pi^{-1/2} cosh(2t)^{-1/2} exp(-x^2/cosh 2t)
  const double ch = std::cosh(2.0 * t);
  double worst = 0.0;
  const auto& xs = g->coordinates(0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double expected =
        std::pow(M_PI, -0.5) / std::sqrt(ch) * std::exp(-xs[i] * xs[i] / ch);
    worst = std::max(worst, std::abs(std::norm(evolved.amp[i]) - expected));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("linear potential term evolves by the shifted free flow") {
  auto g = grid1(256, 14.0);
  const double b = 0.4;
  const PotentialSpec spec = make_spec({0}, {1.0}, {b});
  const WaveFunction psi0 = unit_gaussian(g);
  const double t = 1.0;
  const WaveFunction evolved = splitstep_linear(psi0, spec, t, 4000);

  const GaussianState s =
      gauss_evolve(cplx(1.0, 0.0), cplx(std::pow(M_PI, -0.25), 0.0), 0, 1.0, t);
  WaveFunction oracle(g);
  const auto& xs = g->coordinates(0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double y = xs[i] + 0.5 * b * t * t;
    const double phase = -(b * t * xs[i] + b * b * t * t * t / 6.0);
    oracle.amp[i] =
        s.c * std::exp(-0.5 * s.a * y * y) * std::polar(1.0, phase);
  }
  CHECK(l2_diff(evolved, oracle) < 1e-6);

  // the kernel path must refuse the unreduced potential
  CHECK_THROWS_AS(mehler_apply(psi0, spec, 0.5), LinearTermError);
  // but the adaptive propagator routes it through the split-step path
  const WaveFunction via_propagate = propagate_linear(psi0, spec, 0.0, t);
  CHECK(l2_diff(via_propagate, oracle) < 1e-4);
}

TEST_CASE("group law, round trip, and unitarity under composition") {
  auto g = grid2(512, 128, 24.0, 12.0);
  const PotentialSpec spec = make_spec({-1, 1}, {1.0, 0.8});
  const WaveFunction psi0 = make_gaussian(g, 0.5, {0.8, -0.5}, {1.0, 1.0},
                                          {0.4, 0.2});
  const double m0 = mass(psi0);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dur(0.05, 0.5);
  for (int k = 0; k < 10; ++k) {
    const double a = dur(rng);
    const double b = dur(rng);
    const WaveFunction two_leg =
        propagate_linear(propagate_linear(psi0, spec, 0.0, a), spec, a, a + b);
    const WaveFunction one_leg = propagate_linear(psi0, spec, 0.0, a + b);
    CHECK(l2_diff(two_leg, one_leg) < 1e-9);
    CHECK(std::abs(mass(one_leg) - m0) / m0 < 1e-12);
  }

  const double t = 0.8;
  const WaveFunction forth = propagate_linear(psi0, spec, 0.0, t);
  const WaveFunction back = propagate_linear(forth, spec, t, 0.0);
  CHECK(l2_diff(back, psi0) < 1e-9);
}

TEST_CASE("trap parity and revival phases across focal times") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  const WaveFunction psi0 = make_gaussian(g, 0.8, {1.2}, {0.9}, {0.7});
  const int n = g->points(0);

  // U(pi) f(x) = e^{-i pi/2} f(-x)
  const WaveFunction half = propagate_linear(psi0, spec, 0.0, M_PI);
  WaveFunction reflected(g);
  for (int i = 0; i < n; ++i) {
    reflected.amp[static_cast<std::size_t>(i)] =
        cplx(0.0, -1.0) *
        psi0.amp[static_cast<std::size_t>((n - i) % n)];
  }
  CHECK(l2_diff(half, reflected) < 1e-7);

  // U(2 pi) = -identity
  const WaveFunction full = propagate_linear(psi0, spec, 0.0, 2.0 * M_PI);
  const WaveFunction negated = phase_times(psi0, cplx(-1.0, 0.0));
  CHECK(l2_diff(full, negated) < 1e-7);
}

TEST_CASE("split-step reference converges at second order to the kernel") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.1});
  const WaveFunction psi0 = make_gaussian(g, 0.7, {0.6}, {1.0}, {0.3});
  const double t = 1.0;
  const WaveFunction ref = mehler_apply(psi0, spec, t);
  const double e500 = l2_diff(splitstep_linear(psi0, spec, t, 500), ref);
  const double e1000 = l2_diff(splitstep_linear(psi0, spec, t, 1000), ref);
  CHECK(e500 / e1000 > 3.5);
  CHECK(e500 / e1000 < 4.5);
}

TEST_CASE("resolution and singular-time guards fire") {
  const PotentialSpec stiff = make_spec({1}, {6.0});
  auto coarse = grid1(32, 10.0);
  const WaveFunction psi = unit_gaussian(coarse);
  CHECK_THROWS_AS(mehler_apply(psi, stiff, 0.5), NyquistError);

  const PotentialSpec trap = make_spec({1}, {2.0});
  auto fine = grid1(256, 10.0);
  const WaveFunction psi_fine = unit_gaussian(fine);
  CHECK_THROWS_AS(mehler_apply(psi_fine, trap, M_PI / 2.0), SingularTimeError);
}

TEST_CASE("zero duration is the identity") {
  auto g = grid1(128, 8.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  const WaveFunction psi = make_gaussian(g, 0.9, {0.4}, {1.1}, {-0.2});
  CHECK(l2_diff(mehler_apply(psi, spec, 0.0), psi) == 0.0);
  CHECK(l2_diff(propagate_linear(psi, spec, 1.3, 1.3), psi) == 0.0);
}

TEST_CASE("off-grid sampling reproduces true pointwise values") {
  // free spread evaluated on a wider lattice than the source box
  auto g = grid1(1024, 18.0);
  const PotentialSpec spec = make_spec({0}, {1.0});
  const WaveFunction psi0 = unit_gaussian(g);
  const double t = 3.0;
  const WaveFunction sampled = mehler_sample(psi0, spec, t, {64}, {30.0});
  const GaussianState s =
      gauss_evolve(cplx(1.0, 0.0), cplx(std::pow(M_PI, -0.25), 0.0), 0, 1.0, t);
  const WaveFunction oracle = gauss_field(sampled.grid, {s});
  CHECK(testutil::linf_diff(sampled, oracle) < 1e-8);

  // eigenstate sampled on a shifted window picks up only the eigenphase
  auto gt = grid1(256, 10.0);
  const double w = 1.3;
  const PotentialSpec trap = make_spec({1}, {w});
  const WaveFunction ground = make_hermite(gt, trap, {0});
  const WaveFunction tsampled = mehler_sample(ground, trap, 0.9, {48}, {6.0});
  WaveFunction tref = phase_times(
      make_gaussian(tsampled.grid, std::pow(w / M_PI, 0.25), {0.0},
                    {1.0 / std::sqrt(w)}, {0.0}),
      std::polar(1.0, -0.5 * w * 0.9));
  CHECK(testutil::linf_diff(tsampled, tref) < 1e-8);

  // kernel zero: sampling at the focal time of the trap must refuse
  CHECK_THROWS_AS(mehler_sample(ground, trap, M_PI / w, {32}, {6.0}),
                  SingularTimeError);
}

}  // TEST_SUITE
