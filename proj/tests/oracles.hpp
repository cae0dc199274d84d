#pragma once

// Shared helpers for the test suites: grid builders, norm utilities, and a
// closed-form Gaussian evolution used as an independent oracle for the kernel
// propagator.  The oracle advances the complex width parameter a and the
// prefactor c of  c * exp(-a x^2 / 2)  through the exact one-direction flow
//   a -> (delta w^2 g - i a h) / (a g - i h),   c -> c / sqrt(h + i a g),
// composed over short sub-steps so every square root stays on the principal
// branch (the composition of exact flows is exact; only the branch tracking
// needs small steps).

#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <vector>

#include "qpnls/grid.hpp"
#include "qpnls/trajectories.hpp"

namespace testutil {

using cplx = std::complex<double>;

inline std::shared_ptr<const qpnls::Grid> grid1(int n, double L) {
  return std::make_shared<qpnls::Grid>(std::vector<int>{n},
                                       std::vector<double>{L});
}

inline std::shared_ptr<const qpnls::Grid> grid2(int n0, int n1, double L0,
                                                double L1) {
  return std::make_shared<qpnls::Grid>(std::vector<int>{n0, n1},
                                       std::vector<double>{L0, L1});
}

// pi^{-n/4} exp(-|x|^2/2): unit L2 mass in any dimension.
inline qpnls::WaveFunction unit_gaussian(std::shared_ptr<const qpnls::Grid> g) {
  const int n = g->n();
  const double amp = std::pow(M_PI, -0.25 * n);
  return qpnls::make_gaussian(std::move(g), amp,
                              std::vector<double>(static_cast<std::size_t>(n), 0.0),
                              std::vector<double>(static_cast<std::size_t>(n), 1.0),
                              std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

inline double l2_diff(const qpnls::WaveFunction& a, const qpnls::WaveFunction& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::norm(a.amp[i] - b.amp[i]);
  return std::sqrt(s * a.grid->cell_volume());
}

inline double linf_diff(const qpnls::WaveFunction& a, const qpnls::WaveFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.amp.size(); ++i)
    m = std::max(m, std::abs(a.amp[i] - b.amp[i]));
  return m;
}

struct GaussianState {
  cplx a{1.0, 0.0};  // exp(-a x^2/2), Re a > 0
  cplx c{1.0, 0.0};  // prefactor
};

inline GaussianState gauss_step(const GaussianState& s, int delta, double omega,
                                double dt) {
  const qpnls::TrajectoryPair p = qpnls::classical_pair(delta, omega, dt);
  const cplx i(0.0, 1.0);
  const cplx g(p.g, 0.0);
  const cplx h(p.h, 0.0);
  GaussianState out;
  out.a = (static_cast<double>(delta) * omega * omega * g - i * s.a * h) /
          (s.a * g - i * h);
  out.c = s.c / std::sqrt(h + i * s.a * g);
  return out;
}

inline GaussianState gauss_evolve(cplx a0, cplx c0, int delta, double omega,
                                  double t, int steps = 512) {
  GaussianState s{a0, c0};
  const double dt = t / steps;
  for (int k = 0; k < steps; ++k) s = gauss_step(s, delta, omega, dt);
  return s;
}

// Separable product field prod_j c_j exp(-a_j x_j^2 / 2) on the grid.
inline qpnls::WaveFunction gauss_field(std::shared_ptr<const qpnls::Grid> g,
                                       const std::vector<GaussianState>& dirs) {
  qpnls::WaveFunction psi(g);
  const int n = g->n();
  std::vector<std::vector<cplx>> axis(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto& xs = g->coordinates(j);
    auto& col = axis[static_cast<std::size_t>(j)];
    col.resize(xs.size());
    const GaussianState& d = dirs[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < xs.size(); ++i)
      col[i] = d.c * std::exp(-0.5 * d.a * xs[i] * xs[i]);
  }
  for (std::size_t idx = 0; idx < g->size(); ++idx) {
    cplx v(1.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const std::size_t k = (idx / g->stride(j)) %
                            static_cast<std::size_t>(g->points(j));
      v *= axis[static_cast<std::size_t>(j)][k];
    }
    psi.amp[idx] = v;
  }
  return psi;
}

inline qpnls::PotentialSpec make_spec(std::vector<int> delta,
                                      std::vector<double> omega,
                                      std::vector<double> b = {}) {
  qpnls::PotentialSpec spec;
  spec.delta = std::move(delta);
  spec.omega = std::move(omega);
  spec.b = b.empty() ? std::vector<double>(spec.omega.size(), 0.0) : std::move(b);
  return spec;
}

}  // namespace testutil
