#pragma once

#include <vector>

#include "qpnls/grid.hpp"
#include "qpnls/nonlinear_integrator.hpp"
#include "qpnls/trajectories.hpp"

namespace qpnls {

struct ScatteringPoint {
  double t = 0.0;
  double sigma_distance = 0.0;  // || U(-t) u(t) - phi_ref ||_Sigma at t = 0
  double l2_distance = 0.0;
  double cauchy_l2 = 0.0;  // distance between consecutive pullbacks
};

/// Pulls each state back to t = 0 through the exact linear flow and measures
/// convergence of U(-t) u(t); the reference is the last pullback.  Requires
/// strictly increasing times matching the states.
std::vector<ScatteringPoint> scattering_diagnostic(
    const std::vector<double>& times, const std::vector<WaveFunction>& states,
    const PotentialSpec& spec);

struct WaveOperatorResult {
  WaveFunction state_at_zero;
  WaveFunction prepared_start;  // U(t_start) applied to the prescribed datum
  EvolutionRecord record;
};

/// Transports the prescribed asymptotic datum to t_start by the linear flow,
/// verifies it is already dispersed there (L^{2s+2} below lp_tolerance), and
/// integrates the full nonlinear equation back to t = 0.
WaveOperatorResult wave_operator(const WaveFunction& asymptotic_datum,
                                 const PotentialSpec& spec, SolverConfig config,
                                 double t_start, double lp_tolerance);

}  // namespace qpnls
