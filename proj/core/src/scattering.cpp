#include "qpnls/scattering.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "qpnls/linear_propagator.hpp"
#include "qpnls/observables.hpp"

namespace qpnls {

std::vector<ScatteringPoint> scattering_diagnostic(
    const std::vector<double>& times, const std::vector<WaveFunction>& states,
    const PotentialSpec& spec) {
  if (times.size() != states.size()) {
    throw std::invalid_argument("scattering_diagnostic: length mismatch");
  }
  if (times.size() < 2) {
    throw std::invalid_argument("scattering_diagnostic: needs >= 2 states");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument(
          "scattering_diagnostic: times must strictly increase");
    }
  }

  std::vector<WaveFunction> pullbacks;
  pullbacks.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    pullbacks.push_back(propagate_linear(states[i], spec, times[i], 0.0));
  }
  const WaveFunction& ref = pullbacks.back();

  std::vector<ScatteringPoint> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < pullbacks.size(); ++i) {
    ScatteringPoint p;
    p.t = times[i];
    WaveFunction diff = pullbacks[i];
    for (std::size_t k = 0; k < diff.amp.size(); ++k) diff.amp[k] -= ref.amp[k];
    p.sigma_distance = sigma_norm(diff);
    p.l2_distance = lp_norm(diff, 2.0);
    if (i > 0) {
      WaveFunction step = pullbacks[i];
      for (std::size_t k = 0; k < step.amp.size(); ++k) {
        step.amp[k] -= pullbacks[i - 1].amp[k];
      }
      p.cauchy_l2 = lp_norm(step, 2.0);
    }
    out.push_back(std::move(p));
  }
  return out;
}

WaveOperatorResult wave_operator(const WaveFunction& asymptotic_datum,
                                 const PotentialSpec& spec, SolverConfig config,
                                 double t_start, double lp_tolerance) {
  if (!asymptotic_datum.grid) {
    throw std::invalid_argument("wave_operator: empty datum");
  }
  if (!(t_start < 0.0)) {
    throw std::invalid_argument("wave_operator: t_start must be negative");
  }
  if (!(lp_tolerance > 0.0)) {
    throw std::invalid_argument("wave_operator: lp_tolerance must be > 0");
  }

  WaveFunction start = propagate_linear(asymptotic_datum, spec, 0.0, t_start);
  const double r = 2.0 * config.sigma + 2.0;
  const double dispersed = lp_norm(start, r);
  if (!(dispersed < lp_tolerance)) {
    throw std::invalid_argument(
        "wave_operator: datum not dispersed enough at t_start (L^r = " +
        std::to_string(dispersed) + ")");
  }

  config.t_start = t_start;
  config.t_end = 0.0;
  config.handoff_residual_tol = 0.0;
  EvolveResult run = evolve(start, spec, config);

  WaveOperatorResult result{std::move(run.final_state), std::move(start),
                            std::move(run.record)};
  return result;
}

}  // namespace qpnls
