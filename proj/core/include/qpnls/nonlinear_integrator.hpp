#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpnls/grid.hpp"
#include "qpnls/observables.hpp"
#include "qpnls/trajectories.hpp"

namespace qpnls {

enum class TerminationReason {
  completed,
  blowup_detected,
  boundary_breach,
  singularity_fault,
};

std::string to_string(TerminationReason reason);

struct SolverConfig {
  double dt = 1e-3;
  double t_start = 0.0;
  double t_end = 1.0;
  double lambda = 0.0;
  double sigma = 1.0;
  double blowup_gradient_factor = 1e3;
  double boundary_mass_tol = 1e-8;
  int output_every = 1;
  // When > 0 and at least one direction is repulsive: once the projected
  // nonlinear correction |lambda|(2s+1) sup|u|^{2s} / (s * min repulsive
  // omega) falls to this value, the run switches to the exact linear flow
  // and the remaining rows carry a residual bound (valid under the same
  // amplitude-decay certificate that triggered the switch) instead of zeros.
  double handoff_residual_tol = 0.0;
  int max_post_handoff_samples = 64;

  void validate(int dimension) const;
};

struct EvolutionSample {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double moment_norm = 0.0;
  double sigma_norm = 0.0;
  std::vector<double> j_norm;  // ||J_j(t) u||, one per direction
  std::vector<double> h_norm;  // ||H_j(t) u||
  double sup_norm = 0.0;
  double lp_r_norm = 0.0;  // ||u||_{2s+2}; an upper bound after handoff
  // L2 distance bound between the reported linear continuation and the true
  // nonlinear solution: sqrt(mass) * (e^I - 1) with I the accumulated
  // correction integral.  Zero before handoff.
  double residual_bound = 0.0;
  bool after_handoff = false;
};

struct EvolutionRecord {
  std::vector<EvolutionSample> samples;
  int dimension = 0;
  double lp_exponent = 2.0;  // the r reported in lp_r_norm
  TerminationReason termination = TerminationReason::completed;
  std::string termination_detail;
  double termination_time = 0.0;
  std::optional<double> handoff_time;
  double residual_integral = 0.0;

  std::vector<std::string> column_names() const;
  std::string to_csv() const;
  std::string to_json_string() const;
  std::vector<double> times() const;
  // Extracts one CSV column ("mass", "j_norm_0", ...) as a series.
  std::vector<double> series(const std::string& column) const;
};

/// u <- exp(-i lambda |u|^{2s} dt) u, pointwise and exactly mass-preserving.
WaveFunction nonlinear_phase_step(const WaveFunction& psi, double lambda,
                                  double sigma, double dt);

/// One Strang triple: half nonlinear phase, exact linear step from t to
/// t + config.dt, half nonlinear phase.
WaveFunction strang_step(const WaveFunction& psi, const PotentialSpec& spec,
                         const SolverConfig& config, double t);

struct EvolveResult {
  EvolutionRecord record;
  // State at t_end, or at the termination/handoff time: when
  // record.handoff_time is set this is u at that time and the recorded tail
  // is its exact linear continuation.
  WaveFunction final_state;
};

using EvolveObserver = std::function<void(double t, const WaveFunction& state)>;

/// Strang evolution from config.t_start to config.t_end (either direction)
/// with blowup / boundary / singularity monitors and optional linear handoff.
/// The observer, when given, is called at every recorded pre-handoff time.
EvolveResult evolve(const WaveFunction& psi0, const PotentialSpec& spec,
                    const SolverConfig& config,
                    const EvolveObserver& observer = {});

struct DecompositionResult {
  EvolutionRecord u_record;  // nonlinear run
  EvolutionRecord v_record;  // exact linear flow from the same initial state
  std::vector<double> times;
  std::vector<double> w_l2;     // ||u - v||_2
  std::vector<double> w_sigma;  // adapted-frame norm of u - v
};

/// Splits u(t) = v(t) + w(t) with v the exact linear evolution of the shared
/// initial state; after a handoff both components evolve linearly, so the
/// remainder norms are reported as the exact constants they become.
DecompositionResult decompose_linear_remainder(const WaveFunction& psi0,
                                               const PotentialSpec& spec,
                                               const SolverConfig& config);

/// decay_fit on one column of a record.
FitResult decay_fit(const EvolutionRecord& record, const std::string& column,
                    double window_lo, double window_hi,
                    FitModel model = FitModel::exponential);

}  // namespace qpnls
