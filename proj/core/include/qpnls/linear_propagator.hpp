#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpnls/grid.hpp"
#include "qpnls/trajectories.hpp"

namespace qpnls {

/// Requested duration is too close to a kernel singularity (zero of some g_j).
struct SingularTimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The grid cannot resolve the required chirp/quadrature phases, or cannot
/// contain the transported state.
struct NyquistError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The kernel path requires the reduced potential (all b_j = 0).
struct LinearTermError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// How one direction of a kernel application is realized on the grid.
enum class MehlerRoute {
  shear,       ///< chirp * band-limited free flow * chirp; exactly unitary
  quadrature,  ///< direct chirped-transform (Bluestein) quadrature of the kernel
};

/// Factorized data for one direction of a single kernel application.
struct DirectionStep {
  TrajectoryPair pair;     ///< (g, h) at the step duration
  double gamma = 0.0;      ///< shear chirp rate (h-1)/g, evaluated in closed form
  double inv_g = 0.0;      ///< scaled-transform evaluation factor 1/g
  double amplitude = 0.0;  ///< kernel amplitude (2*pi*|g|)^(-1/2)
  std::complex<double> branch{1.0, 0.0};  ///< continuous-branch phase from t=0
  int maslov = 0;          ///< signed count of kernel singularities crossed
  MehlerRoute route = MehlerRoute::shear;
};

/// One exact linear step, factorized per direction.  Only constructed when
/// every |g_j| clears the singular-time floor and the grid passes the
/// resolution and state-transport gates; applying a plan preserves the L2
/// norm exactly in exact arithmetic.
struct MehlerStepPlan {
  double duration = 0.0;
  std::vector<DirectionStep> directions;
};

/// Builds the factorization for one kernel application of the given duration.
/// `support` carries the measured spatial/spectral radii of the state the plan
/// will be applied to; the admissibility gates are state-aware.
/// Throws SingularTimeError, NyquistError, LinearTermError.
MehlerStepPlan make_mehler_plan(const Grid& grid, const PotentialSpec& spec,
                                double duration, const SupportRadii& support);

/// Applies a prepared plan in place (the reusable-plan path).
void mehler_apply_inplace(WaveFunction& psi, const MehlerStepPlan& plan);

/// U_V(t) psi via one application of the exact kernel.  Pure: returns a new
/// field.  Throws like make_mehler_plan; t = 0 returns a copy.
WaveFunction mehler_apply(const WaveFunction& psi, const PotentialSpec& spec,
                          double t);

/// Strang split-step reference propagator: half potential phase, exact kinetic
/// Fourier multiplier, half potential phase, `substeps` times.  Supports
/// b_j != 0.  Global error O((t/substeps)^2).
WaveFunction splitstep_linear(const WaveFunction& psi, const PotentialSpec& spec,
                              double t, int substeps);

/// U_V(t_to - t_from) psi, composing kernel applications adaptively: each
/// partial step is gated against the measured support of the current state,
/// and the remainder is split further whenever a single application would be
/// inadmissible (singular-time floors, chirp resolution, box transport).
/// Negative durations supported.  b_j != 0 is routed to splitstep_linear.
WaveFunction propagate_linear(const WaveFunction& psi, const PotentialSpec& spec,
                              double t_from, double t_to);

/// Pointwise samples of (U_V(t) psi) on a caller-chosen uniform lattice,
/// evaluated by direct quadrature of the kernel over the on-grid support of
/// psi.  The samples are true values even when the evolved state no longer
/// fits the original box.  out_points/out_extents define the output Grid
/// (same conventions as Grid).  Throws SingularTimeError when any |g_j| is
/// below the quadrature floor, NyquistError when the input grid cannot
/// resolve the integrand.
WaveFunction mehler_sample(const WaveFunction& psi, const PotentialSpec& spec,
                           double t, const std::vector<int>& out_points,
                           const std::vector<double>& out_extents);

}  // namespace qpnls
