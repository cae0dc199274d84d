#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qpnls/grid.hpp"
#include "qpnls/trajectories.hpp"

namespace qpnls {

/// Both time-dependent weights of a norm inequality degenerated below floor.
struct DegenerateWeightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A fit window selected fewer than the minimum number of samples.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OperatorKind { identity, heisenberg_j, heisenberg_h };

/// Selects one of the first-order operators that commute with the linear flow:
/// J_j(t) = (-delta_j omega_j^2 g_j(t)) x_j + h_j(t) (i d_j),
/// H_j(t) = h_j(t) x_j + g_j(t) (i d_j).
struct OperatorTag {
  OperatorKind kind = OperatorKind::identity;
  int direction = 0;
};

/// (1/2)||grad u||^2 + [lambda/(sigma+1)] ||u||_{2s+2}^{2s+2} + int V |u|^2,
/// with V including the linear b.x terms.
double energy(const WaveFunction& psi, const PotentialSpec& spec, double lambda,
              double sigma);

/// Applies J_j(t), H_j(t), or the identity; x_j acts by multiplication and
/// i d_j spectrally.  Pure.
WaveFunction apply_operator(const WaveFunction& psi, OperatorTag tag,
                            const PotentialSpec& spec, double t);

/// ||u||_2 + sum_j ||J_j(t) u||_2 + sum_j ||H_j(t) u||_2.  Constant along
/// linear evolutions; coincides with sigma_norm at t = 0.
double adapted_sigma_norm(const WaveFunction& psi, const PotentialSpec& spec,
                          double t);

enum class GnForm { cos_weighted, sin_weighted, combined };

/// Weighted Gagliardo-Nirenberg measurement: lhs = ||psi||_p, rhs = the
/// weighted product of operator norms without the inequality constant, so
/// ratio = lhs/rhs is an empirical lower bound on that constant.
struct GnReport {
  double p = 2.0;
  double delta_p = 0.0;  // n(1/2 - 1/p)
  double lhs = 0.0;
  double rhs = 0.0;    // headline form
  double ratio = 0.0;  // lhs / rhs
  GnForm form = GnForm::combined;
  double rhs_cos = 0.0;       // NaN when |cos w2 t| is below floor
  double rhs_sin = 0.0;       // NaN when |sin w2 t| is below floor
  double rhs_combined = 0.0;  // always finite
};

/// Requires n >= 2 with direction 0 repulsive and direction 1 confining, and
/// 2 <= p < 2n/(n-2) (p finite).  The degenerate weight (|cos| or |sin| below
/// 1e-6) switches the headline form automatically; otherwise the combined
/// form is the headline.
GnReport gn_check(const WaveFunction& psi, const PotentialSpec& spec, double t,
                  double p);

enum class FitModel { exponential, power };

/// Least-squares fit of log(values) against t (exponential) or log t (power).
struct FitResult {
  double rate = 0.0;       // fitted slope
  double intercept = 0.0;  // fitted log-intercept
  double residual_rms = 0.0;
  int count = 0;
};

/// Fits over window_lo <= t <= window_hi.  Throws InsufficientDataError when
/// fewer than 8 samples fall in the window, std::invalid_argument when any
/// selected value is not positive (or, for the power model, any t <= 0).
FitResult decay_fit(const std::vector<double>& times,
                    const std::vector<double>& values, double window_lo,
                    double window_hi, FitModel model = FitModel::exponential);

}  // namespace qpnls
