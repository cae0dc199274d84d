#pragma once

#include <stdexcept>
#include <vector>

#include "qpnls/trajectories.hpp"

namespace qpnls {

/// The weight is evaluated at t = 0 where it is undefined.
struct ZeroTimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// min(1/(4 omega_j), 0.25) over directions with omega_j > 0 (0.25 when none).
double default_delta_cut(const PotentialSpec& spec);

/// Per-dimension dispersive envelope: c/|t| for 0 < |t| <= delta_cut and
/// (2 pi)^(-1) prod_j |g_j(t)|^(-1/n) beyond, with c fixed by continuity at
/// delta_cut.  Throws ZeroTimeError at t = 0 and SingularTimeError when some
/// g_j(t) vanishes.
double weight_value(const PotentialSpec& spec, double t, double delta_cut);

struct WeightProfile {
  std::vector<double> times;
  std::vector<double> values;
  double dt = 0.0;  // nominal sample spacing (each sample carries dt of measure)
  double delta_cut = 0.0;
};

/// Midpoint samples of weight_value on [t_lo, t_hi], skipping t = 0 and thin
/// tubes (half-width 1e-4 pi/omega_j) around the focusing times k pi/omega_j
/// of confining directions.  delta_cut <= 0 selects default_delta_cut.
WeightProfile make_weight_profile(const PotentialSpec& spec, double t_lo,
                                  double t_hi, int count,
                                  double delta_cut = 0.0);

/// Discrete weak-L1 functional max_k (k dt) v_(k) over the descending
/// rearrangement v_(1) >= v_(2) >= ...  Requires at least 100 samples.
double weak_l1_norm(const WeightProfile& profile);

struct ExponentTriple {
  double q = 0.0;
  double r = 0.0;
  double k = 0.0;
};

/// r = 2s+2, q = 4(s+1)/(n s), k = 2s(2s+2)/(2-(n-2)s); requires the
/// denominator positive (s subcritical).
ExponentTriple exponent_triple(int n, double sigma);

/// Scaling line 1/q + gamma/r = gamma/2 with q, r >= 2, excluding the
/// forbidden endpoint (q, r, gamma) = (2, inf, 1).
bool is_sharp_admissible(double q, double r, double gamma);

/// Weak-L1 of the weight reinterpreted in dimension d >= n via w_d = w^(n/d).
double effective_dimension_check(int n, int d, const WeightProfile& profile);

}  // namespace qpnls
