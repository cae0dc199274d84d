#pragma once

#include <utility>
#include <vector>

namespace qpnls {

/// Potential definition for V(x) = sum_j delta_j omega_j^2 x_j^2 / 2 + b_j x_j,
/// with delta_j in {-1, 0, +1} and delta_j * b_j = 0 for every direction.
struct PotentialSpec {
  std::vector<double> omega;  ///< per-direction frequency, all > 0
  std::vector<int> delta;     ///< per-direction sign: -1 repulsive, 0 free, +1 confining
  std::vector<double> b;      ///< per-direction linear coefficient (only on free
                              ///< directions); empty means no linear term at all

  int n() const { return static_cast<int>(omega.size()); }
  /// Linear coefficient for direction j, treating an empty b as all zeros.
  double linear_coeff(std::size_t j) const { return b.empty() ? 0.0 : b[j]; }
  bool has_linear_term() const;
  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

/// Fundamental solution pair (g, h) of xdd + delta * omega^2 * x = 0 with
/// g(0)=0, g'(0)=1, h(0)=1, h'(0)=0.  Satisfies h^2 + delta omega^2 g^2 = 1.
struct TrajectoryPair {
  double g = 0.0;
  double h = 1.0;
};

/// (sinh(wt)/w, cosh(wt)) for delta=-1; (t, 1) for delta=0; (sin(wt)/w, cos(wt)) for delta=+1.
TrajectoryPair classical_pair(int delta, double omega, double t);

/// Defect of the invariant h^2 + delta omega^2 g^2 = 1, measured relative to the
/// magnitude of its terms (denominator max(1, h^2 + omega^2 g^2)) and accumulated
/// with FMA-compensated products so the evaluation itself is exact to a few ulp.
/// For |omega t| up to a few units the relative and absolute defects coincide.
double wronskian_defect(int delta, double omega, double t);

/// Signed number of zeros of g in the open interval between 0 and t
/// (positive count for t > 0, negated for t < 0).  Zero unless delta=+1.
int maslov_index(int delta, double omega, double t);

/// All kernel singular times k*pi/omega_j (k >= 1) of confining directions in (0, t_max],
/// as (time, direction index) sorted ascending.  Empty if no direction has delta=+1.
std::vector<std::pair<double, int>> singular_times(const PotentialSpec& spec, double t_max);

/// Smallest singular duration pi/omega_j over confining directions (+inf if none).
double first_singular_duration(const PotentialSpec& spec);

/// Sufficient-condition threshold for omega_1:
///   Lambda*(1+omega2) + [2 sigma^2 / (2-(n-2) sigma)] * (1+omega2) * ln(1+omega2).
/// Requires sigma < 2/(n-2) when n >= 3.
double domin_threshold(int n, double sigma, double omega2, double Lambda);

}  // namespace qpnls
