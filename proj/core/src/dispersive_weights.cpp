#include "qpnls/dispersive_weights.hpp"

#include <algorithm>
#include <cmath>

#include "qpnls/linear_propagator.hpp"
#include "qpnls/observables.hpp"

namespace qpnls {

namespace {

double envelope(const PotentialSpec& spec, double t) {
  const int n = spec.n();
  double log_prod = 0.0;
  for (int j = 0; j < n; ++j) {
    const std::size_t uj = static_cast<std::size_t>(j);
    const double g = classical_pair(spec.delta[uj], spec.omega[uj], t).g;
    // confining directions refocus at k pi / omega; near the exact zeros of
    // sin the value is pure roundoff amplification, so call it singular
    const bool singular = spec.delta[uj] == 1
                              ? std::abs(g) * spec.omega[uj] <= 1e-9
                              : g == 0.0;
    if (singular) {
      throw SingularTimeError("weight_value: g vanished away from t = 0");
    }
    log_prod += std::log(std::abs(g));
  }
  return std::exp(-log_prod / n) / (2.0 * M_PI);
}

}  // namespace

double default_delta_cut(const PotentialSpec& spec) {
  double cut = 0.25;
  for (std::size_t j = 0; j < spec.omega.size(); ++j) {
    if (spec.omega[j] > 0.0) cut = std::min(cut, 1.0 / (4.0 * spec.omega[j]));
  }
  return cut;
}

double weight_value(const PotentialSpec& spec, double t, double delta_cut) {
  spec.validate();
  if (!(delta_cut > 0.0)) {
    throw std::invalid_argument("weight_value: delta_cut must be > 0");
  }
  if (t == 0.0) throw ZeroTimeError("weight_value: t = 0");
  if (std::abs(t) <= delta_cut) {
    return delta_cut * envelope(spec, delta_cut) / std::abs(t);
  }
  return envelope(spec, t);
}

WeightProfile make_weight_profile(const PotentialSpec& spec, double t_lo,
                                  double t_hi, int count, double delta_cut) {
  spec.validate();
  if (!(t_hi > t_lo)) {
    throw std::invalid_argument("make_weight_profile: empty window");
  }
  if (count < 2) {
    throw std::invalid_argument("make_weight_profile: count must be >= 2");
  }
  WeightProfile profile;
  profile.delta_cut = delta_cut > 0.0 ? delta_cut : default_delta_cut(spec);
  profile.dt = (t_hi - t_lo) / count;
  profile.times.reserve(static_cast<std::size_t>(count));
  profile.values.reserve(static_cast<std::size_t>(count));

  std::vector<double> tube_omega;
  for (std::size_t j = 0; j < spec.omega.size(); ++j) {
    if (spec.delta[j] == 1) tube_omega.push_back(spec.omega[j]);
  }

  for (int i = 0; i < count; ++i) {
    const double t = t_lo + (i + 0.5) * profile.dt;
    if (std::abs(t) < 1e-12) continue;
    bool excised = false;
    for (const double w : tube_omega) {
      const double phase = std::abs(t) * w / M_PI;
      const double k = std::round(phase);
      if (k >= 1.0 && std::abs(phase - k) * M_PI / w < 1e-4 * M_PI / w) {
        excised = true;
        break;
      }
    }
    if (excised) continue;
    profile.times.push_back(t);
    profile.values.push_back(weight_value(spec, t, profile.delta_cut));
  }
  return profile;
}

double weak_l1_norm(const WeightProfile& profile) {
  if (profile.values.size() < 100) {
    throw InsufficientDataError("weak_l1_norm: fewer than 100 samples");
  }
  if (!(profile.dt > 0.0)) {
    throw std::invalid_argument("weak_l1_norm: nonpositive sample spacing");
  }
  std::vector<double> sorted = profile.values;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  // sup over levels lambda = v_(k) of lambda * |{w > lambda}|, with the
  // strictly-greater set measured as the k cells ranked above position k.
  // The strict convention keeps tied head samples (e.g. the symmetric pair
  // around a 1/|t| singularity) from double-counting the peak cell.
  double best = 0.0;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    best = std::max(best, static_cast<double>(k) * profile.dt * sorted[k]);
  }
  return best;
}

ExponentTriple exponent_triple(int n, double sigma) {
  if (n < 1) throw std::invalid_argument("exponent_triple: n must be >= 1");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("exponent_triple: sigma must be > 0");
  }
  const double denom = 2.0 - (n - 2.0) * sigma;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("exponent_triple: sigma not subcritical");
  }
  ExponentTriple triple;
  triple.r = 2.0 * sigma + 2.0;
  triple.q = 4.0 * (sigma + 1.0) / (n * sigma);
  triple.k = 2.0 * sigma * (2.0 * sigma + 2.0) / denom;
  return triple;
}

bool is_sharp_admissible(double q, double r, double gamma) {
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  if (q == 2.0 && std::isinf(r) && gamma == 1.0) return false;
  const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
  return std::abs(1.0 / q + gamma * inv_r - gamma / 2.0) <= 1e-12;
}

double effective_dimension_check(int n, int d, const WeightProfile& profile) {
  if (n < 1 || d < n) {
    throw std::invalid_argument("effective_dimension_check: needs d >= n >= 1");
  }
  WeightProfile reinterpreted = profile;
  const double e = static_cast<double>(n) / static_cast<double>(d);
  for (double& v : reinterpreted.values) v = std::pow(v, e);
  return weak_l1_norm(reinterpreted);
}

}  // namespace qpnls
