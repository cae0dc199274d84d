#include "qpnls/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qpnls {

bool PotentialSpec::has_linear_term() const {
  for (double bj : b)
    if (bj != 0.0) return true;
  return false;
}

void PotentialSpec::validate() const {
  const std::size_t n = omega.size();
  if (n == 0) throw std::invalid_argument("PotentialSpec: dimension must be >= 1");
  if (delta.size() != n || (!b.empty() && b.size() != n))
    throw std::invalid_argument(
        "PotentialSpec: omega, delta, b must have equal length (b may be empty)");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(omega[j] > 0.0) || !std::isfinite(omega[j]))
      throw std::invalid_argument("PotentialSpec: omega[" + std::to_string(j) +
                                  "] must be positive and finite");
    if (delta[j] != -1 && delta[j] != 0 && delta[j] != 1)
      throw std::invalid_argument("PotentialSpec: delta[" + std::to_string(j) +
                                  "] must be -1, 0 or +1");
    if (b.empty()) continue;
    if (!std::isfinite(b[j]))
      throw std::invalid_argument("PotentialSpec: b[" + std::to_string(j) + "] must be finite");
    if (delta[j] != 0 && b[j] != 0.0)
      throw std::invalid_argument("PotentialSpec: delta[" + std::to_string(j) +
                                  "]*b[" + std::to_string(j) + "] must vanish");
  }
}

TrajectoryPair classical_pair(int delta, double omega, double t) {
  if (!(omega > 0.0))
    throw std::invalid_argument("classical_pair: omega must be positive");
  if (!std::isfinite(t))
    throw std::invalid_argument("classical_pair: t must be finite");
  switch (delta) {
    case -1:
      return {std::sinh(omega * t) / omega, std::cosh(omega * t)};
    case 0:
      return {t, 1.0};
    case 1:
      return {std::sin(omega * t) / omega, std::cos(omega * t)};
    default:
      throw std::invalid_argument("classical_pair: delta must be -1, 0 or +1");
  }
}

double wronskian_defect(int delta, double omega, double t) {
  const TrajectoryPair p = classical_pair(delta, omega, t);
  const double w = omega * p.g;
  // Exact products: h^2 = hh + he, (omega g)^2 = ww + we.
  const double hh = p.h * p.h;
  const double he = std::fma(p.h, p.h, -hh);
  const double ww = w * w;
  const double we = std::fma(w, w, -ww);
  double defect;
  if (delta == -1) {
    defect = ((hh - ww) - 1.0) + (he - we);
  } else if (delta == 1) {
    defect = ((hh + ww) - 1.0) + (he + we);
  } else {
    defect = (hh - 1.0) + he;
  }
  const double scale = std::max(1.0, hh + std::abs(static_cast<double>(delta)) * ww);
  return defect / scale;
}

int maslov_index(int delta, double omega, double t) {
  if (delta != 1) return 0;
  const double k = std::floor(std::abs(t) * omega / M_PI);
  const int count = static_cast<int>(k);
  return t >= 0.0 ? count : -count;
}

std::vector<std::pair<double, int>> singular_times(const PotentialSpec& spec, double t_max) {
  spec.validate();
  if (!std::isfinite(t_max))
    throw std::invalid_argument("singular_times: t_max must be finite");
  std::vector<std::pair<double, int>> out;
  for (int j = 0; j < spec.n(); ++j) {
    if (spec.delta[j] != 1) continue;
    const double period = M_PI / spec.omega[j];
    for (int k = 1; k * period <= t_max; ++k) out.emplace_back(k * period, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double first_singular_duration(const PotentialSpec& spec) {
  double d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < spec.n(); ++j)
    if (spec.delta[j] == 1) d = std::min(d, M_PI / spec.omega[j]);
  return d;
}

double domin_threshold(int n, double sigma, double omega2, double Lambda) {
  if (n < 1) throw std::domain_error("domin_threshold: n must be >= 1");
  if (!(sigma > 0.0)) throw std::domain_error("domin_threshold: sigma must be positive");
  if (!(omega2 >= 0.0)) throw std::domain_error("domin_threshold: omega2 must be >= 0");
  if (!(Lambda > 0.0)) throw std::domain_error("domin_threshold: Lambda must be positive");
  const double denom = 2.0 - (n - 2) * sigma;
  if (n >= 3 && !(denom > 0.0))
    throw std::domain_error("domin_threshold: sigma must satisfy sigma < 2/(n-2) for n >= 3");
  const double coeff = 2.0 * sigma * sigma / denom;
  return Lambda * (1.0 + omega2) + coeff * (1.0 + omega2) * std::log1p(omega2);
}

}  // namespace qpnls
