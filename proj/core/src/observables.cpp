#include "qpnls/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "qpnls/fft.hpp"

namespace qpnls {

namespace {

// Multiplies amp elementwise by table[index along `axis`].
void multiply_axis(const Grid& grid, std::vector<std::complex<double>>& amp,
                   int axis, const std::vector<std::complex<double>>& table) {
  const std::size_t stride = grid.stride(axis);
  const std::size_t npts = static_cast<std::size_t>(grid.points(axis));
  for (std::size_t idx = 0; idx < amp.size(); ++idx) {
    amp[idx] *= table[(idx / stride) % npts];
  }
}

// In-place i d/dx_j via one axis transform pair; the inverse normalization is
// folded into the multiplier table.
void apply_i_deriv(const Grid& grid, std::vector<std::complex<double>>& amp,
                   int axis) {
  const int npts = grid.points(axis);
  const std::vector<double> freq = grid.frequencies(axis);
  std::vector<std::complex<double>> table(static_cast<std::size_t>(npts));
  for (int m = 0; m < npts; ++m) {
    table[static_cast<std::size_t>(m)] = {-freq[static_cast<std::size_t>(m)] /
                                              static_cast<double>(npts),
                                          0.0};
  }
  fft::forward_axis(grid, amp.data(), axis);
  multiply_axis(grid, amp, axis, table);
  fft::backward_axis(grid, amp.data(), axis);
}

}  // namespace

double energy(const WaveFunction& psi, const PotentialSpec& spec,
              double lambda, double sigma) {
  if (!psi.grid) throw std::invalid_argument("energy: empty wavefunction");
  const Grid& grid = *psi.grid;
  const int n = grid.n();
  if (spec.n() != n) {
    throw std::invalid_argument("energy: potential dimension mismatch");
  }
  spec.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("energy: sigma must be > 0");

  std::vector<std::vector<double>> axis_v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::vector<double> xs = grid.coordinates(j);
    std::vector<double> v(xs.size());
    const double w2 = spec.omega[static_cast<std::size_t>(j)] *
                      spec.omega[static_cast<std::size_t>(j)];
    const double dj = static_cast<double>(spec.delta[static_cast<std::size_t>(j)]);
    const double bj = spec.linear_coeff(static_cast<std::size_t>(j));
    for (std::size_t m = 0; m < xs.size(); ++m) {
      v[m] = 0.5 * dj * w2 * xs[m] * xs[m] + bj * xs[m];
    }
    axis_v[static_cast<std::size_t>(j)] = std::move(v);
  }

  const bool cubic = sigma == 1.0;
  double pot = 0.0;
  double inter = 0.0;
  for (std::size_t idx = 0; idx < psi.amp.size(); ++idx) {
    const double density = std::norm(psi.amp[idx]);
    if (density == 0.0) continue;
    double v = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t stride = grid.stride(j);
      const std::size_t npts = static_cast<std::size_t>(grid.points(j));
      v += axis_v[static_cast<std::size_t>(j)][(idx / stride) % npts];
    }
    pot += v * density;
    inter += cubic ? density * density : std::pow(density, sigma + 1.0);
  }
  const double dvol = grid.cell_volume();
  const double grad = grad_norm(psi);
  return 0.5 * grad * grad + pot * dvol +
         lambda / (sigma + 1.0) * inter * dvol;
}

WaveFunction apply_operator(const WaveFunction& psi, OperatorTag tag,
                            const PotentialSpec& spec, double t) {
  if (!psi.grid) {
    throw std::invalid_argument("apply_operator: empty wavefunction");
  }
  const Grid& grid = *psi.grid;
  if (spec.n() != grid.n()) {
    throw std::invalid_argument("apply_operator: potential dimension mismatch");
  }
  WaveFunction out = psi;
  if (tag.kind == OperatorKind::identity) return out;
  const int j = tag.direction;
  if (j < 0 || j >= grid.n()) {
    throw std::invalid_argument("apply_operator: direction out of range");
  }

  const std::size_t uj = static_cast<std::size_t>(j);
  const TrajectoryPair pair = classical_pair(spec.delta[uj], spec.omega[uj], t);
  double coeff_x = 0.0;
  double coeff_d = 0.0;
  if (tag.kind == OperatorKind::heisenberg_j) {
    coeff_x = -static_cast<double>(spec.delta[uj]) * spec.omega[uj] *
              spec.omega[uj] * pair.g;
    coeff_d = pair.h;
  } else {
    coeff_x = pair.h;
    coeff_d = pair.g;
  }

  const std::vector<double> xs = grid.coordinates(j);
  const std::size_t stride = grid.stride(j);
  const std::size_t npts = static_cast<std::size_t>(grid.points(j));
  for (std::size_t idx = 0; idx < out.amp.size(); ++idx) {
    out.amp[idx] *= coeff_x * xs[(idx / stride) % npts];
  }
  if (coeff_d != 0.0) {
    std::vector<std::complex<double>> deriv = psi.amp;
    apply_i_deriv(grid, deriv, j);
    for (std::size_t idx = 0; idx < out.amp.size(); ++idx) {
      out.amp[idx] += coeff_d * deriv[idx];
    }
  }
  return out;
}

double adapted_sigma_norm(const WaveFunction& psi, const PotentialSpec& spec,
                          double t) {
  double j2 = 0.0;
  double h2 = 0.0;
  for (int j = 0; j < psi.grid->n(); ++j) {
    const double nj = lp_norm(
        apply_operator(psi, {OperatorKind::heisenberg_j, j}, spec, t), 2.0);
    const double nh = lp_norm(
        apply_operator(psi, {OperatorKind::heisenberg_h, j}, spec, t), 2.0);
    j2 += nj * nj;
    h2 += nh * nh;
  }
  return lp_norm(psi, 2.0) + std::sqrt(j2) + std::sqrt(h2);
}

GnReport gn_check(const WaveFunction& psi, const PotentialSpec& spec, double t,
                  double p) {
  if (!psi.grid) throw std::invalid_argument("gn_check: empty wavefunction");
  const int n = psi.grid->n();
  if (spec.n() != n) {
    throw std::invalid_argument("gn_check: potential dimension mismatch");
  }
  if (n < 2 || spec.delta[0] != -1 || spec.delta[1] != 1) {
    throw std::invalid_argument(
        "gn_check: needs direction 0 repulsive and direction 1 confining");
  }
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("gn_check: p must be finite and >= 2");
  }
  if (n >= 3 && !(p < 2.0 * n / (n - 2.0))) {
    throw std::invalid_argument("gn_check: p outside the admissible range");
  }

  constexpr double kWeightFloor = 1e-6;
  const double delta_p = n * (0.5 - 1.0 / p);
  const double e = delta_p / n;  // = 1/2 - 1/p

  const TrajectoryPair pair1 = classical_pair(spec.delta[1], spec.omega[1], t);
  const double ch = classical_pair(spec.delta[0], spec.omega[0], t).h;
  const double c1 = std::abs(pair1.h);                  // |cos w2 t|
  const double s1 = std::abs(spec.omega[1] * pair1.g);  // |sin w2 t|

  const double l2 = lp_norm(psi, 2.0);
  const double j0 =
      lp_norm(apply_operator(psi, {OperatorKind::heisenberg_j, 0}, spec, t), 2.0);
  const double j1 =
      lp_norm(apply_operator(psi, {OperatorKind::heisenberg_j, 1}, spec, t), 2.0);
  const double h1 =
      lp_norm(apply_operator(psi, {OperatorKind::heisenberg_h, 1}, spec, t), 2.0);
  double free_prod = 1.0;
  for (int j = 2; j < n; ++j) {
    PotentialSpec free_dir = spec;
    free_dir.delta[static_cast<std::size_t>(j)] = 0;
    free_prod *= lp_norm(
        apply_operator(psi, {OperatorKind::heisenberg_j, j}, free_dir, 0.0), 2.0);
  }

  const double common =
      std::pow(j0 / ch, e) * std::pow(l2, 1.0 - delta_p) * std::pow(free_prod, e);
  const bool cos_ok = c1 >= kWeightFloor;
  const bool sin_ok = s1 >= kWeightFloor;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  GnReport report;
  report.p = p;
  report.delta_p = delta_p;
  report.lhs = lp_norm(psi, p);
  report.rhs_cos = cos_ok ? common * std::pow(j1 / c1, e) : nan;
  report.rhs_sin = sin_ok ? common * std::pow(h1 / s1, e) : nan;
  report.rhs_combined = common * std::pow((j1 + h1) / (c1 + s1), e);
  if (!cos_ok) {
    report.form = GnForm::sin_weighted;
    report.rhs = report.rhs_sin;
  } else if (!sin_ok) {
    report.form = GnForm::cos_weighted;
    report.rhs = report.rhs_cos;
  } else {
    report.form = GnForm::combined;
    report.rhs = report.rhs_combined;
  }
  if (!(report.rhs > 0.0) || !std::isfinite(report.rhs)) {
    throw DegenerateWeightError("gn_check: weighted product degenerated");
  }
  report.ratio = report.lhs / report.rhs;
  return report;
}

FitResult decay_fit(const std::vector<double>& times,
                    const std::vector<double>& values, double window_lo,
                    double window_hi, FitModel model) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("decay_fit: series length mismatch");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < window_lo || t > window_hi) continue;
    if (!(values[i] > 0.0)) {
      throw std::invalid_argument("decay_fit: non-positive value in window");
    }
    if (model == FitModel::power) {
      if (!(t > 0.0)) {
        throw std::invalid_argument("decay_fit: power fit needs t > 0");
      }
      xs.push_back(std::log(t));
    } else {
      xs.push_back(t);
    }
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 8) {
    throw InsufficientDataError("decay_fit: fewer than 8 samples in window");
  }

  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("decay_fit: degenerate abscissa");
  }

  FitResult fit;
  fit.rate = sxy / sxx;
  fit.intercept = my - fit.rate * mx;
  fit.count = static_cast<int>(xs.size());
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.rate * xs[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / m);
  return fit;
}

}  // namespace qpnls
