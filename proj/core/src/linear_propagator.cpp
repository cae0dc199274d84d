#include "qpnls/linear_propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "qpnls/fft.hpp"

namespace qpnls {
namespace {

constexpr double kSingularFloor = 1e-3;   // floor on |sin(omega t)| at kernel zeros
constexpr double kPhaseGate = 0.9 * M_PI; // max tolerated phase increment per cell
constexpr double kBoxMargin = 0.95;       // fraction of box/band the state may fill

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

/// Multiplies amp elementwise by scale * prod_j tables[j][i_j] (empty table =
/// identity for that axis).
void multiply_axis_tables(std::vector<std::complex<double>>& amp, const Grid& grid,
                          const std::vector<std::vector<std::complex<double>>>& tables,
                          std::complex<double> scale = {1.0, 0.0}) {
  const int n = grid.n();
  const std::size_t size = amp.size();
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::complex<double> f = scale;
    for (int j = 0; j < n; ++j) {
      if (tables[j].empty()) continue;
      const std::size_t i = (idx / grid.stride(j)) % static_cast<std::size_t>(grid.points(j));
      f *= tables[j][i];
    }
    amp[idx] *= f;
  }
}

bool all_identity(const std::vector<std::vector<std::complex<double>>>& tables) {
  for (const auto& t : tables)
    if (!t.empty()) return false;
  return true;
}

/// One-axis kernel quadrature onto a uniform output lattice:
///   out[m] = amp * dy * sum_l exp(i [h (x_m^2 + y_l^2)/2 - x_m y_l] / g) in[l]
/// with x_m = x0 + m*dxo, y_l = y0 + l*dy, realized as a Bluestein-style
/// linear convolution (exact up to roundoff; the offsets decompose as
/// m*l = (m^2 + l^2 - (m-l)^2)/2).
struct AxisQuadrature {
  int n_in = 0;
  int n_out = 0;
  int pad = 0;
  std::vector<std::complex<double>> in_diag;
  std::vector<std::complex<double>> out_diag;
  std::vector<std::complex<double>> kernel_hat;

  AxisQuadrature(int nin, double y0, double dy, int nout, double x0, double dxo,
                 double g, double h, std::complex<double> amp)
      : n_in(nin), n_out(nout),
        pad(static_cast<int>(next_pow2(static_cast<std::size_t>(nin) + nout))),
        in_diag(nin), out_diag(nout), kernel_hat(pad, {0.0, 0.0}) {
    const double alpha = dxo * dy / g;
    for (int k = 0; k < n_out; ++k)
      kernel_hat[k] = std::polar(1.0, 0.5 * alpha * double(k) * double(k));
    for (int k = 1; k < n_in; ++k)
      kernel_hat[pad - k] = std::polar(1.0, 0.5 * alpha * double(k) * double(k));
    fft::dft_rows(kernel_hat.data(), pad, 1, -1);

    for (int l = 0; l < n_in; ++l) {
      const double y = y0 + l * dy;
      const double phase =
          0.5 * h * y * y / g - 0.5 * alpha * double(l) * double(l) - x0 * (l * dy) / g;
      in_diag[l] = std::polar(1.0, phase);
    }
    const std::complex<double> front = amp * (dy / pad);
    for (int m = 0; m < n_out; ++m) {
      const double x = x0 + m * dxo;
      const double phase = 0.5 * h * x * x / g - 0.5 * alpha * double(m) * double(m) -
                           y0 * (m * dxo) / g - x0 * y0 / g;
      out_diag[m] = front * std::polar(1.0, phase);
    }
  }

  /// scratch must hold `pad` entries.
  void apply_line(const std::complex<double>* in, std::size_t in_stride,
                  std::complex<double>* out, std::size_t out_stride,
                  std::complex<double>* scratch) const {
    for (int l = 0; l < n_in; ++l) scratch[l] = in[l * in_stride] * in_diag[l];
    std::fill(scratch + n_in, scratch + pad, std::complex<double>(0.0, 0.0));
    fft::dft_rows(scratch, pad, 1, -1);
    for (int p = 0; p < pad; ++p) scratch[p] *= kernel_hat[p];
    fft::dft_rows(scratch, pad, 1, +1);
    for (int m = 0; m < n_out; ++m) out[m * out_stride] = scratch[m] * out_diag[m];
  }
};

/// Same-grid quadrature along one axis of psi, batched over grid lines.
void apply_quadrature_axis(WaveFunction& psi, int axis, const AxisQuadrature& q) {
  const Grid& grid = *psi.grid;
  const int npts = grid.points(axis);
  const std::size_t stride = grid.stride(axis);
  const std::size_t inner = stride;
  const std::size_t lines = grid.size() / static_cast<std::size_t>(npts);
  const std::size_t chunk = std::min<std::size_t>(lines, 64);
  std::vector<std::complex<double>> buf(chunk * q.pad);
  std::vector<std::size_t> bases(chunk);

  std::size_t line = 0;
  while (line < lines) {
    const std::size_t count = std::min(chunk, lines - line);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t li = line + r;
      const std::size_t outer = li / inner;
      const std::size_t in_block = li % inner;
      const std::size_t base = outer * (static_cast<std::size_t>(npts) * inner) + in_block;
      bases[r] = base;
      std::complex<double>* row = buf.data() + r * q.pad;
      for (int l = 0; l < npts; ++l) row[l] = psi.amp[base + l * stride] * q.in_diag[l];
      std::fill(row + npts, row + q.pad, std::complex<double>(0.0, 0.0));
    }
    fft::dft_rows(buf.data(), q.pad, static_cast<int>(count), -1);
    for (std::size_t r = 0; r < count; ++r) {
      std::complex<double>* row = buf.data() + r * q.pad;
      for (int p = 0; p < q.pad; ++p) row[p] *= q.kernel_hat[p];
    }
    fft::dft_rows(buf.data(), q.pad, static_cast<int>(count), +1);
    for (std::size_t r = 0; r < count; ++r) {
      const std::complex<double>* row = buf.data() + r * q.pad;
      for (int m = 0; m < npts; ++m)
        psi.amp[bases[r] + m * stride] = row[m] * q.out_diag[m];
    }
    line += count;
  }
}

double shear_rate(int delta, double omega, double t) {
  switch (delta) {
    case 0: return 0.0;
    case -1: return omega * std::tanh(0.5 * omega * t);
    default: return -omega * std::tan(0.5 * omega * t);
  }
}

/// Continuous-branch phase of the kernel amplitude from the t->0+ principal
/// branch: exp(-i pi/4 sign(t) - i pi/2 maslov).
std::complex<double> branch_phase(double t, int maslov) {
  return std::polar(1.0, -0.25 * M_PI * sign_of(t) - 0.5 * M_PI * maslov);
}

bool singular_floor_ok(const PotentialSpec& spec, double t) {
  for (int j = 0; j < spec.n(); ++j) {
    if (spec.delta[j] != +1) continue;
    const double phase = spec.omega[j] * t;
    const double k = std::round(phase / M_PI);
    if (k != 0.0 && std::abs(std::sin(phase)) < kSingularFloor) return false;
  }
  return true;
}

std::optional<MehlerStepPlan> try_make_plan(const Grid& grid, const PotentialSpec& spec,
                                            double duration, const SupportRadii& support,
                                            std::string* why) {
  MehlerStepPlan plan;
  plan.duration = duration;
  plan.directions.resize(grid.n());
  for (int j = 0; j < grid.n(); ++j) {
    DirectionStep& d = plan.directions[j];
    d.pair = classical_pair(spec.delta[j], spec.omega[j], duration);
    const double g = d.pair.g;
    const double h = d.pair.h;
    if (!std::isfinite(g) || !std::isfinite(h)) {
      if (why) *why = "trajectory overflow in direction " + std::to_string(j);
      return std::nullopt;
    }
    d.gamma = shear_rate(spec.delta[j], spec.omega[j], duration);
    d.inv_g = 1.0 / g;
    d.amplitude = 1.0 / std::sqrt(2.0 * M_PI * std::abs(g));
    d.maslov = maslov_index(spec.delta[j], spec.omega[j], duration);
    d.branch = branch_phase(duration, d.maslov);

    const double L = grid.extent(j);
    const double dx = grid.spacing(j);
    const double ximax = grid.max_frequency(j);
    const double X = support.spatial[j];
    const double B = support.spectral[j];
    const double curvature = spec.delta[j] * spec.omega[j] * spec.omega[j];

    // Exact transport of the support under the quadratic flow; the output
    // must stay representable for any route.
    const double x_out = std::abs(h) * X + std::abs(g) * B;
    const double xi_out = std::abs(curvature * g) * X + std::abs(h) * B;
    if (x_out > kBoxMargin * L) {
      if (why)
        *why = "transported state exceeds the box in direction " + std::to_string(j);
      return std::nullopt;
    }
    if (xi_out > kBoxMargin * ximax) {
      if (why)
        *why = "transported state exceeds the frequency band in direction " +
               std::to_string(j);
      return std::nullopt;
    }

    const bool shear_phase_ok = std::abs(d.gamma) * L * dx < kPhaseGate;
    const bool shear_mid_ok = std::abs(d.gamma) * X + B <= kBoxMargin * ximax;
    if (shear_phase_ok && shear_mid_ok) {
      d.route = MehlerRoute::shear;
      continue;
    }
    const double quad_band = (std::abs(h) + 1.0) * L / std::abs(g) + B;
    if (quad_band <= kBoxMargin * ximax) {
      d.route = MehlerRoute::quadrature;
      continue;
    }
    if (why)
      *why = "chirp unresolvable on this grid in direction " + std::to_string(j);
    return std::nullopt;
  }
  return plan;
}

void check_preconditions(const WaveFunction& psi, const PotentialSpec& spec) {
  spec.validate();
  if (!psi.grid) throw std::invalid_argument("propagator: field has no grid");
  if (psi.grid->n() != spec.n())
    throw std::invalid_argument("propagator: grid/potential dimension mismatch");
}

}  // namespace

MehlerStepPlan make_mehler_plan(const Grid& grid, const PotentialSpec& spec,
                                double duration, const SupportRadii& support) {
  spec.validate();
  if (grid.n() != spec.n())
    throw std::invalid_argument("make_mehler_plan: grid/potential dimension mismatch");
  if (spec.has_linear_term())
    throw LinearTermError("make_mehler_plan: kernel path requires all b_j = 0");
  if (duration == 0.0)
    throw std::invalid_argument("make_mehler_plan: zero duration");
  if (!singular_floor_ok(spec, duration))
    throw SingularTimeError("make_mehler_plan: duration too close to a kernel singularity");
  std::string why;
  auto plan = try_make_plan(grid, spec, duration, support, &why);
  if (!plan) throw NyquistError("make_mehler_plan: " + why);
  return *plan;
}

void mehler_apply_inplace(WaveFunction& psi, const MehlerStepPlan& plan) {
  const Grid& grid = *psi.grid;
  const int n = grid.n();

  // Outer chirp tables for the shear-route directions (gamma = 0 is skipped:
  // the chirp is the identity there).
  std::vector<std::vector<std::complex<double>>> chirp(n);
  bool all_shear = true;
  for (int j = 0; j < n; ++j) {
    const DirectionStep& d = plan.directions[j];
    if (d.route != MehlerRoute::shear) {
      all_shear = false;
      continue;
    }
    if (d.gamma == 0.0) continue;
    const auto& x = grid.coordinates(j);
    chirp[j].resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      chirp[j][i] = std::polar(1.0, 0.5 * d.gamma * x[i] * x[i]);
  }
  const bool have_chirp = !all_identity(chirp);
  if (have_chirp) multiply_axis_tables(psi.amp, grid, chirp);

  if (all_shear) {
    // Fused free flow: one full transform, combined kinetic multiplier, one
    // inverse transform; branch corrections and the 1/N normalization fold
    // into the multiplier scale.
    std::vector<std::vector<std::complex<double>>> kin(n);
    std::complex<double> scale{1.0, 0.0};
    for (int j = 0; j < n; ++j) {
      const DirectionStep& d = plan.directions[j];
      scale *= d.branch * std::polar(1.0, 0.25 * M_PI * sign_of(d.pair.g));
      const auto& xi = grid.frequencies(j);
      kin[j].resize(xi.size());
      for (std::size_t m = 0; m < xi.size(); ++m)
        kin[j][m] = std::polar(1.0, -0.5 * d.pair.g * xi[m] * xi[m]);
    }
    scale /= static_cast<double>(grid.size());
    fft::forward(grid, psi.amp.data());
    multiply_axis_tables(psi.amp, grid, kin, scale);
    fft::backward(grid, psi.amp.data());
  } else {
    for (int j = 0; j < n; ++j) {
      const DirectionStep& d = plan.directions[j];
      if (d.route != MehlerRoute::shear) continue;
      const auto& xi = grid.frequencies(j);
      const std::complex<double> scale =
          d.branch * std::polar(1.0, 0.25 * M_PI * sign_of(d.pair.g)) /
          static_cast<double>(grid.points(j));
      std::vector<std::vector<std::complex<double>>> kin(n);
      kin[j].resize(xi.size());
      for (std::size_t m = 0; m < xi.size(); ++m)
        kin[j][m] = scale * std::polar(1.0, -0.5 * d.pair.g * xi[m] * xi[m]);
      fft::forward_axis(grid, psi.amp.data(), j);
      multiply_axis_tables(psi.amp, grid, kin);
      fft::backward_axis(grid, psi.amp.data(), j);
    }
    for (int j = 0; j < n; ++j) {
      const DirectionStep& d = plan.directions[j];
      if (d.route != MehlerRoute::quadrature) continue;
      const double L = grid.extent(j);
      const double dy = grid.spacing(j);
      const AxisQuadrature q(grid.points(j), -L, dy, grid.points(j), -L, dy,
                             d.pair.g, d.pair.h, d.branch * d.amplitude);
      apply_quadrature_axis(psi, j, q);
    }
  }

  if (have_chirp) multiply_axis_tables(psi.amp, grid, chirp);
}

WaveFunction mehler_apply(const WaveFunction& psi, const PotentialSpec& spec,
                          double t) {
  check_preconditions(psi, spec);
  if (spec.has_linear_term())
    throw LinearTermError("mehler_apply: kernel path requires all b_j = 0");
  WaveFunction out = psi;
  if (t == 0.0) return out;
  const SupportRadii support = measure_support(psi);
  const MehlerStepPlan plan = make_mehler_plan(*psi.grid, spec, t, support);
  mehler_apply_inplace(out, plan);
  return out;
}

WaveFunction splitstep_linear(const WaveFunction& psi, const PotentialSpec& spec,
                              double t, int substeps) {
  check_preconditions(psi, spec);
  if (substeps < 1)
    throw std::invalid_argument("splitstep_linear: substeps must be >= 1");
  WaveFunction out = psi;
  if (t == 0.0) return out;
  const Grid& grid = *psi.grid;
  const int n = grid.n();
  const double dt = t / substeps;

  std::vector<std::vector<std::complex<double>>> vhalf(n), vfull(n), kin(n);
  for (int j = 0; j < n; ++j) {
    const auto& x = grid.coordinates(j);
    vhalf[j].resize(x.size());
    vfull[j].resize(x.size());
    const double c = 0.5 * spec.delta[j] * spec.omega[j] * spec.omega[j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = c * x[i] * x[i] + spec.b[j] * x[i];
      vhalf[j][i] = std::polar(1.0, -0.5 * dt * v);
      vfull[j][i] = std::polar(1.0, -dt * v);
    }
    const auto& xi = grid.frequencies(j);
    kin[j].resize(xi.size());
    const double norm = (j == 0) ? 1.0 / static_cast<double>(grid.size()) : 1.0;
    for (std::size_t m = 0; m < xi.size(); ++m)
      kin[j][m] = norm * std::polar(1.0, -0.5 * dt * xi[m] * xi[m]);
  }

  multiply_axis_tables(out.amp, grid, vhalf);
  for (int s = 0; s < substeps; ++s) {
    fft::forward(grid, out.amp.data());
    multiply_axis_tables(out.amp, grid, kin);
    fft::backward(grid, out.amp.data());
    if (s + 1 < substeps) multiply_axis_tables(out.amp, grid, vfull);
  }
  multiply_axis_tables(out.amp, grid, vhalf);
  return out;
}

WaveFunction propagate_linear(const WaveFunction& psi, const PotentialSpec& spec,
                              double t_from, double t_to) {
  check_preconditions(psi, spec);
  const double delta = t_to - t_from;
  if (delta == 0.0) return psi;
  if (spec.has_linear_term()) {
    const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / 0.002)));
    return splitstep_linear(psi, spec, delta, substeps);
  }

  WaveFunction out = psi;
  const Grid& grid = *psi.grid;
  double done = 0.0;
  int applications = 0;
  constexpr int kMaxApplications = 4096;
  constexpr int kMaxSplit = 64;

  while (std::abs(delta - done) > 1e-14 * std::max(1.0, std::abs(delta))) {
    if (applications >= kMaxApplications)
      throw NyquistError("propagate_linear: composition did not converge on this grid");
    const double rem = delta - done;
    const SupportRadii support = measure_support(out);
    bool advanced = false;
    std::string why = "no admissible partial step";
    for (int m = 1; m <= kMaxSplit; ++m) {
      const double sub = rem / m;
      if (!singular_floor_ok(spec, sub)) continue;
      auto plan = try_make_plan(grid, spec, sub, support, &why);
      if (!plan) continue;
      mehler_apply_inplace(out, *plan);
      done += sub;
      ++applications;
      advanced = true;
      break;
    }
    if (!advanced) throw NyquistError("propagate_linear: " + why);
  }
  return out;
}

WaveFunction mehler_sample(const WaveFunction& psi, const PotentialSpec& spec,
                           double t, const std::vector<int>& out_points,
                           const std::vector<double>& out_extents) {
  check_preconditions(psi, spec);
  if (spec.has_linear_term())
    throw LinearTermError("mehler_sample: kernel path requires all b_j = 0");
  const Grid& grid = *psi.grid;
  const int n = grid.n();
  if (static_cast<int>(out_points.size()) != n ||
      static_cast<int>(out_extents.size()) != n)
    throw std::invalid_argument("mehler_sample: output lattice dimension mismatch");

  const SupportRadii support = measure_support(psi);
  std::vector<TrajectoryPair> pairs(n);
  for (int j = 0; j < n; ++j) {
    pairs[j] = classical_pair(spec.delta[j], spec.omega[j], t);
    const double scale = spec.delta[j] == 0 ? 1.0 : 1.0 / spec.omega[j];
    if (std::abs(pairs[j].g) < kSingularFloor * scale)
      throw SingularTimeError("mehler_sample: |g| below the quadrature floor in direction " +
                              std::to_string(j));
    // The quadrature is a rectangle rule over the on-grid support of psi; it
    // is spectrally accurate only while the integrand (kernel chirp times
    // state) stays below the input band.
    const double band = (std::abs(pairs[j].h) * support.spatial[j] + out_extents[j]) /
                            std::abs(pairs[j].g) +
                        support.spectral[j];
    if (band > kBoxMargin * grid.max_frequency(j))
      throw NyquistError("mehler_sample: integrand unresolvable on the input grid in direction " +
                         std::to_string(j));
  }

  auto out_grid = std::make_shared<const Grid>(out_points, out_extents);
  std::vector<int> dims(n);
  for (int j = 0; j < n; ++j) dims[j] = grid.points(j);
  std::vector<std::complex<double>> cur = psi.amp;

  for (int j = 0; j < n; ++j) {
    const int nin = dims[j];
    const int nout = out_points[j];
    const int maslov = maslov_index(spec.delta[j], spec.omega[j], t);
    const std::complex<double> amp =
        branch_phase(t, maslov) / std::sqrt(2.0 * M_PI * std::abs(pairs[j].g));
    const AxisQuadrature q(nin, -grid.extent(j), grid.spacing(j), nout,
                           -out_grid->extent(j), out_grid->spacing(j), pairs[j].g,
                           pairs[j].h, amp);

    std::size_t inner = 1, outer = 1;
    for (int k = j + 1; k < n; ++k) inner *= static_cast<std::size_t>(dims[k]);
    for (int k = 0; k < j; ++k) outer *= static_cast<std::size_t>(dims[k]);

    std::vector<std::complex<double>> next(outer * static_cast<std::size_t>(nout) * inner);
    std::vector<std::complex<double>> scratch(q.pad);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::complex<double>* in_line =
            cur.data() + o * (static_cast<std::size_t>(nin) * inner) + i;
        std::complex<double>* out_line =
            next.data() + o * (static_cast<std::size_t>(nout) * inner) + i;
        q.apply_line(in_line, inner, out_line, inner, scratch.data());
      }
    cur = std::move(next);
    dims[j] = nout;
  }

  WaveFunction result(out_grid);
  result.amp = std::move(cur);
  return result;
}

}  // namespace qpnls
