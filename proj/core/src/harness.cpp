#include "qpnls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "qpnls/dispersive_weights.hpp"
#include "qpnls/grid.hpp"
#include "qpnls/linear_propagator.hpp"
#include "qpnls/nonlinear_integrator.hpp"
#include "qpnls/observables.hpp"
#include "qpnls/scattering.hpp"
#include "qpnls/trajectories.hpp"
#include "sha256.hpp"

namespace qpnls {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string now_utc_iso() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_table(const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << fmt(row[c]);
    }
    out << "\n";
  }
  return out.str();
}

const json& req_field(const json& j, const char* key, const char* ctx) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(std::string(ctx) + ": missing field '" + key +
                                "'");
  }
  return *it;
}

template <typename T>
T opt_field(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

PotentialSpec parse_potential(const json& cfg) {
  const json& p = req_field(cfg, "potential", "config");
  PotentialSpec spec;
  spec.omega = req_field(p, "omega", "potential").get<std::vector<double>>();
  spec.delta = req_field(p, "delta", "potential").get<std::vector<int>>();
  spec.b = opt_field(p, "b", std::vector<double>(spec.omega.size(), 0.0));
  spec.validate();
  return spec;
}

std::shared_ptr<const Grid> parse_grid(const json& cfg) {
  const json& g = req_field(cfg, "grid", "config");
  return std::make_shared<Grid>(
      req_field(g, "points", "grid").get<std::vector<int>>(),
      req_field(g, "extents", "grid").get<std::vector<double>>());
}

WaveFunction parse_initial(const json& cfg, std::shared_ptr<const Grid> grid,
                           const PotentialSpec& spec, std::uint64_t seed) {
  const json& init = req_field(cfg, "initial", "config");
  const std::string type = req_field(init, "type", "initial").get<std::string>();
  const int n = grid->n();
  const std::vector<double> zeros(static_cast<std::size_t>(n), 0.0);
  const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);

  if (type == "gaussian") {
    return make_gaussian(std::move(grid), opt_field(init, "amplitude", 1.0),
                         opt_field(init, "center", zeros),
                         opt_field(init, "width", ones),
                         opt_field(init, "momentum", zeros));
  }
  if (type == "hermite") {
    return make_hermite(std::move(grid), spec,
                        req_field(init, "index", "initial").get<std::vector<int>>());
  }
  if (type == "file") {
    WaveFunction loaded =
        load_wavefunction(req_field(init, "path", "initial").get<std::string>());
    if (!loaded.grid->same_layout(*grid)) {
      throw std::invalid_argument(
          "initial: snapshot grid differs from the configured grid");
    }
    return loaded;
  }
  if (type == "random") {
    const int count = opt_field(init, "count", 4);
    const double base_width = opt_field(init, "width_scale", 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WaveFunction acc(grid);
    for (int k = 0; k < count; ++k) {
      std::vector<double> center(static_cast<std::size_t>(n));
      std::vector<double> width(static_cast<std::size_t>(n));
      std::vector<double> momentum(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        const std::size_t uj = static_cast<std::size_t>(j);
        center[uj] = (unit(rng) - 0.5) * 0.5 * grid->extent(j);
        width[uj] = (0.5 + unit(rng)) * base_width;
        momentum[uj] = (unit(rng) - 0.5) * 4.0;
      }
      const std::complex<double> phase = std::polar(1.0, 2.0 * M_PI * unit(rng));
      const WaveFunction bump = make_gaussian(grid, 1.0, center, width, momentum);
      for (std::size_t i = 0; i < acc.amp.size(); ++i) {
        acc.amp[i] += phase * bump.amp[i];
      }
    }
    if (opt_field(init, "normalize", true)) {
      const double m = mass(acc);
      if (m > 0.0) {
        const double scale = 1.0 / std::sqrt(m);
        for (auto& a : acc.amp) a *= scale;
      }
    }
    return acc;
  }
  throw std::invalid_argument("initial: unknown type '" + type + "'");
}

SolverConfig parse_solver(const json& cfg, int dimension) {
  SolverConfig sc;
  const auto it = cfg.find("solver");
  if (it != cfg.end()) {
    const json& s = *it;
    sc.dt = opt_field(s, "dt", sc.dt);
    sc.t_start = opt_field(s, "t_start", sc.t_start);
    sc.t_end = opt_field(s, "t_end", sc.t_end);
    sc.lambda = opt_field(s, "lambda", sc.lambda);
    sc.sigma = opt_field(s, "sigma", sc.sigma);
    sc.blowup_gradient_factor =
        opt_field(s, "blowup_gradient_factor", sc.blowup_gradient_factor);
    sc.boundary_mass_tol = opt_field(s, "boundary_mass_tol", sc.boundary_mass_tol);
    sc.output_every = opt_field(s, "output_every", sc.output_every);
    sc.handoff_residual_tol =
        opt_field(s, "handoff_residual_tol", sc.handoff_residual_tol);
    sc.max_post_handoff_samples =
        opt_field(s, "max_post_handoff_samples", sc.max_post_handoff_samples);
  }
  sc.validate(dimension);
  return sc;
}

void emit_text(const fs::path& out, const std::string& rel,
               const std::string& text, std::vector<std::string>& outputs) {
  write_file(out / rel, text);
  outputs.push_back(rel);
}

void emit_snapshot(const fs::path& out, const std::string& rel,
                   const WaveFunction& psi, std::vector<std::string>& outputs) {
  save_wavefunction(psi, (out / rel).string());
  outputs.push_back(rel);
  outputs.push_back(rel + ".json");
}

int termination_code(TerminationReason r) {
  switch (r) {
    case TerminationReason::completed: return 0;
    case TerminationReason::blowup_detected: return 1;
    case TerminationReason::boundary_breach: return 2;
    case TerminationReason::singularity_fault: return 3;
  }
  return -1;
}

json run_evolve(const json& cfg, const fs::path& out, std::uint64_t seed,
                std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  std::shared_ptr<const Grid> grid = parse_grid(cfg);
  const SolverConfig solver = parse_solver(cfg, grid->n());
  const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);

  EvolveResult res = evolve(psi0, spec, solver);
  emit_text(out, "record.csv", res.record.to_csv(), outputs);
  emit_text(out, "record.json", res.record.to_json_string(), outputs);
  emit_snapshot(out, "initial.qpwf", psi0, outputs);
  emit_snapshot(out, "final.qpwf", res.final_state, outputs);

  const EvolutionSample& first = res.record.samples.front();
  const EvolutionSample& last = res.record.samples.back();
  json summary;
  summary["termination"] = to_string(res.record.termination);
  summary["termination_code"] = termination_code(res.record.termination);
  summary["termination_time"] = res.record.termination_time;
  summary["mass_drift"] = std::abs(last.mass - first.mass) / first.mass;
  summary["energy_drift"] = std::abs(last.energy - first.energy) /
                            std::max(1.0, std::abs(first.energy));
  summary["final_sup"] = last.sup_norm;
  summary["handoff_time"] =
      res.record.handoff_time ? *res.record.handoff_time : -1.0;
  summary["residual_integral"] = res.record.residual_integral;
  summary["residual_final"] = last.residual_bound;
  return summary;
}

json run_linear_test(const json& cfg, const fs::path& out, std::uint64_t seed,
                     std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  std::shared_ptr<const Grid> grid = parse_grid(cfg);
  const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);
  const json& lt = req_field(cfg, "linear_test", "config");
  const double t = req_field(lt, "t", "linear_test").get<double>();
  const std::vector<int> substeps =
      opt_field(lt, "substeps", std::vector<int>{64, 128});

  const WaveFunction ref = mehler_apply(psi0, spec, t);
  const double m0 = mass(psi0);

  std::vector<std::vector<double>> rows;
  std::vector<double> errs;
  for (const int m : substeps) {
    const WaveFunction approx = splitstep_linear(psi0, spec, t, m);
    double acc = 0.0;
    for (std::size_t i = 0; i < approx.amp.size(); ++i) {
      acc += std::norm(approx.amp[i] - ref.amp[i]);
    }
    const double err = std::sqrt(acc * grid->cell_volume());
    errs.push_back(err);
    rows.push_back({static_cast<double>(m), err});
  }
  emit_text(out, "linear_test.csv", csv_table({"substeps", "l2_error"}, rows),
            outputs);

  double order = 0.0;
  if (errs.size() >= 2 && errs.back() > 0.0) {
    order = std::log(errs[errs.size() - 2] / errs.back()) /
            std::log(static_cast<double>(substeps.back()) /
                     static_cast<double>(substeps[substeps.size() - 2]));
  }

  const WaveFunction leg1 = propagate_linear(psi0, spec, 0.0, 0.4 * t);
  const WaveFunction two_leg = propagate_linear(leg1, spec, 0.4 * t, t);
  double acc = 0.0;
  for (std::size_t i = 0; i < two_leg.amp.size(); ++i) {
    acc += std::norm(two_leg.amp[i] - ref.amp[i]);
  }
  const double group_err = std::sqrt(acc * grid->cell_volume());

  const WaveFunction back = propagate_linear(ref, spec, t, 0.0);
  acc = 0.0;
  for (std::size_t i = 0; i < back.amp.size(); ++i) {
    acc += std::norm(back.amp[i] - psi0.amp[i]);
  }
  const double roundtrip_err = std::sqrt(acc * grid->cell_volume());

  json summary;
  summary["error_coarse"] = errs.empty() ? 0.0 : errs.front();
  summary["error_fine"] = errs.empty() ? 0.0 : errs.back();
  summary["order"] = order;
  summary["group_law_error"] = group_err;
  summary["roundtrip_error"] = roundtrip_err;
  summary["unitarity_drift"] = std::abs(mass(ref) - m0) / m0;
  emit_text(out, "linear_test.json", json(summary).dump(2), outputs);
  return summary;
}

std::vector<double> parse_times(const json& j, const char* ctx) {
  if (j.is_array()) return j.get<std::vector<double>>();
  const double lo = req_field(j, "lo", ctx).get<double>();
  const double hi = req_field(j, "hi", ctx).get<double>();
  const int count = req_field(j, "count", ctx).get<int>();
  if (count < 2 || !(hi > lo)) {
    throw std::invalid_argument(std::string(ctx) + ": bad time window");
  }
  std::vector<double> times(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    times[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return times;
}

json run_dispersion_fit(const json& cfg, const fs::path& out,
                        std::uint64_t seed, std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  const json& df = req_field(cfg, "dispersion_fit", "config");
  const std::string mode = opt_field<std::string>(df, "mode", "sampled");
  const json& window = req_field(df, "window", "dispersion_fit");
  const double w_lo = window.at(0).get<double>();
  const double w_hi = window.at(1).get<double>();
  const FitModel model =
      opt_field<std::string>(df, "model", "power") == "exponential"
          ? FitModel::exponential
          : FitModel::power;

  FitResult fit;
  std::vector<std::vector<double>> rows;
  if (mode == "record") {
    std::shared_ptr<const Grid> grid = parse_grid(cfg);
    const SolverConfig solver = parse_solver(cfg, grid->n());
    const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);
    const std::string column =
        opt_field<std::string>(df, "column", "sup_norm");
    EvolveResult res = evolve(psi0, spec, solver);
    emit_text(out, "record.csv", res.record.to_csv(), outputs);
    const std::vector<double> ts = res.record.times();
    const std::vector<double> vs = res.record.series(column);
    for (std::size_t i = 0; i < ts.size(); ++i) rows.push_back({ts[i], vs[i]});
    fit = decay_fit(ts, vs, w_lo, w_hi, model);
  } else if (mode == "sampled") {
    std::shared_ptr<const Grid> grid = parse_grid(cfg);
    const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);
    const std::vector<double> times =
        parse_times(req_field(df, "times", "dispersion_fit"), "dispersion_fit");
    double p = kInf;
    const auto pit = df.find("p");
    if (pit != df.end() && !pit->is_string()) p = pit->get<double>();

    const int n = grid->n();
    std::vector<int> pts = opt_field(
        df, "points", std::vector<int>(static_cast<std::size_t>(n),
                                       n <= 2 ? 256 : 64));
    const SupportRadii support = measure_support(psi0);
    std::vector<double> fixed_extents =
        opt_field(df, "extents", std::vector<double>{});

    std::vector<double> values;
    for (const double t : times) {
      std::vector<double> extents(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) {
        const std::size_t uj = static_cast<std::size_t>(j);
        if (!fixed_extents.empty()) {
          extents[uj] = fixed_extents[uj];
        } else {
          const TrajectoryPair pr =
              classical_pair(spec.delta[uj], spec.omega[uj], t);
          extents[uj] = 1.15 * (std::abs(pr.h) * support.spatial[uj] +
                                std::abs(pr.g) * support.spectral[uj]);
        }
      }
      const WaveFunction probe = mehler_sample(psi0, spec, t, pts, extents);
      const double v = lp_norm(probe, p);
      values.push_back(v);
      rows.push_back({t, v});
    }
    fit = decay_fit(times, values, w_lo, w_hi, model);
  } else {
    throw std::invalid_argument("dispersion_fit: unknown mode '" + mode + "'");
  }

  emit_text(out, "dispersion_fit.csv", csv_table({"t", "value"}, rows),
            outputs);
  json summary;
  summary["rate"] = fit.rate;
  summary["intercept"] = fit.intercept;
  summary["residual_rms"] = fit.residual_rms;
  summary["count"] = fit.count;
  emit_text(out, "dispersion_fit.json", json(summary).dump(2), outputs);
  return summary;
}

json run_weights(const json& cfg, const fs::path& out, std::uint64_t,
                 std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  const json& w = req_field(cfg, "weights", "config");
  const json& window = req_field(w, "window", "weights");
  const double lo = window.at(0).get<double>();
  const double hi = window.at(1).get<double>();
  const int count = opt_field(w, "count", 100000);
  const double delta_cut = opt_field(w, "delta_cut", 0.0);
  const double sigma = opt_field(w, "sigma", 1.0);

  const WeightProfile profile =
      make_weight_profile(spec, lo, hi, count, delta_cut);
  const double weak = weak_l1_norm(profile);
  const ExponentTriple triple = exponent_triple(spec.n(), sigma);
  const double gamma = spec.n() / 2.0;

  std::vector<std::vector<double>> rows;
  const std::size_t stride = std::max<std::size_t>(1, profile.times.size() / 4096);
  for (std::size_t i = 0; i < profile.times.size(); i += stride) {
    rows.push_back({profile.times[i], profile.values[i]});
  }
  emit_text(out, "weights.csv", csv_table({"t", "weight"}, rows), outputs);

  json summary;
  summary["weak_l1"] = weak;
  summary["delta_cut"] = profile.delta_cut;
  summary["samples"] = profile.values.size();
  summary["q"] = triple.q;
  summary["r"] = triple.r;
  summary["k"] = triple.k;
  summary["triple_admissible"] = is_sharp_admissible(triple.q, triple.r, gamma);
  summary["forbidden_endpoint_rejected"] = !is_sharp_admissible(2.0, kInf, 1.0);
  const auto dit = w.find("effective_dimension");
  if (dit != w.end()) {
    const int d = dit->get<int>();
    summary["effective_dimension"] = d;
    summary["effective_weak_l1"] = effective_dimension_check(spec.n(), d, profile);
  }
  emit_text(out, "weights.json", json(summary).dump(2), outputs);
  return summary;
}

json run_gn_check(const json& cfg, const fs::path& out, std::uint64_t seed,
                  std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  std::shared_ptr<const Grid> grid = parse_grid(cfg);
  const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);
  const json& gc = req_field(cfg, "gn_check", "config");
  const double p = req_field(gc, "p", "gn_check").get<double>();
  const std::vector<double> times =
      parse_times(req_field(gc, "times", "gn_check"), "gn_check");

  std::vector<std::vector<double>> rows;
  double ratio_min = kInf;
  double ratio_max = 0.0;
  for (const double t : times) {
    const WaveFunction u_t =
        t == 0.0 ? psi0 : propagate_linear(psi0, spec, 0.0, t);
    const GnReport rep = gn_check(u_t, spec, t, p);
    ratio_min = std::min(ratio_min, rep.ratio);
    ratio_max = std::max(ratio_max, rep.ratio);
    rows.push_back({t, rep.lhs, rep.rhs, rep.ratio,
                    static_cast<double>(static_cast<int>(rep.form)),
                    rep.rhs_cos, rep.rhs_sin, rep.rhs_combined});
  }
  emit_text(out, "gn_check.csv",
            csv_table({"t", "lhs", "rhs", "ratio", "form", "rhs_cos",
                       "rhs_sin", "rhs_combined"},
                      rows),
            outputs);

  json summary;
  summary["p"] = p;
  summary["ratio_min"] = ratio_min;
  summary["ratio_max"] = ratio_max;
  summary["spread"] = ratio_min > 0.0 ? ratio_max / ratio_min : kInf;
  emit_text(out, "gn_check.json", json(summary).dump(2), outputs);
  return summary;
}

json run_scattering(const json& cfg, const fs::path& out, std::uint64_t seed,
                    std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  std::shared_ptr<const Grid> grid = parse_grid(cfg);
  const SolverConfig solver = parse_solver(cfg, grid->n());
  const WaveFunction psi0 = parse_initial(cfg, grid, spec, seed);
  const json& sc = req_field(cfg, "scattering", "config");
  std::vector<double> requested =
      parse_times(req_field(sc, "times", "scattering"), "scattering");
  std::sort(requested.begin(), requested.end());

  const double capture_tol =
      0.5 * solver.dt * static_cast<double>(solver.output_every) + 1e-12;
  std::vector<std::pair<double, WaveFunction>> captured;
  std::vector<bool> done(requested.size(), false);
  EvolveObserver observer = [&](double t, const WaveFunction& state) {
    for (std::size_t i = 0; i < requested.size(); ++i) {
      if (!done[i] && std::abs(t - requested[i]) <= capture_tol) {
        captured.emplace_back(t, state);
        done[i] = true;
      }
    }
  };

  EvolveResult res = evolve(psi0, spec, solver, observer);
  emit_text(out, "record.csv", res.record.to_csv(), outputs);
  emit_text(out, "record.json", res.record.to_json_string(), outputs);

  std::vector<double> times;
  std::vector<WaveFunction> pullbacks;
  for (const auto& [t, state] : captured) {
    times.push_back(t);
    pullbacks.push_back(propagate_linear(state, spec, t, 0.0));
  }
  std::size_t post_count = 0;
  if (res.record.handoff_time) {
    const double t_h = *res.record.handoff_time;
    const WaveFunction phi0 =
        propagate_linear(res.final_state, spec, t_h, 0.0);
    for (std::size_t i = 0; i < requested.size(); ++i) {
      if (!done[i] && requested[i] > t_h && requested[i] <= solver.t_end) {
        times.push_back(requested[i]);
        pullbacks.push_back(phi0);
        done[i] = true;
        ++post_count;
      }
    }
  }
  if (times.size() < 2) {
    throw std::invalid_argument(
        "scattering: fewer than 2 requested times were reachable");
  }

  const WaveFunction& ref = pullbacks.back();
  std::vector<std::vector<double>> rows;
  double first_sigma = 0.0;
  double last_sigma = 0.0;
  bool decreasing = true;
  double prev_sigma = kInf;
  for (std::size_t i = 0; i < pullbacks.size(); ++i) {
    WaveFunction diff = pullbacks[i];
    for (std::size_t k = 0; k < diff.amp.size(); ++k) diff.amp[k] -= ref.amp[k];
    const double ds = sigma_norm(diff);
    const double dl2 = lp_norm(diff, 2.0);
    double cauchy = 0.0;
    if (i > 0) {
      WaveFunction step = pullbacks[i];
      for (std::size_t k = 0; k < step.amp.size(); ++k) {
        step.amp[k] -= pullbacks[i - 1].amp[k];
      }
      cauchy = lp_norm(step, 2.0);
    }
    rows.push_back({times[i], ds, dl2, cauchy});
    if (i == 0) first_sigma = ds;
    last_sigma = ds;
    if (i + 1 < pullbacks.size() && ds > prev_sigma * 1.0000001) {
      decreasing = false;
    }
    prev_sigma = ds;
  }
  emit_text(out, "scattering.csv",
            csv_table({"t", "sigma_distance", "l2_distance", "cauchy_l2"}, rows),
            outputs);

  json summary;
  summary["sigma_distance_first"] = first_sigma;
  summary["sigma_distance_last"] = last_sigma;
  summary["decreasing"] = decreasing;
  summary["points"] = times.size();
  summary["post_handoff_points"] = post_count;
  summary["handoff_time"] =
      res.record.handoff_time ? *res.record.handoff_time : -1.0;
  summary["residual_integral"] = res.record.residual_integral;
  emit_text(out, "scattering.json", json(summary).dump(2), outputs);
  return summary;
}

json run_wave_operator(const json& cfg, const fs::path& out, std::uint64_t seed,
                       std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  std::shared_ptr<const Grid> grid = parse_grid(cfg);
  SolverConfig solver = parse_solver(cfg, grid->n());
  const WaveFunction datum = parse_initial(cfg, grid, spec, seed);
  const json& wo = req_field(cfg, "wave_operator", "config");
  const double t_start = req_field(wo, "t_start", "wave_operator").get<double>();
  const double lp_tol = req_field(wo, "lp_tolerance", "wave_operator").get<double>();
  const double rt_scale = opt_field(wo, "roundtrip_dt_scale", 0.0);

  WaveOperatorResult res = wave_operator(datum, spec, solver, t_start, lp_tol);
  emit_text(out, "record.csv", res.record.to_csv(), outputs);
  emit_text(out, "record.json", res.record.to_json_string(), outputs);
  emit_snapshot(out, "state_at_zero.qpwf", res.state_at_zero, outputs);

  const double r = 2.0 * solver.sigma + 2.0;
  json summary;
  summary["dispersed_lp"] = lp_norm(res.prepared_start, r);
  summary["t_start"] = t_start;

  if (rt_scale > 0.0) {
    SolverConfig back = solver;
    back.dt = solver.dt * rt_scale;
    back.t_start = 0.0;
    back.t_end = t_start;
    back.handoff_residual_tol = 0.0;
    EvolveResult rev = evolve(res.state_at_zero, spec, back);
    const WaveFunction pulled =
        propagate_linear(rev.final_state, spec, t_start, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < pulled.amp.size(); ++i) {
      acc += std::norm(pulled.amp[i] - datum.amp[i]);
    }
    summary["roundtrip_l2"] = std::sqrt(acc * grid->cell_volume());
    summary["roundtrip_dt_scale"] = rt_scale;
  }
  emit_text(out, "wave_operator.json", json(summary).dump(2), outputs);
  return summary;
}

json run_check_condition(const json& cfg, const fs::path& out, std::uint64_t,
                         std::vector<std::string>& outputs) {
  const PotentialSpec spec = parse_potential(cfg);
  const json& cc = req_field(cfg, "check_condition", "config");
  const double Lambda = req_field(cc, "Lambda", "check_condition").get<double>();
  const double sigma = opt_field(cc, "sigma", 1.0);

  double omega_rep = 0.0;
  double omega_other = 0.0;
  for (std::size_t j = 0; j < spec.omega.size(); ++j) {
    if (spec.delta[j] == -1) {
      omega_rep = omega_rep == 0.0 ? spec.omega[j]
                                   : std::min(omega_rep, spec.omega[j]);
    } else {
      omega_other = std::max(omega_other, spec.omega[j]);
    }
  }
  if (omega_rep == 0.0) {
    throw std::invalid_argument("check_condition: no repulsive direction");
  }
  const double omega2 = opt_field(cc, "omega2", omega_other);
  const double threshold = domin_threshold(spec.n(), sigma, omega2, Lambda);

  json summary;
  summary["threshold"] = threshold;
  summary["omega_repulsive_min"] = omega_rep;
  summary["omega2"] = omega2;
  summary["Lambda"] = Lambda;
  summary["sigma"] = sigma;
  summary["satisfied"] = omega_rep > threshold;
  emit_text(out, "check_condition.json", json(summary).dump(2), outputs);
  return summary;
}

RunOutcome run_text_impl(const std::string& config_text,
                         const std::string& out_dir, std::uint64_t seed,
                         bool resume);

json run_sweep(const json& cfg, const fs::path& out, std::uint64_t seed,
               bool resume, std::vector<std::string>& outputs) {
  const json& sw = req_field(cfg, "sweep", "config");
  const json& base = req_field(sw, "base", "sweep");
  if (opt_field<std::string>(base, "kind", "") == "sweep") {
    throw std::invalid_argument("sweep: nested sweeps are not supported");
  }
  json axes = json::array();
  if (sw.contains("axes")) {
    axes = sw.at("axes");
  } else {
    axes.push_back(req_field(sw, "axis", "sweep"));
  }
  if (axes.empty()) throw std::invalid_argument("sweep: no axes");

  std::vector<std::string> pointers;
  std::vector<std::vector<json>> values;
  std::size_t total = 1;
  for (const json& ax : axes) {
    pointers.push_back(req_field(ax, "pointer", "sweep axis").get<std::string>());
    values.push_back(req_field(ax, "values", "sweep axis")
                         .get<std::vector<json>>());
    if (values.back().empty()) {
      throw std::invalid_argument("sweep: empty value list");
    }
    total *= values.back().size();
  }
  if (total > 64) {
    throw std::invalid_argument("sweep: more than 64 points");
  }
  const int max_concurrent =
      std::clamp(opt_field(sw, "max_concurrent", 2), 1, 8);

  struct Point {
    std::string dir;
    std::vector<json> coords;
    json config;
  };
  std::vector<Point> points;
  for (std::size_t i = 0; i < total; ++i) {
    Point pt;
    pt.config = base;
    std::size_t rem = i;
    for (std::size_t a = 0; a < pointers.size(); ++a) {
      const std::size_t vi = rem % values[a].size();
      rem /= values[a].size();
      pt.coords.push_back(values[a][vi]);
      pt.config[json::json_pointer(pointers[a])] = values[a][vi];
    }
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", i);
    pt.dir = name;
    points.push_back(std::move(pt));
  }

  std::vector<RunOutcome> results(points.size());
  for (std::size_t start = 0; start < points.size();
       start += static_cast<std::size_t>(max_concurrent)) {
    const std::size_t stop = std::min(
        points.size(), start + static_cast<std::size_t>(max_concurrent));
    std::vector<std::future<RunOutcome>> wave;
    for (std::size_t i = start; i < stop; ++i) {
      wave.push_back(std::async(
          std::launch::async,
          [&points, &out, seed, resume, i] {
            return run_text_impl(points[i].config.dump(),
                                 (out / points[i].dir).string(), seed, resume);
          }));
    }
    for (std::size_t i = start; i < stop; ++i) {
      results[i] = wave[i - start].get();
    }
  }

  // Union of summary keys across points, sorted, for a stable header.
  std::set<std::string> key_set;
  std::vector<json> summaries(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (results[i].exit_code == 0) {
      const json manifest =
          json::parse(read_file(out / points[i].dir / "manifest.json"));
      summaries[i] = manifest.value("summary", json::object());
      for (const auto& kv : summaries[i].items()) {
        if (kv.value().is_number() || kv.value().is_boolean()) {
          key_set.insert(kv.key());
        }
      }
    }
  }
  std::vector<std::string> keys(key_set.begin(), key_set.end());

  std::ostringstream csv;
  csv << "index";
  for (std::size_t a = 0; a < pointers.size(); ++a) csv << ",axis_" << a;
  csv << ",exit_code,dir";
  for (const std::string& k : keys) csv << "," << k;
  csv << "\n";
  int completed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv << i;
    for (const json& c : points[i].coords) csv << "," << c.dump();
    csv << "," << results[i].exit_code << "," << points[i].dir;
    for (const std::string& k : keys) {
      csv << ",";
      if (!summaries[i].is_null() && summaries[i].contains(k)) {
        const json& v = summaries[i][k];
        csv << fmt(v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0)
                                  : v.get<double>());
      }
    }
    csv << "\n";
    if (results[i].exit_code == 0) ++completed;
  }
  emit_text(out, "summary.csv", csv.str(), outputs);

  json summary;
  summary["points"] = points.size();
  summary["completed"] = completed;
  summary["axes"] = pointers;
  return summary;
}

std::string error_type_name(const std::exception& e) {
  if (dynamic_cast<const SingularTimeError*>(&e)) return "SingularTime";
  if (dynamic_cast<const NyquistError*>(&e)) return "NyquistViolation";
  if (dynamic_cast<const LinearTermError*>(&e)) return "NonzeroLinearTerm";
  if (dynamic_cast<const ZeroTimeError*>(&e)) return "ZeroTime";
  if (dynamic_cast<const DegenerateWeightError*>(&e)) return "DegenerateWeight";
  if (dynamic_cast<const InsufficientDataError*>(&e)) return "InsufficientData";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  if (dynamic_cast<const std::bad_alloc*>(&e)) return "OutOfMemory";
  return "Runtime";
}

std::size_t memory_estimate_bytes(const json& cfg) {
  const auto git = cfg.find("grid");
  if (git == cfg.end() || !git->contains("points")) return 0;
  std::size_t cells = 1;
  for (const auto& p : git->at("points")) {
    cells *= p.get<std::size_t>();
  }
  return cells * 16 * 10;  // complex doubles x typical live array count
}

RunOutcome run_text_impl(const std::string& config_text,
                         const std::string& out_dir, std::uint64_t seed,
                         bool resume) {
  RunOutcome outcome;
  outcome.out_dir = out_dir;
  const fs::path out(out_dir);
  json resolved;
  try {
    fs::create_directories(out);
    const json cfg = json::parse(config_text);
    outcome.kind = req_field(cfg, "kind", "config").get<std::string>();
    resolved = cfg;
    resolved["seed"] = seed;
    const std::string config_hash = sha256_hex(resolved.dump());

    const fs::path manifest_path = out / "manifest.json";
    if (resume && fs::exists(manifest_path)) {
      try {
        const json manifest = json::parse(read_file(manifest_path));
        if (manifest.value("config_sha256", "") == config_hash) {
          outcome.resumed = true;
          outcome.manifest_path = manifest_path.string();
          for (const auto& entry : manifest.value("outputs", json::array())) {
            outcome.outputs.push_back(entry.value("path", ""));
          }
          return outcome;
        }
      } catch (const std::exception&) {
        // Unreadable manifest: fall through and redo the run.
      }
    }

    const std::string started = now_utc_iso();
    const auto t0 = std::chrono::steady_clock::now();
    json summary;
    if (outcome.kind == "evolve") {
      summary = run_evolve(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "linear-test") {
      summary = run_linear_test(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "dispersion-fit") {
      summary = run_dispersion_fit(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "weights") {
      summary = run_weights(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "gn-check") {
      summary = run_gn_check(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "scattering") {
      summary = run_scattering(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "wave-operator") {
      summary = run_wave_operator(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "check-condition") {
      summary = run_check_condition(cfg, out, seed, outcome.outputs);
    } else if (outcome.kind == "sweep") {
      summary = run_sweep(cfg, out, seed, resume, outcome.outputs);
    } else {
      throw std::invalid_argument("config: unknown kind '" + outcome.kind + "'");
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    json manifest;
    manifest["kind"] = outcome.kind;
    manifest["seed"] = seed;
    manifest["config_sha256"] = config_hash;
    manifest["resolved_config"] = resolved;
    manifest["versions"] = {{"qpnls", "0.1.0"}};
    manifest["started_utc"] = started;
    manifest["elapsed_seconds"] = elapsed;
    manifest["memory_estimate_bytes"] = memory_estimate_bytes(cfg);
    manifest["summary"] = summary;
    json entries = json::array();
    for (const std::string& rel : outcome.outputs) {
      json entry;
      entry["path"] = rel;
      entry["sha256"] = sha256_file_hex((out / rel).string());
      entry["bytes"] = fs::file_size(out / rel);
      entries.push_back(std::move(entry));
    }
    manifest["outputs"] = std::move(entries);
    write_file(manifest_path, manifest.dump(2) + "\n");
    outcome.manifest_path = manifest_path.string();
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    json err;
    err["error_type"] = error_type_name(e);
    err["message"] = e.what();
    err["kind"] = outcome.kind;
    const fs::path error_path = out / "error.json";
    try {
      write_file(error_path, err.dump(2) + "\n");
      outcome.error_path = error_path.string();
    } catch (const std::exception&) {
      // Out dir itself unusable; the exit code still reports the failure.
    }
    return outcome;
  }
}

}  // namespace

RunOutcome run_experiment(const std::string& config_path,
                          const std::string& out_dir, std::uint64_t seed,
                          bool resume) {
  try {
    return run_experiment_text(read_file(config_path), out_dir, seed, resume);
  } catch (const std::exception& e) {
    RunOutcome outcome;
    outcome.exit_code = 1;
    outcome.out_dir = out_dir;
    try {
      fs::create_directories(out_dir);
      json err;
      err["error_type"] = "Runtime";
      err["message"] = e.what();
      const fs::path error_path = fs::path(out_dir) / "error.json";
      write_file(error_path, err.dump(2) + "\n");
      outcome.error_path = error_path.string();
    } catch (const std::exception&) {
    }
    return outcome;
  }
}

RunOutcome run_experiment_text(const std::string& config_text,
                               const std::string& out_dir, std::uint64_t seed,
                               bool resume) {
  return run_text_impl(config_text, out_dir, seed, resume);
}

}  // namespace qpnls
