#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "qpnls/grid.hpp"
#include "qpnls/linear_propagator.hpp"
#include "qpnls/nonlinear_integrator.hpp"

using namespace qpnls;
using testutil::grid1;
using testutil::grid2;
using testutil::l2_diff;
using testutil::make_spec;
using testutil::unit_gaussian;

TEST_SUITE("nonlinear") {

TEST_CASE("gauge phase step applies the exact pointwise rotation") {
  auto g = grid1(64, 8.0);
  WaveFunction psi = make_gaussian(g, 1.3, {0.5}, {0.9}, {0.4});
  const double dt = 0.37;
  for (const double sigma : {1.0, 0.5, 1.5}) {
    for (const double lambda : {-1.0, 0.8}) {
      const WaveFunction out = nonlinear_phase_step(psi, lambda, sigma, dt);
      double worst = 0.0;
      for (std::size_t i = 0; i < psi.amp.size(); ++i) {
        const double density = std::pow(std::abs(psi.amp[i]), 2.0 * sigma);
        const std::complex<double> expected =
            psi.amp[i] * std::polar(1.0, -lambda * density * dt);
        worst = std::max(worst, std::abs(out.amp[i] - expected));
      }
      CHECK(worst < 1e-14);
      CHECK(mass(out) == doctest::Approx(mass(psi)).epsilon(1e-14));
    }
  }
}

TEST_CASE("lambda = 0 reduces exactly to the linear flow") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  const WaveFunction psi0 = make_gaussian(g, 0.8, {0.7}, {1.0}, {0.3});
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 1.0;
  config.lambda = 0.0;
  config.output_every = 100;
  const EvolveResult res = evolve(psi0, spec, config);
  CHECK(res.record.termination == TerminationReason::completed);
  const WaveFunction direct = propagate_linear(psi0, spec, 0.0, 1.0);
  CHECK(l2_diff(res.final_state, direct) < 1e-10);
}

TEST_CASE("mass is conserved and energy drift scales at second order") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  const WaveFunction psi0 = make_gaussian(g, 1.2, {0.0}, {1.0}, {0.0});

  auto drift = [&](double dt) {
    SolverConfig config;
    config.dt = dt;
    config.t_end = 0.5;
    config.lambda = 1.0;
    config.sigma = 1.0;
    config.output_every = 1000000;
    const EvolveResult res = evolve(psi0, spec, config);
    REQUIRE(res.record.termination == TerminationReason::completed);
    const auto& first = res.record.samples.front();
    const auto& last = res.record.samples.back();
    CHECK(std::abs(last.mass - first.mass) / first.mass < 1e-12);
    return std::abs(last.energy - first.energy);
  };
  const double coarse = drift(2e-3);
  const double fine = drift(1e-3);
  CHECK(coarse / fine > 3.0);
  CHECK(coarse / fine < 5.5);
}

TEST_CASE("strang evolution is exactly reversible") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  const WaveFunction psi0 = make_gaussian(g, 1.1, {0.4}, {1.0}, {0.2});
  SolverConfig forward;
  forward.dt = 1e-3;
  forward.t_end = 1.0;
  forward.lambda = -0.5;
  forward.output_every = 1000000;
  const EvolveResult ahead = evolve(psi0, spec, forward);
  REQUIRE(ahead.record.termination == TerminationReason::completed);

  SolverConfig backward = forward;
  backward.t_start = 1.0;
  backward.t_end = 0.0;
  const EvolveResult back = evolve(ahead.final_state, spec, backward);
  REQUIRE(back.record.termination == TerminationReason::completed);
  CHECK(l2_diff(back.final_state, psi0) < 1e-9);
}

TEST_CASE("record layout, csv, json, and series extraction") {
  auto g = grid1(128, 10.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  SolverConfig config;
  config.dt = 0.02;
  config.t_end = 0.2;
  config.lambda = -1.0;
  config.output_every = 2;
  const EvolveResult res = evolve(unit_gaussian(g), spec, config);
  const EvolutionRecord& rec = res.record;

  const auto names = rec.column_names();
  CHECK(names.size() == 12);  // 10 fixed + j/h per direction
  CHECK(names.front() == "t");
  CHECK(names[6] == "j_norm_0");
  CHECK(names[7] == "h_norm_0");
  CHECK(names.back() == "after_handoff");

  const std::string csv = rec.to_csv();
  const std::string header = csv.substr(0, csv.find('\n'));
  std::size_t commas = 0;
  for (const char c : header) commas += (c == ',');
  CHECK(commas == names.size() - 1);

  CHECK(rec.series("mass").size() == rec.samples.size());
  CHECK(rec.series("mass").front() ==
        doctest::Approx(rec.samples.front().mass));
  CHECK(rec.series("j_norm_0").back() ==
        doctest::Approx(rec.samples.back().j_norm[0]));
  CHECK_THROWS(rec.series("no_such_column"));

  const std::string json_text = rec.to_json_string();
  CHECK(json_text.find("\"columns\"") != std::string::npos);
  CHECK(json_text.find("\"termination\"") != std::string::npos);

  CHECK(rec.times().size() == rec.samples.size());
  CHECK(rec.times().back() == doctest::Approx(0.2));
}

TEST_CASE("gradient growth beyond the configured factor stops the run") {
  auto g = grid1(256, 12.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  // coherent state: the gradient norm swings up by 3x within a quarter period
  const WaveFunction psi0 = make_gaussian(g, 1.0, {2.0}, {1.0}, {0.0});
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 2.0;
  config.blowup_gradient_factor = 1.3;
  const EvolveResult res = evolve(psi0, spec, config);
  CHECK(res.record.termination == TerminationReason::blowup_detected);
  CHECK(res.record.termination_time < 1.0);
  CHECK(res.record.termination_detail.find("gradient") != std::string::npos);
}

TEST_CASE("a drifting packet that outgrows the box reports a breach") {
  auto g = grid1(192, 10.0);
  const PotentialSpec spec = make_spec({0}, {1.0});
  const WaveFunction psi0 = make_gaussian(g, 1.0, {-2.0}, {0.8}, {2.0});
  SolverConfig config;
  config.dt = 0.02;
  config.t_end = 3.0;
  const EvolveResult res = evolve(psi0, spec, config);
  CHECK(res.record.termination == TerminationReason::boundary_breach);
  CHECK(res.record.termination_time < 3.0);
  CHECK(res.record.termination_time > 0.1);
}

TEST_CASE("an unresolvable potential reports a singularity fault") {
  auto g = grid1(32, 10.0);
  const PotentialSpec spec = make_spec({1}, {6.0});
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 1.0;
  const EvolveResult res = evolve(unit_gaussian(g), spec, config);
  CHECK(res.record.termination == TerminationReason::singularity_fault);
  CHECK_FALSE(res.record.termination_detail.empty());
}

TEST_CASE("handoff tail reproduces the on-grid linear continuation") {
  auto g = grid1(2560, 50.0);
  const PotentialSpec spec = make_spec({-1}, {1.0});
  const WaveFunction psi0 = unit_gaussian(g);

  SolverConfig config;
  config.dt = 1e-3;
  config.t_end = 1.8;
  config.lambda = -0.3;
  config.sigma = 1.0;
  config.output_every = 100;
  config.handoff_residual_tol = 0.2;
  config.max_post_handoff_samples = 24;

  const EvolveResult handed = evolve(psi0, spec, config);
  const EvolutionRecord& rec = handed.record;
  REQUIRE(rec.termination == TerminationReason::completed);
  REQUIRE(rec.handoff_time.has_value());
  const double t_h = *rec.handoff_time;
  CHECK(t_h > 0.5);
  CHECK(t_h < 1.6);
  CHECK(rec.samples.back().t == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(rec.samples.back().after_handoff);
  CHECK(rec.residual_integral > 0.0);

  // post-handoff rows freeze the invariants of the linear flow
  double mass_h = -1.0;
  for (const auto& s : rec.samples) {
    if (!s.after_handoff) continue;
    if (mass_h < 0.0) mass_h = s.mass;
    CHECK(s.mass == doctest::Approx(mass_h).epsilon(1e-12));
    CHECK(s.j_norm[0] ==
          doctest::Approx(rec.samples.back().j_norm[0]).epsilon(1e-12));
    CHECK(s.residual_bound >= 0.0);
  }

  // the reported frame norms at t_end match a direct on-grid continuation
  const WaveFunction direct =
      propagate_linear(handed.final_state, spec, t_h, 1.8);
  const EvolutionSample& last = rec.samples.back();
  CHECK(std::abs(grad_norm(direct) - last.grad_norm) / last.grad_norm < 1e-6);
  CHECK(std::abs(moment_norm(direct) - last.moment_norm) / last.moment_norm <
        1e-6);
  CHECK(std::abs(mass(direct) - last.mass) / last.mass < 1e-10);

  // ground truth: the same run carried fully nonlinearly to t_end
  SolverConfig full = config;
  full.handoff_residual_tol = 0.0;
  const EvolveResult truth = evolve(psi0, spec, full);
  REQUIRE(truth.record.termination == TerminationReason::completed);
  const double gap = l2_diff(truth.final_state, direct);
  CHECK(gap <= last.residual_bound * 1.05 + 1e-12);
  CHECK(last.residual_bound < 0.6);
}

TEST_CASE("with lambda = 0 the handoff is immediate and residual free") {
  auto g = grid1(512, 24.0);
  const PotentialSpec spec = make_spec({-1}, {1.0});
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 2.0;
  config.lambda = 0.0;
  config.handoff_residual_tol = 0.05;
  const EvolveResult res = evolve(unit_gaussian(g), spec, config);
  REQUIRE(res.record.handoff_time.has_value());
  CHECK(*res.record.handoff_time == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(res.record.residual_integral == 0.0);
  CHECK(res.record.samples.back().residual_bound == 0.0);
}

TEST_CASE("linear/remainder split vanishes identically for lambda = 0") {
  auto g = grid1(128, 10.0);
  const PotentialSpec spec = make_spec({1}, {1.0});
  SolverConfig config;
  config.dt = 0.02;
  config.t_end = 0.6;
  config.lambda = 0.0;
  config.output_every = 5;
  const DecompositionResult dec =
      decompose_linear_remainder(unit_gaussian(g), spec, config);
  REQUIRE(!dec.w_l2.empty());
  for (const double w : dec.w_l2) CHECK(w < 1e-10);
  const auto v_mass = dec.v_record.series("mass");
  for (const double m : v_mass)
    CHECK(m == doctest::Approx(v_mass.front()).epsilon(1e-10));
}

TEST_CASE("remainder starts at zero, grows, then freezes after handoff") {
  auto g = grid1(1024, 30.0);
  const PotentialSpec spec = make_spec({-1}, {1.0});
  SolverConfig config;
  config.dt = 2e-3;
  config.t_end = 1.5;
  config.lambda = -0.2;
  config.output_every = 50;
  config.handoff_residual_tol = 0.25;
  config.max_post_handoff_samples = 12;
  const DecompositionResult dec =
      decompose_linear_remainder(unit_gaussian(g), spec, config);
  REQUIRE(dec.times.size() == dec.w_l2.size());
  REQUIRE(dec.u_record.handoff_time.has_value());
  CHECK(dec.w_l2.front() < 1e-12);
  CHECK(dec.w_l2.back() > 1e-6);
  // after the handoff both components evolve linearly: w is constant
  const double t_h = *dec.u_record.handoff_time;
  double frozen = -1.0;
  for (std::size_t i = 0; i < dec.times.size(); ++i) {
    if (dec.times[i] <= t_h) continue;
    if (frozen < 0.0) frozen = dec.w_l2[i];
    CHECK(dec.w_l2[i] == doctest::Approx(frozen).epsilon(1e-12));
  }
  CHECK(frozen >= 0.0);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig config;
  config.dt = -1.0;
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);
  config = SolverConfig{};
  config.t_end = config.t_start;
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);
  config = SolverConfig{};
  config.sigma = 2.5;  // supercritical for n = 3
  CHECK_THROWS_AS(config.validate(3), std::invalid_argument);
  CHECK_NOTHROW(config.validate(1));
  config = SolverConfig{};
  config.output_every = 0;
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);

  // handoff without a repulsive direction is rejected at run time
  auto g = grid1(64, 8.0);
  SolverConfig handoff;
  handoff.handoff_residual_tol = 0.1;
  CHECK_THROWS_AS(
      evolve(unit_gaussian(g), make_spec({1}, {1.0}), handoff),
      std::invalid_argument);
}

}  // TEST_SUITE
