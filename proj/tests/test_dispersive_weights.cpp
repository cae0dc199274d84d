#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "qpnls/dispersive_weights.hpp"
#include "qpnls/linear_propagator.hpp"
#include "qpnls/observables.hpp"

using namespace qpnls;
using testutil::make_spec;

namespace {

WeightProfile manual_profile(double t_lo, double t_hi, int count,
                             double (*f)(double)) {
  WeightProfile p;
  p.dt = (t_hi - t_lo) / count;
  p.delta_cut = 0.25;
  p.times.reserve(count);
  p.values.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = t_lo + (i + 0.5) * p.dt;
    p.times.push_back(t);
    p.values.push_back(f(t));
  }
  return p;
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("free weight is 1/(2 pi |t|) on both sides of the cut") {
  const PotentialSpec spec = make_spec({0}, {1.0});
  const double cut = default_delta_cut(spec);
  CHECK(cut == doctest::Approx(0.25));
  for (const double t : {-3.0, -0.26, -0.1, 0.05, 0.25, 2.0}) {
    CHECK(weight_value(spec, t, cut) * 2.0 * M_PI * std::abs(t) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(weight_value(spec, 0.0, cut), ZeroTimeError);
}

TEST_CASE("confined directions set the cut and the singular times") {
  CHECK(default_delta_cut(make_spec({1, 0}, {4.0, 1.0})) ==
        doctest::Approx(1.0 / 16.0));
  CHECK(default_delta_cut(make_spec({-1}, {0.5})) == doctest::Approx(0.25));

  const PotentialSpec trap = make_spec({1}, {1.0});
  CHECK_THROWS_AS(weight_value(trap, M_PI, 0.25), SingularTimeError);

  // 1/|t| scaling inside the cut, continuity across it
  const PotentialSpec stiff = make_spec({1}, {2.0});
  const double cut = default_delta_cut(stiff);  // 0.125
  CHECK(weight_value(stiff, 0.05, cut) * 0.05 ==
        doctest::Approx(weight_value(stiff, 0.1, cut) * 0.1).epsilon(1e-12));
  CHECK(weight_value(stiff, cut - 1e-7, cut) ==
        doctest::Approx(weight_value(stiff, cut + 1e-7, cut)).epsilon(1e-4));
}

TEST_CASE("saddle weight matches the closed form") {
  const PotentialSpec spec = make_spec({-1, 1}, {1.0, 1.0});
  const double t = M_PI / 4.0;
  const double expected =
      1.0 / (2.0 * M_PI * std::sqrt(std::sinh(t) * std::sin(t)));
  CHECK(weight_value(spec, t, 0.25) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("profiles excise the focusing tubes") {
  const PotentialSpec trap = make_spec({1}, {1.0});
  const WeightProfile p = make_weight_profile(trap, 0.1, 7.0, 5000);
  CHECK(p.dt == doctest::Approx((7.0 - 0.1) / 5000));
  CHECK(p.times.size() == p.values.size());
  CHECK(p.times.size() < 5000);  // some samples fell in a tube
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    for (int k = 1; k <= 2; ++k)
      CHECK(std::abs(p.times[i] - k * M_PI) > 1e-4 * M_PI);
    CHECK(std::isfinite(p.values[i]));
    if (i) CHECK(p.times[i] > p.times[i - 1]);
  }
}

TEST_CASE("weak L1 functional recovers the 1/|t| mass exactly") {
  const WeightProfile p =
      manual_profile(-1.0, 1.0, 100000, [](double t) { return 1.0 / std::abs(t); });
  CHECK(weak_l1_norm(p) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("weak L1 of an indicator is its support length") {
  const WeightProfile p =
      manual_profile(0.0, 3.0, 3000, [](double) { return 1.0; });
  CHECK(weak_l1_norm(p) == doctest::Approx(3.0).epsilon(2e-3));
}

TEST_CASE("weak L1 needs enough samples") {
  const WeightProfile p =
      manual_profile(0.0, 1.0, 99, [](double) { return 1.0; });
  CHECK_THROWS_AS(weak_l1_norm(p), InsufficientDataError);
}

TEST_CASE("exponent triples") {
  const ExponentTriple a = exponent_triple(2, 1.0);
  CHECK(a.r == doctest::Approx(4.0));
  CHECK(a.q == doctest::Approx(4.0));
  CHECK(a.k == doctest::Approx(4.0));
  const ExponentTriple b = exponent_triple(3, 1.0);
  CHECK(b.r == doctest::Approx(4.0));
  CHECK(b.q == doctest::Approx(8.0 / 3.0));
  CHECK(b.k == doctest::Approx(8.0));
  const ExponentTriple c = exponent_triple(1, 2.0);
  CHECK(c.r == doctest::Approx(6.0));
  CHECK(c.q == doctest::Approx(6.0));
  CHECK(c.k == doctest::Approx(6.0));
  CHECK_THROWS_AS(exponent_triple(3, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(exponent_triple(0, 1.0), std::invalid_argument);
}

TEST_CASE("sharp admissibility keeps the line, drops the endpoint") {
  CHECK(is_sharp_admissible(4.0, 4.0, 1.0));
  CHECK(is_sharp_admissible(3.0, 3.0, 2.0));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_FALSE(is_sharp_admissible(2.0, inf, 1.0));
  CHECK_FALSE(is_sharp_admissible(4.0, 4.0, 0.9));     // off the line
  CHECK_FALSE(is_sharp_admissible(1.9, 2.0 / (1.0 - 1.0 / 1.9), 2.0));
}

TEST_CASE("effective dimension reinterpretation") {
  const PotentialSpec spec = make_spec({0}, {1.0});
  const WeightProfile p = make_weight_profile(spec, 0.3, 4.0, 1000);
  CHECK(effective_dimension_check(1, 1, p) ==
        doctest::Approx(weak_l1_norm(p)).epsilon(1e-12));
  const double d2 = effective_dimension_check(1, 2, p);
  CHECK(d2 > 0.0);
  CHECK(std::isfinite(d2));
  CHECK_THROWS_AS(effective_dimension_check(2, 1, p), std::invalid_argument);
}

TEST_CASE("stronger repulsion shrinks the windowed quasi norm") {
  double previous = std::numeric_limits<double>::infinity();
  for (const double omega1 : {0.5, 1.0, 2.0}) {
    const PotentialSpec spec = make_spec({-1, 1}, {omega1, 1.0});
    const WeightProfile p = make_weight_profile(spec, 1.6, 6.0, 2000);
    const double q = weak_l1_norm(p);
    CHECK(q < previous);
    previous = q;
  }
}

}  // TEST_SUITE
