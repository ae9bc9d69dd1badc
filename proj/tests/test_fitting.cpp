#include "esrlab/constants.hpp"
#include "esrlab/error.hpp"
#include "esrlab/fitting.hpp"
#include "esrlab/spectra.hpp"
#include "esrlab/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace esrlab;

namespace {

SpinSystem make(int twice_s, int twice_i, double g, double d, double e, double a) {
  SpinSystem sys;
  sys.s = HalfInteger::from_twice(twice_s);
  sys.i = HalfInteger::from_twice(twice_i);
  sys.g = g;
  sys.d_ghz = d;
  sys.e_ghz = e;
  sys.a_ghz = a;
  return sys;
}

InteractionPoint point(double b, double f, double sigma = default_sigma_f_ghz) {
  InteractionPoint p;
  p.field_tesla = b;
  p.frequency_ghz = f;
  p.sigma_f_ghz = sigma;
  return p;
}

// S = 1 with D and E: small enough that a two-parameter multi-start fit is fast.
SpinFitProblem triplet_problem() {
  const SpinSystem truth = make(2, 0, 2.0, 1.0, 0.3, 0.0);
  SpinFitProblem pr;
  pr.points = points_on_curve(truth, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, 0, 1);
  for (const auto& p : points_on_curve(truth, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, 1, 2)) pr.points.push_back(p);
  pr.base = truth;
  pr.base.d_ghz = 0.0;
  pr.base.e_ghz = 0.0;
  pr.free = {{SpinParameter::d, 0.0, 3.0}, {SpinParameter::e, 0.0, 1.0}};
  return pr;
}

MultiStartOptions quick(int starts, std::uint64_t seed = 1) {
  MultiStartOptions o;
  o.starts = starts;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("point residual is the distance to the nearest line") {
  const auto sys = make(1, 0, 2.0, 0, 0, 0);
  const double f = 2.0 * constants::bohr_ghz_per_tesla * 0.5;
  CHECK(point_residual(sys, point(0.5, f)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(point_residual(sys, point(0.5, f + 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(point_residual(sys, point(0.5, f - 0.25)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("noiseless generator points lie on the model") {
  const auto v2 = make(3, 7, 2.09, 3.1, 1.9, 2.7);
  const auto pts = points_on_principal_lines(v2, {0.8, 1.1, 1.4});
  CHECK(pts.size() == 3u * 24u);
  for (const auto& p : pts) CHECK(point_residual(v2, p, LineSelection::principal) <= 1e-9);

  const auto x = make(3, 0, 2.02, 0.0, 3.9, 0.0);
  for (const auto& p : points_on_curve(x, linear_grid(0.1, 0.8, 8), 1, 2)) CHECK(point_residual(x, p) <= 1e-9);
}

TEST_CASE("no selectable line gives an infinite residual") {
  const auto sys = make(0, 0, 2.0, 0, 0, 0);
  CHECK(std::isinf(point_residual(sys, point(0.5, 10.0))));
}

TEST_CASE("single free g is recovered from a Zeeman line") {
  const auto truth = make(1, 0, 2.0023, 0, 0, 0);
  SpinFitProblem pr;
  for (double b : {0.1, 0.3, 0.5, 0.7}) pr.points.push_back(point(b, 2.0023 * constants::bohr_ghz_per_tesla * b));
  pr.base = truth;
  pr.base.g = 2.2;
  pr.free = {default_bounds(SpinParameter::g)};
  const auto fit = fit_spin_parameters(pr, quick(4));
  CHECK(std::abs(fit.best.g - 2.0023) <= 1e-6);
  CHECK(fit.objective <= 1e-8);
  REQUIRE(fit.uncertainties.size() == 1u);
  REQUIRE(fit.uncertainties[0].has_value());
  CHECK(*fit.uncertainties[0] > 0.0);
}

TEST_CASE("multi-start result dominates every start") {
  const auto pr = triplet_problem();
  const auto fit = fit_spin_parameters(pr, quick(6));
  REQUIRE(fit.start_objectives.size() == 6u);
  for (std::size_t s = 0; s < 6; ++s) {
    CHECK(fit.objective <= fit.start_objectives[s]);
    CHECK(fit.objective <= fit.local_optima[s]);
  }
  CHECK(fit.best.d_ghz == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.best.e_ghz == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(fit.objective == SpinObjective(pr).evaluate(fit.best));
  CHECK(fit.per_point_residuals.size() == pr.points.size());
}

TEST_CASE("fit is deterministic and the parallel loop matches the reference") {
  const auto pr = triplet_problem();
  const auto a = fit_spin_parameters(pr, quick(4, 9));
  const auto b = fit_spin_parameters(pr, quick(4, 9));
  const auto r = fit_spin_parameters_reference(pr, quick(4, 9));
  CHECK(a.objective == b.objective);
  CHECK(a.best.d_ghz == b.best.d_ghz);
  CHECK(a.best.e_ghz == b.best.e_ghz);
  CHECK(a.objective == r.objective);
  CHECK(a.best.d_ghz == r.best.d_ghz);
  CHECK(a.best.e_ghz == r.best.e_ghz);
  CHECK(a.local_optima == r.local_optima);
  CHECK(a.best_start == r.best_start);
}

TEST_CASE("objective scales with duplication and with sigma") {
  auto pr = triplet_problem();
  SpinSystem trial = pr.base;
  trial.d_ghz = 1.2;
  trial.e_ghz = 0.25;
  const double base = SpinObjective(pr).evaluate(trial);
  REQUIRE(base > 0.0);

  auto doubled = pr;
  doubled.points.insert(doubled.points.end(), pr.points.begin(), pr.points.end());
  CHECK(SpinObjective(doubled).evaluate(trial) == doctest::Approx(2.0 * base).epsilon(1e-12));

  for (double c : {0.5, 3.0}) {
    auto scaled = pr;
    for (auto& p : scaled.points) p.sigma_f_ghz *= c;
    CHECK(SpinObjective(scaled).evaluate(trial) == doctest::Approx(base / (c * c)).epsilon(1e-12));
  }
}

TEST_CASE("soft-min objective bounds the hard one from below") {
  const auto pr = triplet_problem();
  const SpinObjective obj(pr);
  SpinSystem trial = pr.base;
  trial.d_ghz = 1.4;
  trial.e_ghz = 0.1;
  const double hard = obj.evaluate(trial);
  CHECK(obj.evaluate_smoothed(trial, 0.0) == hard);
  double previous = -INFINITY;
  for (double tau : {2.0, 0.5, 0.1, 0.01}) {
    const double soft = obj.evaluate_smoothed(trial, tau);
    CHECK(soft <= hard * (1.0 + 1e-12));
    CHECK(soft >= previous);
    previous = soft;
  }
  CHECK(obj.evaluate_smoothed(trial, 1e-4) == doctest::Approx(hard).epsilon(1e-6));
}

TEST_CASE("Halton starts are deterministic and inside the unit box") {
  const auto a = halton_points(50, 4, 3);
  const auto b = halton_points(50, 4, 3);
  const auto c = halton_points(50, 4, 4);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& p : a) {
    REQUIRE(p.size() == 4u);
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  CHECK_THROWS_AS(halton_points(4, 0, 1), std::invalid_argument);
}

TEST_CASE("bounded simplex stops on the box face") {
  auto f = [](const std::vector<double>& x) { return (x[0] + 0.5) * (x[0] + 0.5) + (x[1] - 0.3) * (x[1] - 0.3); };
  const auto r = minimize_bounded_simplex(f, {0.8, 0.8}, SimplexOptions{});
  CHECK(r.x[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("D bound: loose threshold reaches the box edge") {
  const auto pr = triplet_problem();
  const auto fit = fit_spin_parameters(pr, quick(4));
  DBoundOptions opts;
  opts.threshold_factor = 1e300;
  const auto r = d_upper_bound_scan(pr, fit, opts);
  CHECK_FALSE(r.bounded);
  CHECK(r.bound_ghz == 3.0);
}

TEST_CASE("D bound: tight threshold stays just above the fitted D") {
  auto pr = triplet_problem();
  // noise keeps the minimum away from zero so the threshold has room
  PointNoise noise;
  noise.noise_ghz = 0.01;
  noise.seed = 5;
  const auto truth = make(2, 0, 2.0, 1.0, 0.3, 0.0);
  pr.points = points_on_curve(truth, linear_grid(0.2, 0.7, 6), 0, 1, noise);
  noise.seed = 6;
  for (const auto& p : points_on_curve(truth, linear_grid(0.2, 0.7, 6), 1, 2, noise)) pr.points.push_back(p);
  const auto fit = fit_spin_parameters(pr, quick(4));
  DBoundOptions opts;
  opts.threshold_factor = 1.0001;
  const auto r = d_upper_bound_scan(pr, fit, opts);
  CHECK(r.bounded);
  CHECK(r.bound_ghz >= fit.best.d_ghz);
  CHECK(r.bound_ghz == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.minimum_objective <= fit.objective);
  CHECK(r.scan_d.size() == 401u);
}

TEST_CASE("fit problem validation") {
  const auto good = triplet_problem();
  auto pr = good;
  pr.free.clear();
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr = good;
  pr.free.push_back({SpinParameter::d, 0.0, 1.0});
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr = good;
  pr.free[0] = {SpinParameter::d, 2.0, 1.0};
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr = good;
  pr.free.push_back({SpinParameter::a, 0.0, 1.0});
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr = good;
  pr.free.push_back({SpinParameter::g, 0.0, 3.0});
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);

  CHECK_THROWS_AS(fit_spin_parameters(good, quick(0)), std::invalid_argument);
  pr = good;
  pr.points.clear();
  CHECK_THROWS_AS(fit_spin_parameters(pr, quick(2)), std::invalid_argument);

  pr = good;
  pr.free = {default_bounds(SpinParameter::g)};
  CHECK_THROWS_AS(d_upper_bound_scan(pr, quick(2)), std::invalid_argument);

  CHECK_THROWS_AS(point(0.5, -1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(point(0.5, 1.0, 0.0).validate(), std::invalid_argument);
}

TEST_CASE("parameter and class names round trip") {
  for (auto p : {SpinParameter::g, SpinParameter::d, SpinParameter::e, SpinParameter::a})
    CHECK(parse_spin_parameter(to_string(p)) == p);
  for (auto c : {SnrClass::high_broad, SnrClass::high_narrow, SnrClass::low_narrow})
    CHECK(parse_snr_class(to_string(c)) == c);
  CHECK_FALSE(parse_snr_class("medium").has_value());
  CHECK_FALSE(parse_spin_parameter("b").has_value());
}
