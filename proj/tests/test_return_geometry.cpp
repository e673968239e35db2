#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"

using namespace hetlab;

namespace {

PlanarCurve unit_circle() {
  return PlanarCurve(0.0, 2.0 * M_PI, Chart::Sigma, [](double t) {
    CurveJet j;
    j.p = {std::cos(t), std::sin(t)};
    j.d1 = {-std::sin(t), std::cos(t)};
    j.d2 = {-std::cos(t), -std::sin(t)};
    return j;
  });
}

}  // namespace

TEST_CASE("crossings of a circle with a vertical line") {
  const PlanarCurve circle = unit_circle();
  const auto recs = find_crossings(circle, functional_u_equals(0.5));
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.transversal);
    CHECK(r.point.x == Catch::Approx(0.5).margin(1e-10));
    CHECK(std::abs(r.point.y) == Catch::Approx(std::sqrt(0.75)).margin(1e-10));
  }
  CHECK(find_crossings(circle, functional_u_equals(1.5)).empty());
}

TEST_CASE("tangency detection on a translated parabola") {
  // curve(s): y = x^2 - s against y = 0; double root at s = 0.
  auto builder = [](double s) {
    return PlanarCurve(-1.0, 1.0, Chart::Sigma, [s](double t) {
      CurveJet j;
      j.p = {t, t * t - s};
      j.d1 = {1.0, 2.0 * t};
      j.d2 = {0.0, 2.0};
      return j;
    });
  };
  const TangencyRecord rec = find_tangency_in_parameter(
      builder, functional_v_equals(0.0), -0.5, 0.5, 1e-3);
  CHECK(rec.scan_value == Catch::Approx(0.0).margin(1e-10));
  CHECK(rec.certified);
  CHECK(rec.graph_second_derivative == Catch::Approx(2.0).margin(1e-6));
  CHECK_THROWS_AS(find_tangency_in_parameter(builder,
                                             functional_v_equals(0.0), 0.2,
                                             0.5, 1e-3),
                  NoSignChange);
}

TEST_CASE("extremum with a non-affine functional") {
  // distance-like functional g = y - x^2 along the line y = s: the
  // curvature term must enter the second derivative.
  const double s = 0.25;
  const PlanarCurve line(-1.0, 1.0, Chart::Sigma, [s](double t) {
    CurveJet j;
    j.p = {t, s};
    j.d1 = {1.0, 0.0};
    j.d2 = {0.0, 0.0};
    return j;
  });
  CrossingFunctional g;
  g.name = "y - x^2";
  g.value = [](const Vec2& p) { return p.y - p.x * p.x; };
  g.grad = [](const Vec2& p) { return Vec2{-2.0 * p.x, 1.0}; };
  g.hess = [](const Vec2&) {
    return std::array<double, 4>{-2.0, 0.0, 0.0, 0.0};
  };
  const auto e = extremum_nearest_zero(line, g);
  REQUIRE(e.has_value());
  CHECK(e->t == Catch::Approx(0.0).margin(1e-10));
  CHECK(e->value == Catch::Approx(s).margin(1e-10));
  CHECK(e->second == Catch::Approx(-2.0).margin(1e-8));
}

TEST_CASE("circle images are exact ellipses") {
  const SystemSpec s = testutil::nonlinear_spec();
  const double c = 1e-4;
  for (const CircleImage which :
       {CircleImage::sigma_u_to_sigma, CircleImage::sigma_s_to_pi_u}) {
    const Ellipse e = circle_image(s, c, which);
    const PlanarCurve curve = e.curve();
    for (int i = 0; i < 48; ++i) {
      const double th = 2.0 * M_PI * i / 48.0;
      CHECK(std::abs(e.implicit(e.point(th))) <= 1e-10);
      const CurveJet j = curve.at(th);
      CHECK(std::abs(e.implicit(j.p)) <= 1e-10);
    }
  }
}

TEST_CASE("spiral trace reproduces the closed form at c = 0") {
  const SystemSpec s = testutil::reference_spec();
  const SpiralTrace tr = unstable_trace_spiral(s, 0.0, 1e-6, 1e-2);
  REQUIRE_FALSE(tr.empty());
  for (double tau : {2e-6, 1e-4, 3e-3, 9e-3}) {
    const CurveJet j = tr.curve->at(tau);
    const double delta = 2.0 * std::log(0.02 / (tau * tau));
    CHECK(j.p.x == Catch::Approx(2.0 * tau * std::cos(delta)).margin(1e-12));
    // v coordinate: r + b1 - (x2 bar) + 0 = 0.1 + tau (sin - cos) terms
    const double xb = tau * (std::cos(delta) - std::sin(delta));
    CHECK(j.p.y == Catch::Approx(0.1 - xb).margin(1e-12));
  }
}

TEST_CASE("spiral jets agree with finite differences") {
  const SystemSpec s = testutil::nonlinear_spec();
  const SpiralTrace tr = unstable_trace_spiral(s, -1e-3, 1e-4, 1e-2);
  REQUIRE_FALSE(tr.empty());
  const double h = 1e-8;
  for (double tau : {3e-4, 1e-3, 5e-3}) {
    const CurveJet j = tr.curve->at(tau);
    const CurveJet jm = tr.curve->at(tau - h);
    const CurveJet jp = tr.curve->at(tau + h);
    CHECK(j.d1.x == Catch::Approx((jp.p.x - jm.p.x) / (2.0 * h)).margin(1e-4));
    CHECK(j.d1.y == Catch::Approx((jp.p.y - jm.p.y) / (2.0 * h)).margin(1e-4));
    CHECK(j.d2.x ==
          Catch::Approx((jp.p.x - 2.0 * j.p.x + jm.p.x) / (h * h))
              .epsilon(1e-2));
  }
}

TEST_CASE("spiral phase change on the critical level") {
  const SystemSpec s = testutil::reference_spec();
  const double span = std::abs(spiral_phase_change(s, 0.0, 1e-6, 1e-2));
  CHECK(span == Catch::Approx(4.0 * std::log(1e4)).epsilon(1e-6));
}

TEST_CASE("spiral domain exit is data") {
  const SystemSpec s = testutil::reference_spec();
  const double c = 1e-4;  // Lyapunov circle cuts the segment
  const SpiralTrace tr = unstable_trace_spiral(s, c, 1e-6, 1e-2);
  REQUIRE_FALSE(tr.empty());
  CHECK(tr.exit_lo.has_value());
  CHECK_FALSE(tr.exit_hi.has_value());
  // the exit sits at the Lyapunov circle crossing of the segment
  const double eta_exit = t1_segment_eta(s, c, tr.tau_lo);
  CHECK(eta_exit == Catch::Approx(lyapunov_eta(s, c)).epsilon(1e-4));
}

TEST_CASE("nose angle of the linear model") {
  const SystemSpec s = testutil::reference_spec();
  const double c = -0.01;
  const NoseResult n = nose_angle(s, c);
  CHECK(n.phi == Catch::Approx(3.0 * M_PI / 4.0).margin(1e-12));
  CHECK(n.eta_tangent == Catch::Approx(c * c / 4.0).epsilon(1e-12));
  CHECK(n.tau_star == Catch::Approx(0.005).epsilon(1e-12));
  // theta = phi + Delta at the tangency eta
  const double delta = transit_angle(s, c, n.eta_tangent);
  CHECK(n.theta == Catch::Approx(n.phi + delta).margin(1e-12));
}

TEST_CASE("v0 census crossing count matches the phase law") {
  const SystemSpec s = testutil::reference_spec();
  const SpiralTrace tr = unstable_trace_spiral(s, 0.0, 1e-6, 1e-2);
  REQUIRE_FALSE(tr.empty());
  const auto recs = find_crossings(*tr.curve, functional_u_equals(0.0));
  const double predicted = 4.0 * std::log(1e4) / M_PI;  // ~11.7
  CHECK(std::abs(static_cast<double>(recs.size()) - predicted) <= 1.0);
  for (const auto& r : recs) CHECK(r.transversal);
}
