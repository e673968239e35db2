#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"

using namespace hetlab;

TEST_CASE("level curve of the linear model is omega eta - c") {
  const SystemSpec s = testutil::reference_spec();
  testutil::Rng rng;
  for (int i = 0; i < 100; ++i) {
    const double c = rng.uniform(-0.005, 0.005);
    const double eta = rng.uniform(0.0, 0.01);
    CHECK(level_curve(s, c, eta) ==
          Catch::Approx(2.0 * eta - c).margin(1e-14));
    CHECK(level_curve_slope(s, c, eta) == Catch::Approx(2.0).margin(1e-10));
  }
}

TEST_CASE("level curve solves h = c on the nonlinear model") {
  const SystemSpec s = testutil::nonlinear_spec();
  testutil::Rng rng;
  for (int i = 0; i < 100; ++i) {
    const double c = rng.uniform(-0.005, 0.005);
    const double eta = rng.uniform(0.0, 0.01);
    const double a = level_curve(s, c, eta);
    CHECK(std::abs(s.eval_h(a, eta) - c) <= 1e-13);
  }
}

TEST_CASE("level curve jet matches finite differences") {
  const SystemSpec s = testutil::nonlinear_spec();
  const double c = 2e-3, eta = 4e-3, h = 1e-5;
  const LevelCurveJet j = level_curve_jet(s, c, eta);
  const double am = level_curve(s, c, eta - h);
  const double a0 = level_curve(s, c, eta);
  const double ap = level_curve(s, c, eta + h);
  CHECK(j.a == Catch::Approx(a0).epsilon(1e-13));
  CHECK(j.a1 == Catch::Approx((ap - am) / (2.0 * h)).margin(1e-7));
  CHECK(j.a2 == Catch::Approx((ap - 2.0 * a0 + am) / (h * h)).margin(1e-4));
  const LevelCurveJet jm = level_curve_jet(s, c, eta - h);
  const LevelCurveJet jp = level_curve_jet(s, c, eta + h);
  CHECK(j.a3 == Catch::Approx((jp.a2 - jm.a2) / (2.0 * h)).margin(1e-3));
}

TEST_CASE("transit map worked value at c = 0") {
  const SystemSpec s = testutil::reference_spec();
  const DiskPoint q{0.1, 0.0};
  const DiskPoint out = transit_map(s, 0.0, q);
  // a = omega eta = 0.01, Delta = 2 ln(0.04 / 0.01) = 2 ln 4
  const double delta = 2.0 * std::log(4.0);
  CHECK(out.x2 == Catch::Approx(0.1 * std::cos(delta)).epsilon(1e-12));
  CHECK(out.y2 == Catch::Approx(0.1 * std::sin(delta)).epsilon(1e-12));
  CHECK(out.x2 == Catch::Approx(-0.0932687).margin(1e-6));
  CHECK(out.y2 == Catch::Approx(0.0360687).margin(1e-6));
}

TEST_CASE("transit preserves eta and the angle formula") {
  for (const SystemSpec& s :
       {testutil::reference_spec(), testutil::nonlinear_spec()}) {
    testutil::Rng rng;
    for (int i = 0; i < 200; ++i) {
      const double c = rng.uniform(-0.004, 0.004);
      const double rad = rng.uniform(1e-4, 0.1);
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      const DiskPoint q{rad * std::cos(phi), rad * std::sin(phi)};
      if (!transit_domain_ok(s, c, q.eta())) continue;
      const DiskPoint out = transit_map(s, c, q);
      CHECK(out.eta() == Catch::Approx(q.eta()).epsilon(1e-12));
      const double turn = std::remainder(
          out.angle() - q.angle() - transit_angle(s, c, q.eta()),
          2.0 * M_PI);
      CHECK(std::abs(turn) <= 1e-10);
    }
  }
}

TEST_CASE("transit angle jet agrees with finite differences") {
  const SystemSpec s = testutil::nonlinear_spec();
  const double c = -2e-3, eta = 3e-3, h = 1e-6;
  const TransitAngleJet j = transit_angle_jet(s, c, eta);
  const double dm = transit_angle(s, c, eta - h);
  const double dp = transit_angle(s, c, eta + h);
  const double d0 = transit_angle(s, c, eta);
  CHECK(j.delta == Catch::Approx(d0).epsilon(1e-13));
  CHECK(j.d1 == Catch::Approx((dp - dm) / (2.0 * h)).margin(1e-5));
  CHECK(j.d2 == Catch::Approx((dp - 2.0 * d0 + dm) / (h * h)).margin(1e-2));
}

TEST_CASE("transit Jacobian is symplectic and matches finite differences") {
  for (const SystemSpec& s :
       {testutil::reference_spec(), testutil::nonlinear_spec()}) {
    testutil::Rng rng;
    for (int i = 0; i < 100; ++i) {
      const double c = rng.uniform(-0.004, 0.004);
      const double rad = rng.uniform(1e-3, 0.1);
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      const DiskPoint q{rad * std::cos(phi), rad * std::sin(phi)};
      if (!transit_domain_ok(s, c, q.eta())) continue;
      const Mat2 J = transit_jacobian(s, c, q);
      CHECK(J.det() == Catch::Approx(1.0).margin(1e-10));
      const double h = 1e-7 * std::max(rad, 1e-2);
      const DiskPoint ox = transit_map(s, c, {q.x2 + h, q.y2});
      const DiskPoint mx = transit_map(s, c, {q.x2 - h, q.y2});
      const DiskPoint oy = transit_map(s, c, {q.x2, q.y2 + h});
      const DiskPoint my = transit_map(s, c, {q.x2, q.y2 - h});
      CHECK(J.a11 == Catch::Approx((ox.x2 - mx.x2) / (2.0 * h)).margin(2e-4));
      CHECK(J.a21 == Catch::Approx((ox.y2 - mx.y2) / (2.0 * h)).margin(2e-4));
      CHECK(J.a12 == Catch::Approx((oy.x2 - my.x2) / (2.0 * h)).margin(2e-4));
      CHECK(J.a22 == Catch::Approx((oy.y2 - my.y2) / (2.0 * h)).margin(2e-4));
    }
  }
}

TEST_CASE("transit domain errors") {
  const SystemSpec s = testutil::reference_spec();
  CHECK_THROWS_AS(transit_map(s, 0.0, DiskPoint{0.0, 0.0}), EtaZero);
  // case 1 requires a_c(eta) > 0: violated below the Lyapunov circle.
  CHECK_THROWS_AS(transit_angle(s, 1e-3, 1e-5), WrongSideOfCylinder);
  SystemSpec s2 = testutil::case2_spec();
  // case 2 requires a_c(eta) < 0.
  CHECK_THROWS_AS(transit_angle(s2, -1e-3, 1e-3), WrongSideOfCylinder);
  CHECK_NOTHROW(transit_angle(s2, 1e-3, 1e-5));
}

TEST_CASE("Lyapunov trace radius") {
  const SystemSpec s = testutil::reference_spec();
  CHECK(lyapunov_eta(s, 1e-4) == Catch::Approx(5e-5).epsilon(1e-10));
  CHECK(lyapunov_eta(s, 2e-3) == Catch::Approx(1e-3).epsilon(1e-10));
  CHECK_THROWS_AS(lyapunov_eta(s, -1e-4), NoRoot);
  int mult = 0;
  lyapunov_eta(s, 1e-4, &mult);
  CHECK(mult == 1);
  const SystemSpec n = testutil::nonlinear_spec();
  const double ec = lyapunov_eta(n, 1e-4);
  CHECK(std::abs(level_curve(n, 1e-4, ec)) <= 1e-12);
}
