#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"

using namespace hetlab;

TEST_CASE("S and its inverse, constant multiplier") {
  const SystemSpec s = testutil::reference_spec();
  const SigmaPoint p{0.02, 0.09};
  const SigmaPoint q = s_apply(s, p);
  CHECK(q.u == Catch::Approx(0.04).epsilon(1e-15));
  CHECK(q.v == Catch::Approx(0.045).epsilon(1e-15));
  const SigmaPoint back = s_inverse(s, q);
  CHECK(back.u == Catch::Approx(p.u).epsilon(1e-14));
  CHECK(back.v == Catch::Approx(p.v).epsilon(1e-14));
}

TEST_CASE("closed-form iterate equals repeated application") {
  for (const SystemSpec& s :
       {testutil::reference_spec(), testutil::nonlinear_spec()}) {
    testutil::Rng rng;
    for (int i = 0; i < 50; ++i) {
      const double v = rng.uniform(0.08, 0.12);
      const double u = rng.uniform(1e-5, 0.02);
      SigmaPoint step{u, v};
      const long n = 1 + static_cast<long>(rng.uniform(0.0, 6.0));
      for (long k = 0; k < n; ++k) step = s_apply(s, step);
      const SigmaPoint jump = s_apply_n(s, {u, v}, n);
      CHECK(jump.u == Catch::Approx(step.u).epsilon(1e-13));
      CHECK(jump.v == Catch::Approx(step.v).epsilon(1e-13));
      // zeta is invariant along the orbit
      CHECK(jump.zeta() == Catch::Approx(u * v).epsilon(1e-12));
    }
  }
}

TEST_CASE("iterate Jacobian matches finite differences and is symplectic") {
  const SystemSpec s = testutil::nonlinear_spec();
  testutil::Rng rng;
  for (int i = 0; i < 50; ++i) {
    const double v = rng.uniform(0.08, 0.12);
    const double u = rng.uniform(1e-4, 0.02);
    const long n = 1 + static_cast<long>(rng.uniform(0.0, 4.0));
    double J[4];
    s_apply_n_jacobian(s, {u, v}, n, J);
    CHECK(J[0] * J[3] - J[1] * J[2] == Catch::Approx(1.0).margin(1e-10));
    const double h = 1e-8;
    const SigmaPoint pu = s_apply_n(s, {u + h, v}, n);
    const SigmaPoint mu_ = s_apply_n(s, {u - h, v}, n);
    const SigmaPoint pv = s_apply_n(s, {u, v + h}, n);
    const SigmaPoint mv = s_apply_n(s, {u, v - h}, n);
    CHECK(J[0] == Catch::Approx((pu.u - mu_.u) / (2.0 * h)).margin(1e-5));
    CHECK(J[1] == Catch::Approx((pv.u - mv.u) / (2.0 * h)).margin(1e-5));
    CHECK(J[2] == Catch::Approx((pu.v - mu_.v) / (2.0 * h)).margin(1e-5));
    CHECK(J[3] == Catch::Approx((pv.v - mv.v) / (2.0 * h)).margin(1e-5));
  }
}

TEST_CASE("strip boundaries, constant multiplier closed form") {
  const SystemSpec s = testutil::reference_spec();
  for (long k = 3; k <= 10; ++k) {
    for (double v : {0.085, 0.1, 0.115}) {
      const double up = strip_boundary(s, k, StripSide::plus, v);
      const double um = strip_boundary(s, k, StripSide::minus, v);
      // zeta / f^k(zeta) = v (r +- eps) with constant f: u = nu^k (r +- eps)
      CHECK(up == Catch::Approx(std::pow(0.5, k) * 0.12).epsilon(1e-12));
      CHECK(um == Catch::Approx(std::pow(0.5, k) * 0.08).epsilon(1e-12));
    }
  }
}

TEST_CASE("strip ordering and decay bound") {
  for (const SystemSpec& s :
       {testutil::reference_spec(), testutil::nonlinear_spec()}) {
    for (double v : {0.085, 0.1, 0.115}) {
      for (long k = 3; k <= 20; ++k) {
        const double up = strip_boundary(s, k, StripSide::plus, v);
        const double um = strip_boundary(s, k, StripSide::minus, v);
        const double next = strip_boundary(s, k + 1, StripSide::plus, v);
        CHECK(up > um);
        CHECK(um > next);
        CHECK(up <= std::pow((1.0 + s.nu) / 2.0, k) * (s.r + s.eps));
        const double mid = strip_centerline(s, k, v);
        CHECK(mid > um);
        CHECK(mid < up);
      }
    }
  }
}

TEST_CASE("strip threshold is enforced") {
  const SystemSpec s = testutil::reference_spec();
  CHECK_THROWS_AS(strip_boundary(s, 2, StripSide::plus, 0.1),
                  KBelowThreshold);
  CHECK_NOTHROW(strip_boundary(s, 3, StripSide::plus, 0.1));
}

TEST_CASE("strip boundary slope matches finite differences") {
  const SystemSpec s = testutil::nonlinear_spec();
  const double h = 1e-6;
  for (long k = 3; k <= 8; ++k) {
    const double d = strip_boundary_slope(s, k, StripSide::plus, 0.1);
    const double fd = (strip_boundary(s, k, StripSide::plus, 0.1 + h) -
                       strip_boundary(s, k, StripSide::plus, 0.1 - h)) /
                      (2.0 * h);
    CHECK(d == Catch::Approx(fd).margin(1e-8));
  }
}

TEST_CASE("diagonal preimages, constant multiplier closed form") {
  const SystemSpec s = testutil::reference_spec();
  for (long n = 1; n <= 12; ++n) {
    for (double v : {0.085, 0.1, 0.115}) {
      // zeta = v^2 f^{2n}(zeta) with constant f: u = nu^{2n} v
      const double u = diagonal_preimage(s, n, v);
      CHECK(u == Catch::Approx(std::pow(0.25, n) * v).epsilon(1e-12));
      const DiagonalPreimageJet j = diagonal_preimage_jet(s, n, v);
      CHECK(j.du == Catch::Approx(std::pow(0.25, n)).epsilon(1e-10));
      CHECK(std::abs(j.d2u) <= 1e-8);
    }
  }
}

TEST_CASE("diagonal preimages, nonlinear multiplier") {
  const SystemSpec s = testutil::nonlinear_spec();
  const double h = 1e-6;
  for (long n = 1; n <= 10; ++n) {
    const double v = 0.1;
    const double u = diagonal_preimage(s, n, v);
    // residual of zeta = v^2 f^{2n}(zeta)
    const double zeta = u * v;
    CHECK(zeta == Catch::Approx(v * v * s.eval_f_pow(zeta, 2 * n))
                      .epsilon(1e-12));
    // decay at the uniform rate bound
    CHECK(u <= std::pow((1.0 + s.nu) / 2.0, 2 * n) * v * 1.0001);
    const DiagonalPreimageJet j = diagonal_preimage_jet(s, n, v);
    const double fd = (diagonal_preimage(s, n, v + h) -
                       diagonal_preimage(s, n, v - h)) /
                      (2.0 * h);
    const double fd2 = (diagonal_preimage(s, n, v + h) - 2.0 * u +
                        diagonal_preimage(s, n, v - h)) /
                       (h * h);
    CHECK(j.du == Catch::Approx(fd).margin(1e-8));
    CHECK(j.d2u == Catch::Approx(fd2).margin(1e-3));
  }
}
