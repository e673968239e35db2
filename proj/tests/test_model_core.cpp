#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"

using namespace hetlab;

TEST_CASE("f evaluation and powers") {
  const SystemSpec s = testutil::reference_spec();
  CHECK(s.eval_f(0.0) == 0.5);
  CHECK(s.eval_f(0.001) == 0.5);
  CHECK(s.eval_f_pow(0.0, 3) == Catch::Approx(0.125).epsilon(1e-15));
  CHECK(s.eval_f_pow(0.0, -2) == Catch::Approx(4.0).epsilon(1e-15));

  const SystemSpec n = testutil::nonlinear_spec();
  CHECK(n.eval_f(0.002) == Catch::Approx(0.502).epsilon(1e-15));
  CHECK(n.f_prime(0.002) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(n.f_second(0.002) == 0.0);
}

TEST_CASE("Hamiltonian partials agree with finite differences") {
  const SystemSpec s = testutil::nonlinear_spec();
  testutil::Rng rng;
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const double xi = rng.uniform(-0.05, 0.05);
    const double eta = rng.uniform(0.0, 0.01);
    const double fx =
        (s.eval_h(xi + h, eta) - s.eval_h(xi - h, eta)) / (2.0 * h);
    const double fe =
        (s.eval_h(xi, eta + h) - s.eval_h(xi, eta - h)) / (2.0 * h);
    CHECK(s.h_xi(xi, eta) == Catch::Approx(fx).margin(1e-8));
    CHECK(s.h_eta(xi, eta) == Catch::Approx(fe).margin(1e-8));
    const double fxx = (s.h_xi(xi + h, eta) - s.h_xi(xi - h, eta)) / (2.0 * h);
    CHECK(s.h_partial(xi, eta, 2, 0) == Catch::Approx(fxx).margin(1e-7));
  }
}

TEST_CASE("linear Hamiltonian values") {
  const SystemSpec s = testutil::reference_spec();
  CHECK(s.eval_h(0.01, 0.004) == Catch::Approx(-0.01 + 2.0 * 0.004).epsilon(1e-15));
  CHECK(s.h_xi(0.3, 0.1) == -1.0);
  CHECK(s.h_eta(0.3, 0.1) == 2.0);
}

TEST_CASE("global jet derived quantities") {
  const GlobalJet& j = testutil::reference_spec().gmap_jet;
  CHECK(j.det() == 1.0);
  CHECK(j.a1_slope() == 1.0);
  CHECK(j.a_of_c(-0.01) == -0.01);
  CHECK(j.fam_a_of(0.25) == 0.25);
  CHECK(j.fam_a_slope0() == 1.0);
  const GlobalJet& n = testutil::nonlinear_spec().gmap_jet;
  CHECK(n.fam_a_of(0.1) == Catch::Approx(0.1 + 0.2 * 0.01).epsilon(1e-15));
  CHECK(n.fam_b_of(0.1) == Catch::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("k0 threshold") {
  SystemSpec s = testutil::reference_spec();
  CHECK(k0_threshold(s) == 2);
  s.delta_nb = 0.012;
  CHECK(k0_threshold(s) == 3);
}

TEST_CASE("validation accepts the reference spec") {
  const SystemSpec s = testutil::reference_spec();
  const ValidationReport rep = validate_spec(s);
  CAPTURE(rep.violations);
  CHECK(rep.pass);
  CHECK(rep.k0 == 2);
  CHECK(rep.zeta_max == Catch::Approx(0.0036).epsilon(1e-15));
  CHECK(rep.c_max > 0.0);
  CHECK_NOTHROW(require_valid(s));
}

TEST_CASE("validation rejects broken specs") {
  SystemSpec s = testutil::reference_spec();
  s.nu = 1.2;
  CHECK_FALSE(validate_spec(s).pass);

  s = testutil::reference_spec();
  s.delta_nb = 0.05;  // violates delta < r (1-nu)/(1+nu) = 1/30
  CHECK_FALSE(validate_spec(s).pass);

  s = testutil::reference_spec();
  s.gmap_jet.delta_m = 2.0;  // unit determinant broken
  CHECK_FALSE(validate_spec(s).pass);

  s = testutil::reference_spec();
  s.eps = 0.2;  // eps < r required
  CHECK_FALSE(validate_spec(s).pass);
}

TEST_CASE("zeta guard") {
  const SystemSpec s = testutil::reference_spec();
  CHECK_NOTHROW(s.check_zeta(0.003));
  CHECK_THROWS_AS(s.check_zeta(0.004), DomainError);
}

TEST_CASE("JSON round trip preserves the spec and its digest") {
  const SystemSpec s = testutil::nonlinear_spec();
  const json doc = spec_to_json(s);
  const SystemSpec t = spec_from_json(doc);
  CHECK(spec_to_json(t) == doc);
  CHECK(spec_digest(t) == spec_digest(s));
  CHECK(spec_digest(t) != spec_digest(testutil::reference_spec()));
}

TEST_CASE("malformed documents are rejected") {
  json doc = spec_to_json(testutil::reference_spec());
  doc.erase("omega");
  CHECK_THROWS_AS(spec_from_json(doc), SpecError);
  doc = spec_to_json(testutil::reference_spec());
  doc["involution_case"] = "case3";
  CHECK_THROWS_AS(spec_from_json(doc), SpecError);
}
