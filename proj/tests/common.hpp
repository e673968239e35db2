#pragma once

#include <random>

#include "hetlab/scenarios.hpp"

namespace testutil {

// Linear reference model: constant multiplier, no higher-order Hamiltonian
// terms, identity-like global jet, fam a(mu) = mu.
inline hetlab::SystemSpec reference_spec() {
  hetlab::SystemSpec s;
  s.omega = 2.0;
  s.d = 0.2;
  s.nu = 0.5;
  s.r = 0.1;
  s.eps = 0.02;
  s.delta_nb = 0.03;
  s.involution_case = hetlab::InvolutionCase::Case1;
  s.eta_star = 0.01;
  s.tau_floor = 1e-9;
  s.gmap_jet.alpha = 1.0;
  s.gmap_jet.beta = 0.0;
  s.gmap_jet.gamma = 1.0;
  s.gmap_jet.delta_m = 1.0;
  s.gmap_jet.a_lin = 1.0;
  s.gmap_jet.b_lin = 0.0;
  s.gmap_jet.fam_a = {{1, 1.0}};
  return s;
}

inline hetlab::SystemSpec case2_spec() {
  hetlab::SystemSpec s = reference_spec();
  s.involution_case = hetlab::InvolutionCase::Case2;
  return s;
}

// Nonlinear variant: cubic Hamiltonian tail and f(zeta) = nu + zeta.
inline hetlab::SystemSpec nonlinear_spec() {
  hetlab::SystemSpec s = reference_spec();
  s.R_coeffs = {{0, 3, 0.1}, {1, 2, 0.05}};
  s.f_coeffs = {{1, 1.0}};
  s.gmap_jet.fam_a = {{1, 1.0}, {2, 0.2}};
  s.gmap_jet.fam_b = {{1, 0.1}};
  return s;
}

struct Rng {
  std::mt19937_64 gen{20240817};
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
};

}  // namespace testutil
