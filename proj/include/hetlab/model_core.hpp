#pragma once

// Normal-form model specification and the scalar jets shared by every other
// component: the Hamiltonian h(xi, eta) = -xi + omega*eta + R(xi, eta) near
// the saddle-center (lambda is normalized to -1) and the Moser multiplier
// f(zeta) = nu + O(zeta) near the saddle fixed point.  Both R and f are
// finite polynomials, so all maps built on top of them are closed-form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hetlab/errors.hpp"

namespace hetlab {

enum class InvolutionCase { Case1, Case2 };

inline std::string to_string(InvolutionCase c) {
  return c == InvolutionCase::Case1 ? "case1" : "case2";
}

// One term r_ij * xi^i * eta^j of the remainder R, i + j >= 2.
struct BivariateTerm {
  int i = 0;
  int j = 0;
  double coeff = 0.0;
};

// One term f_k * zeta^k, k >= 1, of the multiplier polynomial.
struct SeriesTerm {
  int k = 0;
  double coeff = 0.0;
};

// Linear jet of the global map T1 at (u_-, 0) plus the parameter families.
// T2 is never stored: it is derived from T1 and the involution, which makes
// the reversibility identity T2 = L o T1^{-1} o L exact.
struct GlobalJet {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double delta_m = 1.0;
  // a(c) = a_lin * c, b(c) = b_lin * c (offsets of T1 on the c-levels).
  double a_lin = 0.0;
  double b_lin = 0.0;
  // mu-family offsets a(mu), b(mu) of the perturbed T2, zero constant term.
  std::vector<SeriesTerm> fam_a;
  std::vector<SeriesTerm> fam_b;

  double det() const { return alpha * delta_m - beta * gamma; }
  // Genericity slope a1'(0) = gamma*a'(0) - alpha*b'(0) of the derived T2
  // offset; the nose construction refuses to run when it vanishes.
  double a1_slope() const { return gamma * a_lin - alpha * b_lin; }

  double a_of_c(double c) const { return a_lin * c; }
  double b_of_c(double c) const { return b_lin * c; }
  double fam_a_of(double mu) const {
    double s = 0.0;
    for (const auto& t : fam_a) s += t.coeff * std::pow(mu, t.k);
    return s;
  }
  double fam_b_of(double mu) const {
    double s = 0.0;
    for (const auto& t : fam_b) s += t.coeff * std::pow(mu, t.k);
    return s;
  }
  double fam_a_slope0() const {
    for (const auto& t : fam_a)
      if (t.k == 1) return t.coeff;
    return 0.0;
  }
};

// Numerical tolerances, a single source of truth for reproducibility.
struct Tolerances {
  double newton_residual = 1e-14;
  int newton_max_iter = 50;
  double tol_root = 1e-12;           // scaled by a per-use magnitude
  double tol_transversal = 1e-6;    // scaled by curve speed
  double tol_quad = 1e-3;           // scaled by 1/r(c)
  double tol_parab = 1e-6;          // elliptic classification margin on |trace|
  double fd_step = 1e-6;            // finite-difference cross-check step
};

struct SystemSpec {
  double omega = 2.0;      // frequency ratio after lambda = -1 normalization
  double d = 0.2;          // |x1| = |y1| = d cross-section offset
  double nu = 0.5;         // saddle multiplier, 0 < nu < 1
  double r = 0.1;          // u_- = v_+ = r separatrix trace coordinate
  double eps = 0.02;       // Pi-neighborhood half-width along the trace
  double delta_nb = 0.03;  // Pi-neighborhood half-width across the trace
  InvolutionCase involution_case = InvolutionCase::Case1;
  std::vector<BivariateTerm> R_coeffs;  // remainder R(xi,eta), orders >= 2
  std::vector<SeriesTerm> f_coeffs;     // f(zeta) - nu, orders >= 1
  GlobalJet gmap_jet;
  double eta_star = 0.01;  // validity bound of the local model, eta <= eta_star
  double tau_floor = 1e-9;  // smallest |tau| tracked in V_0

  Tolerances tol;

  // Derived during validation.
  double zeta_max() const { return (r + eps) * delta_nb; }

  // --- Hamiltonian jet h(xi,eta) = -xi + omega*eta + R(xi,eta) ---

  // Mixed partial d^(i+j) h / dxi^i deta^j.
  double h_partial(double xi, double eta, int di, int dj) const {
    double s = 0.0;
    if (di == 0 && dj == 0) s = -xi + omega * eta;
    if (di == 1 && dj == 0) s = -1.0;
    if (di == 0 && dj == 1) s = omega;
    for (const auto& t : R_coeffs) {
      if (t.i < di || t.j < dj) continue;
      double c = t.coeff;
      for (int m = 0; m < di; ++m) c *= static_cast<double>(t.i - m);
      for (int m = 0; m < dj; ++m) c *= static_cast<double>(t.j - m);
      s += c * std::pow(xi, t.i - di) * std::pow(eta, t.j - dj);
    }
    return s;
  }

  double eval_h(double xi, double eta) const {
    if (eta < 0.0 || eta > eta_star * (1.0 + 1e-12))
      throw DomainError("eval_h: eta outside [0, eta_star]");
    return h_partial(xi, eta, 0, 0);
  }
  double h_xi(double xi, double eta) const { return h_partial(xi, eta, 1, 0); }
  double h_eta(double xi, double eta) const { return h_partial(xi, eta, 0, 1); }

  // --- Moser multiplier f(zeta) = nu + sum f_k zeta^k ---

  double eval_f(double zeta) const {
    check_zeta(zeta);
    double s = nu;
    for (const auto& t : f_coeffs) s += t.coeff * std::pow(zeta, t.k);
    return s;
  }
  double f_prime(double zeta) const {
    double s = 0.0;
    for (const auto& t : f_coeffs)
      s += t.coeff * t.k * std::pow(zeta, t.k - 1);
    return s;
  }
  double f_second(double zeta) const {
    double s = 0.0;
    for (const auto& t : f_coeffs)
      if (t.k >= 2)
        s += t.coeff * t.k * (t.k - 1) * std::pow(zeta, t.k - 2);
    return s;
  }
  // f(zeta)^n; zeta is invariant along S-orbits, so the n-th iterate of S
  // multiplies v by exactly this power.
  double eval_f_pow(double zeta, long n) const {
    return std::pow(eval_f(zeta), static_cast<double>(n));
  }

  void check_zeta(double zeta) const {
    if (std::abs(zeta) > zeta_max() * (1.0 + 1e-9))
      throw DomainError("zeta outside working range |zeta| <= zeta_max");
  }
};

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> violations;
  double zeta_max = 0.0;
  double c_max = 0.0;
  long k0 = 0;

  void fail(std::string msg) {
    pass = false;
    violations.push_back(std::move(msg));
  }
};

inline long k0_threshold(const SystemSpec& spec) {
  const double v =
      std::log((spec.eps + spec.r) / spec.delta_nb) / std::log(1.0 / spec.nu);
  if (v >= 1e6) return 1000000;
  return static_cast<long>(std::floor(v));
}

namespace detail {

// Largest |c| on a geometric grid for which a_c stays defined and strictly
// monotone increasing on [0, eta_star].  The paper only asks for "c small
// enough"; this pins a concrete, reproducible bound.
inline double find_c_max(const SystemSpec& spec) {
  const int kEtaSamples = 64;
  auto monotone_ok = [&](double c) {
    double xi_prev = 0.0;
    bool first = true;
    for (int i = 0; i <= kEtaSamples; ++i) {
      const double eta = spec.eta_star * i / kEtaSamples;
      // Newton for h(xi,eta)=c seeded at the linear solve.
      double xi = spec.omega * eta - c;
      bool conv = false;
      for (int it = 0; it < spec.tol.newton_max_iter; ++it) {
        const double g = spec.h_partial(xi, eta, 0, 0) - c;
        const double dg = spec.h_xi(xi, eta);
        if (std::abs(dg) < 1e-12) return false;
        xi -= g / dg;
        if (std::abs(spec.h_partial(xi, eta, 0, 0) - c) <=
            1e-13 * std::max(1.0, std::abs(c))) {
          conv = true;
          break;
        }
      }
      if (!conv) return false;
      const double hx = spec.h_xi(xi, eta);
      const double he = spec.h_eta(xi, eta);
      if (hx >= 0.0) return false;           // model leaves the -1 + ... regime
      if (-he / hx <= 0.0) return false;     // a_c' must stay positive
      if (!first && xi <= xi_prev) return false;
      xi_prev = xi;
      first = false;
    }
    return true;
  };
  // Never exceed the scale on which a_c(0) = -c stays inside the eta-box
  // image; omega*eta_star/2 is a conservative cap.
  const double cap = spec.omega * spec.eta_star / 2.0;
  for (int j = 0; j < 40; ++j) {
    const double c = cap * std::pow(2.0, -j);
    if (monotone_ok(c) && monotone_ok(-c)) return c;
  }
  return 0.0;
}

}  // namespace detail

inline ValidationReport validate_spec(const SystemSpec& spec) {
  ValidationReport rep;
  if (!(spec.nu > 0.0 && spec.nu < 1.0)) rep.fail("nu in (0,1)");
  if (!(spec.omega > 0.0)) rep.fail("omega > 0");
  if (!(spec.d > 0.0)) rep.fail("d > 0");
  if (!(spec.r > 0.0)) rep.fail("r > 0");
  if (!(spec.eps > 0.0)) rep.fail("eps > 0");
  if (!(spec.delta_nb > 0.0)) rep.fail("delta > 0");
  if (!(spec.eta_star > 0.0)) rep.fail("eta_star > 0");
  if (!(spec.tau_floor > 0.0)) rep.fail("tau_floor > 0");
  if (spec.nu > 0.0 && spec.nu < 1.0) {
    if (!(spec.delta_nb < spec.r * (1.0 - spec.nu) / (1.0 + spec.nu)))
      rep.fail("delta < r(1-nu)/(1+nu)");
  }
  if (!(spec.delta_nb < spec.r - spec.eps)) rep.fail("delta < r - eps");
  if (!(spec.eps + spec.r > spec.delta_nb)) rep.fail("eps + r > delta");
  for (const auto& t : spec.R_coeffs)
    if (t.i + t.j < 2) rep.fail("R term of order < 2");
  for (const auto& t : spec.f_coeffs)
    if (t.k < 1) rep.fail("f term of order < 1");
  if (std::abs(spec.gmap_jet.det() - 1.0) > 1e-12)
    rep.fail("global jet determinant != 1 (symplecticity of T1)");
  for (const auto& t : spec.gmap_jet.fam_a)
    if (t.k < 1) rep.fail("fam_a has a constant term (a(0) must be 0)");
  for (const auto& t : spec.gmap_jet.fam_b)
    if (t.k < 1) rep.fail("fam_b has a constant term (b(0) must be 0)");

  rep.zeta_max = spec.zeta_max();
  // Interval bound: |f(zeta) - nu| <= sum |f_k| zeta_max^k must keep
  // |f| <= (1+nu)/2 on the working zeta range.
  if (spec.nu > 0.0 && spec.nu < 1.0) {
    double slack = 0.0;
    for (const auto& t : spec.f_coeffs)
      slack += std::abs(t.coeff) * std::pow(rep.zeta_max, t.k);
    if (!(spec.nu + slack <= (1.0 + spec.nu) / 2.0))
      rep.fail("|f(zeta)| <= (1+nu)/2 on |zeta| <= zeta_max");
  }
  if (rep.pass) {
    rep.k0 = k0_threshold(spec);
    rep.c_max = detail::find_c_max(spec);
    if (rep.c_max <= 0.0) rep.fail("no c-range with a_c monotone on [0,eta_star]");
  }
  return rep;
}

inline void require_valid(const SystemSpec& spec) {
  const auto rep = validate_spec(spec);
  if (!rep.pass) {
    std::string msg = "invalid SystemSpec:";
    for (const auto& v : rep.violations) msg += " [" + v + "]";
    throw SpecError(msg);
  }
}

}  // namespace hetlab
