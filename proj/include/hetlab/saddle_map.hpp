#pragma once

// Moser normal-form Poincare map S on the cross-section Sigma:
// (u, v) -> (u/f(zeta), v f(zeta)), zeta = u v invariant.  Iteration is done
// in closed form through the zeta invariant; naive composition survives only
// as a test oracle.  Also: strip boundaries s_k^{+-}, the k0 threshold and
// preimages of the symmetry diagonal u = v.

#include <cmath>

#include "hetlab/errors.hpp"
#include "hetlab/model_core.hpp"

namespace hetlab {

// Point on the saddle cross-section Sigma, Moser coordinates.
struct SigmaPoint {
  double u = 0.0;
  double v = 0.0;
  double zeta() const { return u * v; }
};

inline SigmaPoint s_apply(const SystemSpec& spec, const SigmaPoint& p) {
  const double f = spec.eval_f(p.zeta());
  return {p.u / f, p.v * f};
}

inline SigmaPoint s_inverse(const SystemSpec& spec, const SigmaPoint& p) {
  const double f = spec.eval_f(p.zeta());
  return {p.u * f, p.v / f};
}

inline SigmaPoint s_apply_n(const SystemSpec& spec, const SigmaPoint& p,
                            long n) {
  if (n == 0) return p;
  const double fn = spec.eval_f_pow(p.zeta(), n);
  return {p.u / fn, p.v * fn};
}

// Analytic Jacobian of S^n through the closed form u/F, vF with F = f^n;
// unit determinant identically.
inline void s_apply_n_jacobian(const SystemSpec& spec, const SigmaPoint& p,
                               long n, double J[4]) {
  const double zeta = p.zeta();
  const double f = spec.eval_f(zeta);
  const double F = std::pow(f, static_cast<double>(n));
  const double Fp = static_cast<double>(n) *
                    std::pow(f, static_cast<double>(n) - 1.0) *
                    spec.f_prime(zeta);
  // d(u/F)/du, d(u/F)/dv, d(vF)/du, d(vF)/dv
  J[0] = 1.0 / F - p.u * Fp * p.v / (F * F);
  J[1] = -p.u * Fp * p.u / (F * F);
  J[2] = p.v * Fp * p.v;
  J[3] = F + p.v * Fp * p.u;
}

// floor of ln((eps + r)/delta) / ln(1/nu); strips exist for k strictly above
// this value, and the code never evaluates one at k = k0.
using hetlab::k0_threshold;  // defined with the spec validation

namespace detail {

// Solve g(zeta) = zeta / f^k(zeta) = rhs by Newton, seeded at the constant-f
// solution nu^k * rhs.
inline double solve_strip_zeta(const SystemSpec& spec, long k, double rhs) {
  double zeta = std::pow(spec.nu, static_cast<double>(k)) * rhs;
  const double tol = 1e-14 * std::max(1.0, std::abs(rhs));
  for (int it = 0; it < spec.tol.newton_max_iter; ++it) {
    const double f = spec.eval_f(zeta);
    const double Fk = std::pow(f, static_cast<double>(k));
    const double g = zeta / Fk - rhs;
    if (std::abs(g) <= tol) return zeta;
    const double gp =
        (1.0 - static_cast<double>(k) * zeta * spec.f_prime(zeta) / f) / Fk;
    if (gp == 0.0) break;
    zeta -= g / gp;
  }
  {
    const double f = spec.eval_f(zeta);
    if (std::abs(zeta / std::pow(f, static_cast<double>(k)) - rhs) <= tol)
      return zeta;
  }
  throw ConvergenceError("strip zeta Newton did not converge");
}

}  // namespace detail

enum class StripSide { plus, minus };

// u = s_k^{+-}(v): solves zeta/f^k(zeta) = v (r +- eps), returns u = zeta/v.
inline double strip_boundary(const SystemSpec& spec, long k, StripSide side,
                             double v) {
  if (k <= k0_threshold(spec))
    throw KBelowThreshold("strip_boundary: k must exceed k0");
  if (std::abs(v - spec.r) > spec.eps * (1.0 + 1e-12))
    throw DomainError("strip_boundary: |v - v_+| > eps");
  const double edge = spec.r + (side == StripSide::plus ? spec.eps : -spec.eps);
  const double zeta = detail::solve_strip_zeta(spec, k, v * edge);
  return zeta / v;
}

// Strip centerline u = f^k(zeta) r, same implicit equation with edge -> r.
inline double strip_centerline(const SystemSpec& spec, long k, double v) {
  const double zeta = detail::solve_strip_zeta(spec, k, v * spec.r);
  return zeta / v;
}

// du/dv of a strip boundary by implicit differentiation.
inline double strip_boundary_slope(const SystemSpec& spec, long k,
                                   StripSide side, double v) {
  const double edge = spec.r + (side == StripSide::plus ? spec.eps : -spec.eps);
  const double zeta = detail::solve_strip_zeta(spec, k, v * edge);
  const double f = spec.eval_f(zeta);
  const double Fk = std::pow(f, static_cast<double>(k));
  const double gp =
      (1.0 - static_cast<double>(k) * zeta * spec.f_prime(zeta) / f) / Fk;
  const double dzeta_dv = edge / gp;
  return (dzeta_dv * v - zeta) / (v * v);
}

// Graph u = u_n(v) of the S^{-n} preimage of the diagonal u = v, its value
// and first two v-derivatives.  Defined by zeta = v^2 f^{2n}(zeta), solved by
// fixed-point iteration (a contraction once |f| <= (1+nu)/2).
struct DiagonalPreimageJet {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
};

inline DiagonalPreimageJet diagonal_preimage_jet(const SystemSpec& spec,
                                                 long n, double v) {
  if (n < 1) throw DomainError("diagonal_preimage: n >= 1 required");
  const double v2 = v * v;
  double zeta = v2 * std::pow(spec.nu, 2.0 * static_cast<double>(n));
  double res = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double next = v2 * spec.eval_f_pow(zeta, 2 * n);
    res = std::abs(next - zeta);
    zeta = next;
    if (res <= 1e-16 * std::max(1.0, std::abs(zeta))) break;
  }
  if (res > 1e-12 * std::max(1.0, std::abs(zeta)))
    throw ConvergenceError("diagonal_preimage: fixed-point iteration stalled");
  const double f = spec.eval_f(zeta);
  const double m = 2.0 * static_cast<double>(n);
  const double F = std::pow(f, m);
  const double Fp = m * std::pow(f, m - 1.0) * spec.f_prime(zeta);
  const double Fpp = m * (m - 1.0) * std::pow(f, m - 2.0) * spec.f_prime(zeta) *
                         spec.f_prime(zeta) +
                     m * std::pow(f, m - 1.0) * spec.f_second(zeta);
  const double denom = 1.0 - v2 * Fp;
  const double zeta1 = 2.0 * v * F / denom;
  const double zeta2 =
      (2.0 * F + 4.0 * v * Fp * zeta1 + v2 * Fpp * zeta1 * zeta1) / denom;
  DiagonalPreimageJet out;
  out.u = zeta / v;
  out.du = (zeta1 * v - zeta) / v2;
  out.d2u = (zeta2 * v2 - 2.0 * v * zeta1 + 2.0 * zeta) / (v2 * v);
  return out;
}

inline double diagonal_preimage(const SystemSpec& spec, long n, double v) {
  return diagonal_preimage_jet(spec, n, v).u;
}

}  // namespace hetlab
