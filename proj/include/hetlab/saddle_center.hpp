#pragma once

// Local dynamics near the saddle-center: level curves xi = a_c(eta), the
// transit (rotation) map D1(c) -> D2(c) with angle Delta_c(eta), and the
// Lyapunov-orbit trace radius eta_c.

#include <cmath>
#include <optional>

#include "hetlab/errors.hpp"
#include "hetlab/geometry.hpp"
#include "hetlab/model_core.hpp"

namespace hetlab {

// Point on the disks D1(c) / D2(c), symplectic coordinates (x2, y2).
struct DiskPoint {
  double x2 = 0.0;
  double y2 = 0.0;
  double eta() const { return 0.5 * (x2 * x2 + y2 * y2); }
  double angle() const { return std::atan2(y2, x2); }
};

struct LevelValue {
  double c = 0.0;
};

// Root xi of h(xi, eta) = c.  Newton seeded at the linear solve, bisection
// fallback when the iteration stalls.
inline double level_curve(const SystemSpec& spec, double c, double eta) {
  if (eta < -1e-300 || eta > spec.eta_star * (1.0 + 1e-12))
    throw DomainError("level_curve: eta outside [0, eta_star]");
  eta = std::max(eta, 0.0);
  const double tol = 1e-14 * std::max(1.0, std::abs(c));
  double xi = spec.omega * eta - c;
  for (int it = 0; it < spec.tol.newton_max_iter; ++it) {
    const double g = spec.h_partial(xi, eta, 0, 0) - c;
    if (std::abs(g) <= tol) return xi;
    const double dg = spec.h_xi(xi, eta);
    if (dg == 0.0) break;
    xi -= g / dg;
  }
  if (std::abs(spec.h_partial(xi, eta, 0, 0) - c) <= tol) return xi;

  // Bracket around the linear seed and bisect.
  double lo = spec.omega * eta - c, hi = lo;
  double step = std::max(1e-6, 0.5 * std::abs(lo));
  bool bracketed = false;
  for (int k = 0; k < 60 && !bracketed; ++k) {
    lo -= step;
    hi += step;
    step *= 1.5;
    const double glo = spec.h_partial(lo, eta, 0, 0) - c;
    const double ghi = spec.h_partial(hi, eta, 0, 0) - c;
    bracketed = (glo == 0.0 || ghi == 0.0 || (glo > 0) != (ghi > 0));
  }
  if (!bracketed)
    throw ConvergenceError("level_curve: Newton and bracketing both failed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = spec.h_partial(mid, eta, 0, 0) - c;
    if (std::abs(gm) <= tol) return mid;
    const double glo = spec.h_partial(lo, eta, 0, 0) - c;
    ((glo > 0) == (gm > 0) ? lo : hi) = mid;
  }
  throw ConvergenceError("level_curve: bisection did not reach residual");
}

// a_c'(eta) = -h_eta / h_xi on the level curve.
inline double level_curve_slope(const SystemSpec& spec, double c, double eta) {
  const double xi = level_curve(spec, c, eta);
  return -spec.h_eta(xi, eta) / spec.h_xi(xi, eta);
}

// First three eta-derivatives of a_c by implicit differentiation of
// h(a(eta), eta) = c, needed for analytic curve jets downstream.
struct LevelCurveJet {
  double a = 0.0;   // a_c(eta)
  double a1 = 0.0;  // a_c'
  double a2 = 0.0;  // a_c''
  double a3 = 0.0;  // a_c'''
};

inline LevelCurveJet level_curve_jet(const SystemSpec& spec, double c,
                                     double eta) {
  LevelCurveJet j;
  j.a = level_curve(spec, c, eta);
  const double hx = spec.h_partial(j.a, eta, 1, 0);
  const double he = spec.h_partial(j.a, eta, 0, 1);
  const double hxx = spec.h_partial(j.a, eta, 2, 0);
  const double hxe = spec.h_partial(j.a, eta, 1, 1);
  const double hee = spec.h_partial(j.a, eta, 0, 2);
  const double hxxx = spec.h_partial(j.a, eta, 3, 0);
  const double hxxe = spec.h_partial(j.a, eta, 2, 1);
  const double hxee = spec.h_partial(j.a, eta, 1, 2);
  const double heee = spec.h_partial(j.a, eta, 0, 3);
  j.a1 = -he / hx;
  const double n2 = hxx * j.a1 * j.a1 + 2.0 * hxe * j.a1 + hee;
  j.a2 = -n2 / hx;
  const double hx_d = hxx * j.a1 + hxe;  // d/deta of h_xi along the curve
  const double n2_d = (hxxx * j.a1 + hxxe) * j.a1 * j.a1 +
                      2.0 * hxx * j.a1 * j.a2 +
                      2.0 * (hxxe * j.a1 + hxee) * j.a1 + 2.0 * hxe * j.a2 +
                      (hxee * j.a1 + heee);
  j.a3 = -(n2_d * hx - n2 * hx_d) / (hx * hx);
  return j;
}

// Transit angle Delta_c(eta) and its first two eta-derivatives, unwrapped
// (never reduced mod 2pi: winding counts need the raw value).
struct TransitAngleJet {
  double delta = 0.0;
  double d1 = 0.0;  // dDelta/deta
  double d2 = 0.0;  // d^2 Delta/deta^2
};

inline TransitAngleJet transit_angle_jet(const SystemSpec& spec, double c,
                                         double eta) {
  const LevelCurveJet j = level_curve_jet(spec, c, eta);
  const double d2c = spec.d * spec.d;
  double arg;
  if (spec.involution_case == InvolutionCase::Case1) {
    if (!(j.a > 0.0))
      throw WrongSideOfCylinder("transit_angle: a_c(eta) <= 0 in case 1");
    arg = d2c / j.a;
  } else {
    if (!(j.a < 0.0))
      throw WrongSideOfCylinder("transit_angle: a_c(eta) >= 0 in case 2");
    arg = -d2c / j.a;
  }
  TransitAngleJet t;
  const double lg = std::log(arg);
  t.delta = j.a1 * lg;
  t.d1 = j.a2 * lg - j.a1 * j.a1 / j.a;
  t.d2 = j.a3 * lg - 3.0 * j.a1 * j.a2 / j.a +
         j.a1 * j.a1 * j.a1 / (j.a * j.a);
  return t;
}

inline double transit_angle(const SystemSpec& spec, double c, double eta) {
  return transit_angle_jet(spec, c, eta).delta;
}

// Rotation of a disk point by Delta_c(eta); eta is exactly preserved.
inline DiskPoint transit_map(const SystemSpec& spec, double c,
                             const DiskPoint& p) {
  const double eta = p.eta();
  if (eta == 0.0)
    throw EtaZero("transit_map: point on the separatrix trace");
  const double delta = transit_angle(spec, c, eta);
  const double cs = std::cos(delta), sn = std::sin(delta);
  return {p.x2 * cs - p.y2 * sn, p.x2 * sn + p.y2 * cs};
}

// Analytic Jacobian of the transit map: Rot(Delta) + Delta'(eta) J Rot p p^T.
inline Mat2 transit_jacobian(const SystemSpec& spec, double c,
                             const DiskPoint& p) {
  const double eta = p.eta();
  if (eta == 0.0) throw EtaZero("transit_jacobian: eta = 0");
  const TransitAngleJet t = transit_angle_jet(spec, c, eta);
  const Mat2 rot = rotation(t.delta);
  const Vec2 w = perp(rot.apply({p.x2, p.y2})) * t.d1;
  return {rot.a11 + w.x * p.x2, rot.a12 + w.x * p.y2,
          rot.a21 + w.y * p.x2, rot.a22 + w.y * p.y2};
}

// Unique positive root eta_c of a_c(eta) = 0 for c > 0.  Reports the number
// of sign changes found on the bracketing grid through *multiplicity rather
// than assuming uniqueness.
inline double lyapunov_eta(const SystemSpec& spec, double c,
                           int* multiplicity = nullptr) {
  if (!(c > 0.0)) throw NoRoot("lyapunov_eta: requires c > 0");
  const int kGrid = 256;
  double prev_eta = 0.0;
  double prev_a = level_curve(spec, c, 0.0);
  if (!(prev_a < 0.0))
    throw NoRoot("lyapunov_eta: a_c(0) >= 0, level geometry violated");
  int found = 0;
  double lo = 0.0, hi = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double eta = spec.eta_star * i / kGrid;
    const double a = level_curve(spec, c, eta);
    if ((prev_a < 0.0) != (a < 0.0)) {
      ++found;
      if (found == 1) {
        lo = prev_eta;
        hi = eta;
      }
    }
    prev_eta = eta;
    prev_a = a;
  }
  if (multiplicity) *multiplicity = found;
  if (found == 0) throw NoRoot("lyapunov_eta: no root on (0, eta_star]");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double a = level_curve(spec, c, mid);
    if (std::abs(a) <= 1e-14 * std::max(1.0, std::abs(c)) &&
        hi - lo <= 1e-15 * spec.eta_star)
      return mid;
    ((level_curve(spec, c, lo) < 0.0) == (a < 0.0) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hetlab
