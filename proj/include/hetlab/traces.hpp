#pragma once

// Builders for the concrete curves of the return geometry: the image of the
// unstable segment {v = 0} under T2 o T(c) o T1 (a spiral on Pi^s), the
// images of the Lyapunov circles under the global maps (exact ellipses), and
// the nose of the spiral for c < 0.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hetlab/curve.hpp"
#include "hetlab/errors.hpp"
#include "hetlab/geometry.hpp"
#include "hetlab/global_maps.hpp"
#include "hetlab/model_core.hpp"
#include "hetlab/saddle_center.hpp"
#include "hetlab/saddle_map.hpp"

namespace hetlab {

// Whether the transit map accepts a point of D1 with this eta on level c.
inline bool transit_domain_ok(const SystemSpec& spec, double c, double eta) {
  if (!(eta > 0.0) || eta > spec.eta_star) return false;
  const double a = level_curve(spec, c, eta);
  return spec.involution_case == InvolutionCase::Case1 ? a > 0.0 : a < 0.0;
}

// T1(c)-image of the point (u, v) = (r + tau, 0) on Pi^u.
inline Vec2 t1_segment_point(const SystemSpec& spec, double c, double tau) {
  const GlobalJet& j = spec.gmap_jet;
  return {j.a_of_c(c) + j.alpha * tau, j.b_of_c(c) + j.gamma * tau};
}

inline double t1_segment_eta(const SystemSpec& spec, double c, double tau) {
  return 0.5 * t1_segment_point(spec, c, tau).norm2();
}

// Result of tracking the unstable segment: the curve over the surviving tau
// sub-range, plus exit parameters where the track left the transit domain.
// DomainExit is data, not failure: censuses are delimited by it.
struct SpiralTrace {
  std::optional<PlanarCurve> curve;
  double tau_lo = 0.0, tau_hi = 0.0;  // surviving range actually covered
  std::optional<double> exit_lo;      // requested lo was cut here
  std::optional<double> exit_hi;      // requested hi was cut here
  bool empty() const { return !curve.has_value(); }
};

namespace detail {

inline CurveJet spiral_jet(const SystemSpec& spec, double c, double tau) {
  const GlobalJet& gj = spec.gmap_jet;
  const Vec2 q1 = t1_segment_point(spec, c, tau);
  const Vec2 q1d{gj.alpha, gj.gamma};
  const double eta = 0.5 * q1.norm2();
  const double eta_d = q1.dot(q1d);
  const double eta_dd = q1d.dot(q1d);
  const TransitAngleJet ta = transit_angle_jet(spec, c, eta);
  const double dDel = ta.d1 * eta_d;                       // dDelta/dtau
  const double ddDel = ta.d2 * eta_d * eta_d + ta.d1 * eta_dd;
  const Mat2 rot = rotation(ta.delta);
  const Vec2 rq = rot.apply(q1);
  const Vec2 rqd = rot.apply(q1d);
  const Vec2 p = rq;
  const Vec2 p1 = perp(rq) * dDel + rqd;
  const Vec2 p2v =
      perp(rq) * ddDel - rq * (dDel * dDel) + perp(rqd) * (2.0 * dDel);
  const Mat2 m2 = t2_linear(spec);
  const DerivedOffsets off = derived_offsets(gj, c);
  CurveJet out;
  out.p = m2.apply(p) + Vec2{off.a1, spec.r + off.b1};
  out.d1 = m2.apply(p1);
  out.d2 = m2.apply(p2v);
  return out;
}

// Largest valid sub-range of [lo, hi] for the transit domain, located by
// bisection against the domain predicate.
inline bool shrink_to_domain(const SystemSpec& spec, double c, double& lo,
                             double& hi, std::optional<double>& exit_lo,
                             std::optional<double>& exit_hi) {
  auto ok = [&](double tau) {
    return transit_domain_ok(spec, c, t1_segment_eta(spec, c, tau));
  };
  const int kProbe = 512;
  // Find any valid point.
  double seed = lo;
  bool found = false;
  for (int i = 0; i <= kProbe && !found; ++i) {
    const double t = lo + (hi - lo) * i / kProbe;
    if (ok(t)) {
      seed = t;
      found = true;
    }
  }
  if (!found) return false;
  if (!ok(lo)) {
    double bad = lo, good = seed;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (bad + good);
      (ok(mid) ? good : bad) = mid;
    }
    exit_lo = good;
    lo = good;
  }
  if (!ok(hi)) {
    double good = seed, bad = hi;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (bad + good);
      (ok(mid) ? good : bad) = mid;
    }
    exit_hi = good;
    hi = good;
  }
  return true;
}

}  // namespace detail

// Image on Pi^s of the segment {v = 0, u = r + tau, tau in [lo, hi]} under
// T2 o T(c) o T1.  The seed grid is geometric in the distance to the nearest
// domain boundary, matching the logarithmic winding of the transit angle.
inline SpiralTrace unstable_trace_spiral(const SystemSpec& spec, double c,
                                         double tau_lo, double tau_hi,
                                         int seed_points = 256) {
  if (!(tau_hi > tau_lo)) throw DomainError("spiral: empty tau range");
  SpiralTrace out;
  double lo = tau_lo, hi = tau_hi;
  if (!detail::shrink_to_domain(spec, c, lo, hi, out.exit_lo, out.exit_hi))
    return out;
  out.tau_lo = lo;
  out.tau_hi = hi;
  PlanarCurve curve(
      lo, hi, Chart::Sigma,
      [&spec, c](double tau) { return detail::spiral_jet(spec, c, tau); });
  // Seed by walking tau in bounded phase increments: the winding rate
  // dphase/dtau = Delta'(eta) eta'(tau) + phi'(tau) is known analytically,
  // so consecutive seeds differ by at most ~0.15 rad of spiral phase and the
  // turn-based refinement cannot alias a full revolution.
  auto phase_rate = [&](double tau) {
    const GlobalJet& gj = spec.gmap_jet;
    const Vec2 q1 = t1_segment_point(spec, c, tau);
    const Vec2 q1d{gj.alpha, gj.gamma};
    const double eta = 0.5 * q1.norm2();
    const double eta_d = q1.dot(q1d);
    const TransitAngleJet ta = transit_angle_jet(spec, c, eta);
    const double dphi = (q1.x * q1d.y - q1.y * q1d.x) / q1.norm2();
    return std::abs(ta.d1 * eta_d + dphi);
  };
  std::vector<double> seed;
  const double min_step = (hi - lo) * 1e-12;
  const double max_step = (hi - lo) / std::max(8, seed_points / 8);
  double t = lo;
  seed.push_back(t);
  while (t < hi) {
    double step = 0.15 / std::max(phase_rate(t), 1e-12);
    step = std::min(std::max(step, min_step), max_step);
    t = std::min(t + step, hi);
    seed.push_back(t);
  }
  curve.seed_samples(std::move(seed));
  out.curve = std::move(curve);
  return out;
}

// Unwrapped phase phi(tau) + Delta(eta(tau)) of the spiral point, measured
// relative to tau_ref by continuity along a dense interpolation grid.
inline double spiral_phase_change(const SystemSpec& spec, double c,
                                  double tau_a, double tau_b,
                                  int grid = 2048) {
  auto phi_of = [&](double tau) {
    const Vec2 q = t1_segment_point(spec, c, tau);
    return std::atan2(q.y, q.x);
  };
  double phi = 0.0;
  double prev = phi_of(tau_a);
  for (int i = 1; i <= grid; ++i) {
    const double t = tau_a + (tau_b - tau_a) * i / grid;
    const double cur = phi_of(t);
    double dd = cur - prev;
    while (dd > M_PI) dd -= 2.0 * M_PI;
    while (dd < -M_PI) dd += 2.0 * M_PI;
    phi += dd;
    prev = cur;
  }
  const double da = transit_angle(spec, c, t1_segment_eta(spec, c, tau_a));
  const double db = transit_angle(spec, c, t1_segment_eta(spec, c, tau_b));
  return phi + (db - da);
}

// Exact ellipse: affine image of a circle, with its implicit quadratic form.
struct Ellipse {
  Vec2 center;
  Mat2 linear;  // point(theta) = center + radius * linear * (cos, sin)
  double radius = 0.0;
  Chart chart = Chart::Sigma;

  Vec2 point(double theta) const {
    return center + radius * linear.apply({std::cos(theta), std::sin(theta)});
  }
  // Q(p) = |linear^{-1}(p - center)|^2 - radius^2; zero set is the ellipse.
  double implicit(const Vec2& p) const {
    const Vec2 w = linear.inverse().apply(p - center);
    return w.norm2() - radius * radius;
  }
  Vec2 implicit_grad(const Vec2& p) const {
    const Mat2 mi = linear.inverse();
    const Vec2 w = mi.apply(p - center);
    // grad = 2 M^{-T} w
    return {2.0 * (mi.a11 * w.x + mi.a21 * w.y),
            2.0 * (mi.a12 * w.x + mi.a22 * w.y)};
  }

  PlanarCurve curve() const {
    const Ellipse e = *this;
    return PlanarCurve(0.0, 2.0 * M_PI, chart, [e](double th) {
      const Vec2 dir{std::cos(th), std::sin(th)};
      const Vec2 dird{-std::sin(th), std::cos(th)};
      CurveJet j;
      j.p = e.center + e.radius * e.linear.apply(dir);
      j.d1 = e.radius * e.linear.apply(dird);
      j.d2 = -e.radius * e.linear.apply(dir);
      return j;
    });
  }
};

enum class CircleImage {
  sigma_u_to_sigma,  // T2(c)(sigma_u): closed curve on Pi^s
  sigma_s_to_pi_u,   // T1^{-1}(c)(sigma_s): closed curve on Pi^u
};

inline Ellipse circle_image(const SystemSpec& spec, double c,
                            CircleImage which) {
  const double eta_c = lyapunov_eta(spec, c);  // throws NoRoot for c <= 0
  const double rho = std::sqrt(2.0 * eta_c);
  const DerivedOffsets off = derived_offsets(spec.gmap_jet, c);
  Ellipse e;
  e.radius = rho;
  e.chart = Chart::Sigma;
  if (which == CircleImage::sigma_u_to_sigma) {
    e.center = {off.a1, spec.r + off.b1};
    e.linear = t2_linear(spec);
  } else {
    e.center = {spec.r + off.b1, off.a1};
    e.linear = t1_linear(spec).inverse();
  }
  return e;
}

// Nose of the spiral for c < 0 (case 1): the minimum of eta along the
// T1(c)-image of {v = 0} is an exact quadratic minimization for the affine
// model; theta is the unwrapped nose angle phi + Delta_c(eta_min).
struct NoseResult {
  double theta = 0.0;     // unwrapped nose angle
  double eta_tangent = 0.0;
  double phi = 0.0;       // disk angle of the tangency point on D1
  double tau_star = 0.0;  // parameter of the tangency point on {v = 0}
};

inline NoseResult nose_angle(const SystemSpec& spec, double c) {
  if (spec.involution_case != InvolutionCase::Case1)
    throw CaseMismatch("nose_angle: case 1 only");
  if (!(c < 0.0)) throw DomainError("nose_angle: requires c < 0");
  const GlobalJet& j = spec.gmap_jet;
  if (j.a1_slope() == 0.0)
    throw GenericityFailure("nose_angle: a1'(0) = 0, nose undefined");
  const double a = j.a_of_c(c), b = j.b_of_c(c);
  const double g2 = j.alpha * j.alpha + j.gamma * j.gamma;
  NoseResult out;
  out.tau_star = -(a * j.alpha + b * j.gamma) / g2;
  const Vec2 q{a + j.alpha * out.tau_star, b + j.gamma * out.tau_star};
  out.eta_tangent = 0.5 * q.norm2();
  out.phi = std::atan2(q.y, q.x);
  out.theta = out.phi + transit_angle(spec, c, out.eta_tangent);
  return out;
}

}  // namespace hetlab
