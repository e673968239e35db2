#pragma once

// The theorems as executable experiments.  Every scenario returns a
// ScanResult whose numerical claims carry their certificates (residuals,
// derivative bounds, brackets).  Runs are deterministic given (spec, inputs,
// tolerances); wall time is kept out of the serialized result so re-runs are
// byte-identical.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetlab/curve.hpp"
#include "hetlab/errors.hpp"
#include "hetlab/global_maps.hpp"
#include "hetlab/model_core.hpp"
#include "hetlab/saddle_center.hpp"
#include "hetlab/saddle_map.hpp"
#include "hetlab/spec_io.hpp"
#include "hetlab/traces.hpp"

namespace hetlab {

struct ScanResult {
  std::string scenario;
  std::string digest;
  json inputs;
  json outputs;
  bool certified = false;
  double wall_time_ms = 0.0;  // informational only, never serialized

  json to_json() const {
    json j;
    j["scenario"] = scenario;
    j["spec_digest"] = digest;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["certified"] = certified;
    return j;
  }
};

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

inline json record_to_json(const IntersectionRecord& r) {
  return {{"t", r.t},
          {"point", {r.point.x, r.point.y}},
          {"value", r.value},
          {"derivative", r.derivative},
          {"transversal", r.transversal}};
}

inline json tolerances_json(const SystemSpec& spec) {
  const Tolerances& t = spec.tol;
  return {{"newton_residual", t.newton_residual},
          {"tol_root", t.tol_root},
          {"tol_transversal", t.tol_transversal},
          {"tol_quad", t.tol_quad},
          {"tol_parab", t.tol_parab},
          {"fd_step", t.fd_step}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// V0 homoclinic census (case 1): both spiral branches of the unstable trace,
// all crossings with u = 0, every one transversal, count against the
// phase-span prediction.
// ---------------------------------------------------------------------------
inline ScanResult census_v0_case1(const SystemSpec& spec, double tau_min,
                                  double tau_max) {
  if (spec.involution_case != InvolutionCase::Case1)
    throw CaseMismatch("census_v0_case1: type-2 connection has no V0 census");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "census_v0";
  res.digest = spec_digest(spec);
  res.inputs = {{"c", 0.0},
                {"tau_min", tau_min},
                {"tau_max", tau_max},
                {"tolerances", detail::tolerances_json(spec)}};
  bool all_transversal = true;
  bool counts_ok = true;
  json branches = json::array();
  const auto g = functional_u_equals(0.0);
  for (int sign = 0; sign < 2; ++sign) {
    const double lo = sign == 0 ? tau_min : -tau_max;
    const double hi = sign == 0 ? tau_max : -tau_min;
    const SpiralTrace trace = unstable_trace_spiral(spec, 0.0, lo, hi);
    json b;
    b["branch"] = sign == 0 ? "plus" : "minus";
    if (trace.empty()) {
      b["count"] = 0;
      b["records"] = json::array();
      branches.push_back(b);
      counts_ok = false;
      continue;
    }
    const auto recs = find_crossings(*trace.curve, g, spec.tol.tol_root,
                                     spec.tol.tol_transversal);
    const double span =
        std::abs(spiral_phase_change(spec, 0.0, trace.tau_lo, trace.tau_hi));
    const double predicted = span / M_PI;
    b["count"] = recs.size();
    b["phase_span"] = span;
    b["predicted_count"] = predicted;
    json jr = json::array();
    for (const auto& r : recs) {
      if (!r.transversal) all_transversal = false;
      jr.push_back(detail::record_to_json(r));
    }
    b["records"] = jr;
    if (std::abs(static_cast<double>(recs.size()) - predicted) > 1.0 + 1e-9)
      counts_ok = false;
    branches.push_back(b);
  }
  res.outputs["branches"] = branches;
  res.outputs["all_transversal"] = all_transversal;
  res.outputs["count_within_phase_law"] = counts_ok;
  res.certified = all_transversal && counts_ok;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Finite census on levels c < 0 (case 1): the segment splits at the nose into
// two finite spirals; count transversal crossings with u = 0.
// ---------------------------------------------------------------------------
inline ScanResult census_c_negative(const SystemSpec& spec, double c,
                                    double tau_min, double tau_max) {
  if (spec.involution_case != InvolutionCase::Case1)
    throw CaseMismatch("census_c_negative: case 1 only");
  if (!(c < 0.0)) throw DomainError("census_c_negative: requires c < 0");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "census_c_negative";
  res.digest = spec_digest(spec);
  res.inputs = {{"c", c},
                {"tau_min", tau_min},
                {"tau_max", tau_max},
                {"tolerances", detail::tolerances_json(spec)}};
  const NoseResult nose = nose_angle(spec, c);
  res.outputs["eta_cut"] = nose.eta_tangent;
  res.outputs["nose_theta"] = nose.theta;
  bool all_transversal = true;
  size_t total = 0;
  json branches = json::array();
  const auto g = functional_u_equals(0.0);
  for (int sign = 0; sign < 2; ++sign) {
    const double lo = sign == 0 ? tau_min : -tau_max;
    const double hi = sign == 0 ? tau_max : -tau_min;
    const SpiralTrace trace = unstable_trace_spiral(spec, c, lo, hi);
    json b;
    b["branch"] = sign == 0 ? "plus" : "minus";
    if (trace.empty()) {
      b["count"] = 0;
      branches.push_back(b);
      continue;
    }
    const auto recs = find_crossings(*trace.curve, g, spec.tol.tol_root,
                                     spec.tol.tol_transversal);
    const double span =
        std::abs(spiral_phase_change(spec, c, trace.tau_lo, trace.tau_hi));
    b["count"] = recs.size();
    b["phase_span"] = span;
    json jr = json::array();
    for (const auto& r : recs) {
      if (!r.transversal) all_transversal = false;
      jr.push_back(detail::record_to_json(r));
    }
    b["records"] = jr;
    total += recs.size();
    branches.push_back(b);
  }
  res.outputs["branches"] = branches;
  res.outputs["total_count"] = total;
  res.outputs["all_transversal"] = all_transversal;
  res.certified = all_transversal;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Quadratic-tangency sequence c_n < 0 (Theorem-6 mechanism): dual detection
// by the nose-angle equation and by a direct double-root certificate.
// ---------------------------------------------------------------------------

namespace detail {

// Spiral restricted to a tau-window around the nose, used as the curve
// builder of the double-root detector.
inline PlanarCurve nose_window_spiral(const SystemSpec& spec, double c) {
  const NoseResult nose = nose_angle(spec, c);
  // Window wide enough for ~2 pi of extra transit phase on each side.
  const double eta_w =
      std::abs(c) * (std::exp(2.0 * M_PI / spec.omega) - 1.0) / spec.omega;
  const GlobalJet& j = spec.gmap_jet;
  const double g2 = j.alpha * j.alpha + j.gamma * j.gamma;
  const double tau_w = std::sqrt(
      2.0 * std::min(eta_w + nose.eta_tangent, spec.eta_star) / g2);
  const double lo = std::max(-spec.eps, nose.tau_star - tau_w);
  const double hi = std::min(spec.eps, nose.tau_star + tau_w);
  SpiralTrace tr = unstable_trace_spiral(spec, c, lo, hi);
  if (tr.empty())
    throw DomainError("nose_window_spiral: transit domain empty");
  return *tr.curve;
}

}  // namespace detail

struct TangencyPair {
  int index = 0;             // winding index k of the nose-angle equation
  double c_nose = 0.0;       // detector (i): nose-angle root
  double c_double_root = 0.0;  // detector (ii): direct certificate
  TangencyRecord record;     // certificate of detector (ii)
  bool agree = false;
};

inline ScanResult tangency_sequence_negative(const SystemSpec& spec,
                                             double c_start, int count) {
  if (spec.involution_case != InvolutionCase::Case1)
    throw CaseMismatch("tangency_sequence_negative: case 1 only");
  if (!(c_start < 0.0)) throw DomainError("c_start must be negative");
  if (spec.gmap_jet.a1_slope() == 0.0)
    throw GenericityFailure("tangency_sequence_negative: a1'(0) = 0");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "tangency_sequence_negative";
  res.digest = spec_digest(spec);
  res.inputs = {{"c_start", c_start},
                {"count", count},
                {"tolerances", detail::tolerances_json(spec)}};

  // Detector (i): W(c) = theta(c) + phi(c) is continuous and increases
  // without bound as c -> 0-; tangencies solve W = pi (mod 2 pi).
  auto W = [&](double c) {
    const NoseResult nr = nose_angle(spec, c);
    return nr.theta + nr.phi;
  };
  auto W_of_log = [&](double lg) { return W(-std::exp(lg)); };
  double lg = std::log(-c_start);
  double w_here = W_of_log(lg);
  const long k_first =
      static_cast<long>(std::ceil((w_here - M_PI) / (2.0 * M_PI)));
  const double lg_step = -0.25 / spec.omega;  // ~0.5 rad of theta per step

  json seq = json::array();
  std::vector<TangencyPair> pairs;
  bool all_ok = true;
  long k = k_first;
  for (int n = 0; n < count; ++n, ++k) {
    const double target = M_PI + 2.0 * M_PI * static_cast<double>(k);
    // Walk the geometric grid until the unwrapped W brackets the target.
    double lg_hi = lg, w_hi = w_here;
    int guard = 0;
    while (w_hi < target && guard++ < 20000) {
      lg = lg_hi;
      w_here = w_hi;
      lg_hi += lg_step;
      w_hi = W_of_log(lg_hi);
    }
    if (w_hi < target)
      throw ConvergenceError("tangency scan: nose angle failed to advance");
    double a = lg, b_ = lg_hi, fa = w_here - target, fb = w_hi - target;
    if (a > b_) {
      std::swap(a, b_);
      std::swap(fa, fb);
    }
    const double lg_root = detail::refine_root(
        [&](double x) { return W_of_log(x) - target; }, a, b_, fa, fb, 1e-13);
    TangencyPair pair;
    pair.index = static_cast<int>(k);
    pair.c_nose = -std::exp(lg_root);

    // Detector (ii): direct double-root detection.  At the double root the
    // number of sign changes of u along the nose window jumps by two, so the
    // fold is the jump point of the crossing count, bisected on a |c|-scaled
    // bracket around the nose-angle root.
    const NoseResult nr = nose_angle(spec, pair.c_nose);
    const double r_c = std::sqrt(2.0 * nr.eta_tangent);
    auto sign_changes = [&](double cc) {
      const PlanarCurve cv = detail::nose_window_spiral(spec, cc);
      // Count on the nose neighbourhood only: the extra crossing pair of the
      // fold lives within ~|tau_star| of the nose, far below the full
      // phase-based window at small |c|.
      const double tau_s = nose_angle(spec, cc).tau_star;
      const double half = 0.9 * std::abs(tau_s);
      const double t0 = std::max(cv.samples().front(), tau_s - half);
      const double t1 = std::min(cv.samples().back(), tau_s + half);
      const int n_grid = 20000;
      int cnt = 0;
      double prev = cv.at(t0).p.x;
      for (int i = 1; i <= n_grid; ++i) {
        const double v = cv.at(t0 + (t1 - t0) * i / n_grid).p.x;
        if (prev != 0.0 && v != 0.0 && (v > 0) != (prev > 0)) ++cnt;
        prev = v;
      }
      return cnt;
    };
    // The extra crossing pair lives inside the nose window only while the
    // nose-angle residual is small against |c|, hence the |c|-scaled bracket.
    double eps_c = std::min(1e-5, 0.2 * std::abs(pair.c_nose));
    for (int retry = 0; retry < 4; ++retry, eps_c *= 0.25) {
      double c_lo = pair.c_nose * (1.0 + eps_c);
      double c_hi = pair.c_nose * (1.0 - eps_c);
      const int n_lo = sign_changes(c_lo);
      if (n_lo == sign_changes(c_hi)) continue;
      while (std::abs(c_hi - c_lo) > 1e-10 * std::abs(pair.c_nose)) {
        const double mid = 0.5 * (c_lo + c_hi);
        (sign_changes(mid) == n_lo ? c_lo : c_hi) = mid;
      }
      pair.c_double_root = 0.5 * (c_lo + c_hi);
      pair.agree = std::abs(pair.c_double_root - pair.c_nose) <=
                   1e-6 * std::abs(pair.c_nose);
      break;
    }

    // Quadratic certificate at the detected parameter: the image of the
    // circle eta = eta_c under the global map is an exact ellipse tangent to
    // the stable trace u = 0, with graph curvature sqrt(alpha^2+gamma^2)/r.
    // For a determinant-one affine global map the tangent speed at the
    // extremum is |v'| = r (alpha delta - beta gamma) / sqrt(alpha^2+gamma^2)
    // = r / sqrt(alpha^2+gamma^2), so the graph second derivative of the
    // ellipse tangency is exactly (alpha^2+gamma^2)^{3/2} / r.
    const GlobalJet& gj = spec.gmap_jet;
    const double g2e = gj.alpha * gj.alpha + gj.gamma * gj.gamma;
    const double expected_d2 = g2e * std::sqrt(g2e) / r_c;
    if (pair.agree) {
      Ellipse ell;
      ell.radius = r_c;
      ell.chart = Chart::Sigma;
      const DerivedOffsets off =
          derived_offsets(spec.gmap_jet, pair.c_double_root);
      ell.center = {off.a1, spec.r + off.b1};
      ell.linear = t2_linear(spec);
      const PlanarCurve ec = ell.curve();
      const auto g = functional_u_equals(0.0);
      if (const auto ex = extremum_nearest_zero(ec, g)) {
        TangencyRecord& rec = pair.record;
        rec.scan_value = pair.c_double_root;
        rec.t_star = ex->t;
        const CurveJet jt = ec.at(ex->t);
        rec.point = jt.p;
        rec.functional_value = ex->value;
        rec.first_derivative = g.grad(jt.p).dot(jt.d1);
        rec.second_derivative = ex->second;
        const double sp = jt.d1.norm2();
        rec.graph_second_derivative = sp > 0.0 ? ex->second / sp : 0.0;
        rec.certified =
            std::abs(rec.graph_second_derivative) >= 0.5 * expected_d2 &&
            std::abs(rec.functional_value) <= 1e-6 * r_c;
      }
    }
    if (!pair.agree || !pair.record.certified) all_ok = false;
    json e;
    e["n"] = n;
    e["winding_index"] = pair.index;
    e["c_nose"] = pair.c_nose;
    e["c_double_root"] = pair.c_double_root;
    e["detectors_agree"] = pair.agree;
    e["quadratic_certified"] = pair.record.certified;
    e["graph_second_derivative"] = pair.record.graph_second_derivative;
    e["expected_second_derivative"] = expected_d2;
    e["r_c"] = r_c;
    e["theta"] = nr.theta;
    seq.push_back(e);
    pairs.push_back(pair);

    // Continue the walk just past the current root.
    lg = lg_root + lg_step;
    w_here = W_of_log(lg);
  }
  // Spacing law diagnostics.
  json spacing = json::array();
  for (size_t i = 0; i + 1 < pairs.size(); ++i)
    spacing.push_back(std::log(std::abs(pairs[i].c_nose)) -
                      std::log(std::abs(pairs[i + 1].c_nose)));
  res.outputs["sequence"] = seq;
  res.outputs["log_spacing"] = spacing;
  res.outputs["expected_log_spacing"] = 2.0 * M_PI / spec.omega;
  res.certified = all_ok;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Heteroclinic web for c > 0 (case 1): the two transverse heteroclinics on
// each side, the spiral homoclinic census outside sigma_s, and the S-iterated
// lambda-lemma crossings.
// ---------------------------------------------------------------------------

namespace detail {

// tau-roots of eta(tau) = eta_c along the T1-image of {v = 0}.
inline std::pair<double, double> segment_circle_cut(const SystemSpec& spec,
                                                    double c, double eta_c) {
  const GlobalJet& j = spec.gmap_jet;
  const double a = j.a_of_c(c), b = j.b_of_c(c);
  const double A = 0.5 * (j.alpha * j.alpha + j.gamma * j.gamma);
  const double B = a * j.alpha + b * j.gamma;
  const double C = 0.5 * (a * a + b * b) - eta_c;
  const double disc = B * B - 4.0 * A * C;
  if (!(disc > 0.0))
    throw NoRoot("segment does not cross the Lyapunov circle");
  const double sq = std::sqrt(disc);
  const double t1 = (-B - sq) / (2.0 * A);
  const double t2 = (-B + sq) / (2.0 * A);
  return {std::min(t1, t2), std::max(t1, t2)};
}

inline CrossingFunctional ellipse_functional(const Ellipse& e) {
  const Mat2 mi = e.linear.inverse();
  const std::array<double, 4> H = {
      2.0 * (mi.a11 * mi.a11 + mi.a21 * mi.a21),
      2.0 * (mi.a11 * mi.a12 + mi.a21 * mi.a22),
      2.0 * (mi.a11 * mi.a12 + mi.a21 * mi.a22),
      2.0 * (mi.a12 * mi.a12 + mi.a22 * mi.a22)};
  CrossingFunctional g;
  g.name = "ellipse";
  g.value = [e](const Vec2& p) { return e.implicit(p); };
  g.grad = [e](const Vec2& p) { return e.implicit_grad(p); };
  g.hess = [H](const Vec2&) { return H; };
  return g;
}

// S^n image of an ellipse arc as a PlanarCurve over theta in [lo, hi].
inline PlanarCurve iterated_arc(const SystemSpec& spec, const Ellipse& e,
                                long n, double th_lo, double th_hi) {
  return PlanarCurve(th_lo, th_hi, Chart::Sigma, [&spec, e, n](double th) {
    const Vec2 dir{std::cos(th), std::sin(th)};
    const Vec2 dird{-std::sin(th), std::cos(th)};
    const Vec2 p = e.center + e.radius * e.linear.apply(dir);
    const Vec2 d1 = e.radius * e.linear.apply(dird);
    const Vec2 d2 = -e.radius * e.linear.apply(dir);
    const SigmaPoint sp{p.x, p.y};
    const SigmaPoint im = s_apply_n(spec, sp, n);
    double J[4];
    s_apply_n_jacobian(spec, sp, n, J);
    CurveJet out;
    out.p = {im.u, im.v};
    out.d1 = {J[0] * d1.x + J[1] * d1.y, J[2] * d1.x + J[3] * d1.y};
    // Second derivative by a central difference of the Jacobian action;
    // only the first derivative feeds certificates here.
    const double h = 1e-6;
    const Vec2 pm = e.center + e.radius * e.linear.apply(
                                   Vec2{std::cos(th - h), std::sin(th - h)});
    const Vec2 pp = e.center + e.radius * e.linear.apply(
                                   Vec2{std::cos(th + h), std::sin(th + h)});
    const SigmaPoint im_m = s_apply_n(spec, {pm.x, pm.y}, n);
    const SigmaPoint im_p = s_apply_n(spec, {pp.x, pp.y}, n);
    out.d2 = {(im_p.u - 2.0 * im.u + im_m.u) / (h * h),
              (im_p.v - 2.0 * im.v + im_m.v) / (h * h)};
    return out;
  });
}

}  // namespace detail

inline ScanResult heteroclinic_web_positive(const SystemSpec& spec, double c) {
  if (spec.involution_case != InvolutionCase::Case1)
    throw CaseMismatch("heteroclinic_web_positive: case 1 only");
  if (!(c > 0.0)) throw DomainError("heteroclinic_web_positive: c > 0");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "heteroclinic_web";
  res.digest = spec_digest(spec);
  res.inputs = {{"c", c}, {"tolerances", detail::tolerances_json(spec)}};

  // (a) Two transverse heteroclinic crossings on each cross-section.
  const Ellipse e_sigma = circle_image(spec, c, CircleImage::sigma_u_to_sigma);
  const Ellipse e_piu = circle_image(spec, c, CircleImage::sigma_s_to_pi_u);
  const PlanarCurve ce_sigma = e_sigma.curve();
  const PlanarCurve ce_piu = e_piu.curve();
  auto recs_u0 = find_crossings(ce_sigma, functional_u_equals(0.0),
                                spec.tol.tol_root, spec.tol.tol_transversal);
  auto recs_v0 = find_crossings(ce_piu, functional_v_equals(0.0),
                                spec.tol.tol_root, spec.tol.tol_transversal);
  bool hetero_ok = recs_u0.size() == 2 && recs_v0.size() == 2;
  for (const auto& r : recs_u0) hetero_ok = hetero_ok && r.transversal;
  for (const auto& r : recs_v0) hetero_ok = hetero_ok && r.transversal;
  // Reflection pairing: L_sigma maps (0, v) crossings to (v, 0) crossings.
  double pair_err = 0.0;
  if (hetero_ok) {
    std::vector<double> vs, us;
    for (const auto& r : recs_u0) vs.push_back(r.point.y);
    for (const auto& r : recs_v0) us.push_back(r.point.x);
    std::sort(vs.begin(), vs.end());
    std::sort(us.begin(), us.end());
    pair_err = std::max(std::abs(vs[0] - us[0]), std::abs(vs[1] - us[1]));
    hetero_ok = pair_err <= 1e-10;
  }
  res.outputs["heteroclinic"] = {
      {"count_u0", recs_u0.size()},
      {"count_v0", recs_v0.size()},
      {"reflection_pair_error", pair_err},
      {"records_u0", json::array()},
      {"records_v0", json::array()}};
  for (const auto& r : recs_u0)
    res.outputs["heteroclinic"]["records_u0"].push_back(
        detail::record_to_json(r));
  for (const auto& r : recs_v0)
    res.outputs["heteroclinic"]["records_v0"].push_back(
        detail::record_to_json(r));

  // (b) Spiral census outside sigma_s.
  const double eta_c = lyapunov_eta(spec, c);
  const auto cut = detail::segment_circle_cut(spec, c, eta_c);
  size_t spiral_count = 0;
  bool spiral_transversal = true;
  json spirals = json::array();
  const auto gu0 = functional_u_equals(0.0);
  for (int side = 0; side < 2; ++side) {
    const double lo = side == 0 ? cut.second + spec.tau_floor : -spec.eps;
    const double hi = side == 0 ? spec.eps : cut.first - spec.tau_floor;
    if (!(hi > lo)) continue;
    const SpiralTrace tr = unstable_trace_spiral(spec, c, lo, hi);
    json b;
    b["side"] = side == 0 ? "outer_plus" : "outer_minus";
    if (tr.empty()) {
      b["count"] = 0;
      spirals.push_back(b);
      continue;
    }
    const auto recs = find_crossings(*tr.curve, gu0, spec.tol.tol_root,
                                     spec.tol.tol_transversal);
    for (const auto& r : recs)
      if (!r.transversal) spiral_transversal = false;
    spiral_count += recs.size();
    b["count"] = recs.size();
    b["phase_span"] =
        std::abs(spiral_phase_change(spec, c, tr.tau_lo, tr.tau_hi));
    spirals.push_back(b);
  }
  res.outputs["spiral_census"] = {{"branches", spirals},
                                  {"total_count", spiral_count},
                                  {"all_transversal", spiral_transversal},
                                  {"middle_piece", "DomainExit"}};

  // (c) S-iterated segments of T2(sigma_u) against T1^{-1}(sigma_s).
  // Split the u > 0 arc of the closed curve at its u-maximum into two
  // segments with endpoints on u = 0.
  const auto arc_roots = find_crossings(ce_sigma, functional_u_equals(0.0),
                                        spec.tol.tol_root, 0.0);
  json lam = json::array();
  int n0 = -1;
  bool lambda_ok = false;
  if (arc_roots.size() == 2) {
    double th_a = arc_roots[0].t, th_b = arc_roots[1].t;
    // Choose the arc on which u > 0.
    auto u_at = [&](double th) { return e_sigma.point(th).x; };
    double mid = 0.5 * (th_a + th_b);
    if (u_at(mid) < 0.0) {
      std::swap(th_a, th_b);
      th_b += 2.0 * M_PI;
      mid = 0.5 * (th_a + th_b);
    }
    // u-maximum on the arc by golden-section-free Newton on u'(theta).
    double th_m = mid;
    {
      const GlobalJet& j = spec.gmap_jet;
      // u(theta) = a1 + rho (gamma cos + alpha sin): closed-form extremum.
      const double phase = std::atan2(j.alpha, j.gamma);
      th_m = phase;
      while (th_m < th_a) th_m += 2.0 * M_PI;
      while (th_m > th_b) th_m -= 2.0 * M_PI;
      if (th_m < th_a || th_m > th_b) th_m = mid;
    }
    const auto g_ell = detail::ellipse_functional(e_piu);
    const double u_lo_t = e_piu.center.x - 1.3 * e_piu.radius *
                              std::hypot(e_piu.linear.a11, e_piu.linear.a12);
    const double u_hi_t = e_piu.center.x + 1.3 * e_piu.radius *
                              std::hypot(e_piu.linear.a11, e_piu.linear.a12);
    auto test_n = [&](long n) -> std::pair<bool, double> {
      size_t hits = 0;
      double vdist = 0.0;
      bool ok = true;
      for (int seg = 0; seg < 2; ++seg) {
        const double s_lo = seg == 0 ? th_a : th_m;
        const double s_hi = seg == 0 ? th_m : th_b;
        // theta window whose S^n-image u lands in the target u-range.
        auto img_u = [&](double th) {
          const Vec2 p = e_sigma.point(th);
          return s_apply_n(spec, {p.x, p.y}, n).u;
        };
        // img_u is monotone from ~0 at the u=0 end to its max; bisect both
        // target edges on each half-arc.
        auto solve_th = [&](double target, double a_, double b_) {
          double fa = img_u(a_) - target, fb = img_u(b_) - target;
          if ((fa > 0) == (fb > 0)) return (std::abs(fa) < std::abs(fb)) ? a_ : b_;
          if (a_ > b_) {
            std::swap(a_, b_);
            std::swap(fa, fb);
          }
          return detail::refine_root(
              [&](double th) { return img_u(th) - target; }, a_, b_, fa, fb,
              0.0);
        };
        const double end0 = seg == 0 ? th_a : th_b;   // u -> 0 end
        const double endm = th_m;                     // u-max end
        double w_a = solve_th(u_lo_t, end0, endm);
        double w_b = solve_th(u_hi_t, end0, endm);
        if (w_a > w_b) std::swap(w_a, w_b);
        if (!(w_b > w_a)) {
          ok = false;
          continue;
        }
        PlanarCurve img = detail::iterated_arc(spec, e_sigma, n, w_a, w_b);
        std::vector<double> seedg;
        for (int i = 0; i <= 512; ++i)
          seedg.push_back(w_a + (w_b - w_a) * i / 512.0);
        img.seed_samples(seedg);
        const auto recs = find_crossings(img, g_ell, spec.tol.tol_root,
                                         spec.tol.tol_transversal);
        size_t tcount = 0;
        for (const auto& r : recs) {
          if (r.transversal) ++tcount;
          vdist = std::max(vdist, std::abs(r.point.y));
        }
        if (tcount < 2) ok = false;
        hits += tcount;
      }
      return {ok && hits >= 4, vdist};
    };
    std::vector<double> dists;
    for (long n = 1; n <= 200 && n0 < 0; ++n)
      if (test_n(n).first) n0 = static_cast<int>(n);
    if (n0 > 0) {
      lambda_ok = true;
      for (long n = n0; n <= n0 + 10; ++n) {
        const auto [ok, dist] = test_n(n);
        lam.push_back({{"n", n}, {"ok", ok}, {"v_distance", dist}});
        if (!ok) lambda_ok = false;
        dists.push_back(dist);
      }
      // C0 approach rate toward {v = 0}: ratios bounded by (1+nu)/2.
      bool rate_ok = true;
      for (size_t i = 0; i + 1 < dists.size(); ++i)
        if (dists[i + 1] > dists[i] * ((1.0 + spec.nu) / 2.0 + 0.05))
          rate_ok = false;
      res.outputs["lambda_lemma_rate_ok"] = rate_ok;
    }
  }
  res.outputs["lambda_lemma"] = {{"n0", n0}, {"tested", lam}};
  res.certified = hetero_ok && spiral_transversal && lambda_ok;
  res.outputs["heteroclinic_ok"] = hetero_ok;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Lyapunov-orbit tangency sequence for c > 0 (Theorem-8 mechanism): the
// closed curve T2(sigma_u) against the S-preimages of the diagonal u = v.
// ---------------------------------------------------------------------------
inline ScanResult tangency_sequence_positive(const SystemSpec& spec,
                                             long n_lo, long n_hi,
                                             double c_hi_hint = 0.0) {
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "tangency_sequence_positive";
  res.digest = spec_digest(spec);
  const auto valid = validate_spec(spec);
  const double c_hi = c_hi_hint > 0.0 ? c_hi_hint : valid.c_max;
  res.inputs = {{"n_lo", n_lo},
                {"n_hi", n_hi},
                {"c_hi", c_hi},
                {"tolerances", detail::tolerances_json(spec)}};
  json seq = json::array();
  bool any = false, all_cert = true;
  for (long n = n_lo; n <= n_hi; ++n) {
    CrossingFunctional g;
    g.name = "u - u_n(v)";
    const SystemSpec* sp = &spec;
    g.value = [sp, n](const Vec2& p) {
      return p.x - diagonal_preimage(*sp, n, p.y);
    };
    g.grad = [sp, n](const Vec2& p) {
      return Vec2{1.0, -diagonal_preimage_jet(*sp, n, p.y).du};
    };
    g.hess = [sp, n](const Vec2& p) {
      const double d2 = diagonal_preimage_jet(*sp, n, p.y).d2u;
      return std::array<double, 4>{0.0, 0.0, 0.0, -d2};
    };
    auto builder = [&](double cc) {
      return circle_image(spec, cc, CircleImage::sigma_u_to_sigma).curve();
    };
    // Geometric scan for a bracket: the tangency is a zero of the signed
    // envelope (the largest or smallest critical value of g along the closed
    // curve), so track both envelopes; "nearest zero" would flip sign when
    // the curve's center crosses the graph, which is not a tangency.
    auto envelopes = [&](double cc) -> std::pair<double, double> {
      const auto cps = critical_points(builder(cc), g);
      if (cps.empty()) throw NoSignChange("tangency scan: no critical point");
      double mn = cps.front().value, mx = mn;
      for (const auto& cp : cps) {
        mn = std::min(mn, cp.value);
        mx = std::max(mx, cp.value);
      }
      return {mn, mx};
    };
    json e;
    e["n"] = n;
    try {
      double c_prev = c_hi;
      auto [mn_prev, mx_prev] = envelopes(c_prev);
      bool bracketed = false;
      for (int j = 1; j <= 200 && !bracketed; ++j) {
        const double cc = c_hi * std::pow(0.85, j);
        if (cc < 1e-12) break;
        const auto [mn, mx] = envelopes(cc);
        if ((mx > 0) != (mx_prev > 0) || (mn > 0) != (mn_prev > 0)) {
          const double eta_c = lyapunov_eta(spec, c_prev);
          const double tol_quad =
              spec.tol.tol_quad / std::sqrt(2.0 * eta_c);
          const TangencyRecord rec = find_tangency_in_parameter(
              [&](double s) { return builder(s); }, g, cc, c_prev, tol_quad,
              spec.tol.tol_root);
          e["c_n"] = rec.scan_value;
          e["certified"] = rec.certified;
          e["second_derivative"] = rec.second_derivative;
          e["first_derivative"] = rec.first_derivative;
          e["point"] = {rec.point.x, rec.point.y};
          any = true;
          if (!rec.certified) all_cert = false;
          bracketed = true;
        }
        c_prev = cc;
        mn_prev = mn;
        mx_prev = mx;
      }
      if (!bracketed) e["status"] = "NoSignChange";
    } catch (const std::exception& ex) {
      e["status"] = std::string("error: ") + ex.what();
    }
    seq.push_back(e);
  }
  res.outputs["sequence"] = seq;
  res.certified = any && all_cert;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Case-2 census for c > 0: the inner piece maps to a double spiral whose
// unwrapped phase diverges at both ends; census against the T2-preimage of
// {u = 0} (equivalently, crossings of the Pi^s image with u = 0).
// ---------------------------------------------------------------------------
inline ScanResult census_case2_positive(const SystemSpec& spec, double c) {
  if (spec.involution_case != InvolutionCase::Case2)
    throw CaseMismatch("census_case2_positive: case 2 only");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "census_case2";
  res.digest = spec_digest(spec);
  res.inputs = {{"c", c}, {"tolerances", detail::tolerances_json(spec)}};
  if (!(c > 0.0)) {
    // Every point of the segment fails the case-2 transit predicate:
    // a_c(eta) >= 0 throughout, so the census is empty by DomainExit.
    const SpiralTrace tr =
        unstable_trace_spiral(spec, c, -spec.eps, spec.eps);
    res.outputs["count"] = 0;
    res.outputs["empty_by_domain_exit"] = tr.empty();
    res.certified = tr.empty();
    res.wall_time_ms = sw.ms();
    return res;
  }
  const double eta_c = lyapunov_eta(spec, c);
  const auto cut = detail::segment_circle_cut(spec, c, eta_c);
  const double lo = cut.first + spec.tau_floor;
  const double hi = cut.second - spec.tau_floor;
  if (!(hi > lo)) throw DomainError("case-2 inner piece is empty");
  const SpiralTrace tr = unstable_trace_spiral(spec, c, lo, hi);
  if (tr.empty()) throw DomainError("case-2 transit domain empty");
  const auto recs = find_crossings(*tr.curve, functional_u_equals(0.0),
                                   spec.tol.tol_root, spec.tol.tol_transversal);
  bool all_trans = true;
  json jr = json::array();
  for (const auto& r : recs) {
    if (!r.transversal) all_trans = false;
    jr.push_back(detail::record_to_json(r));
  }
  // Phase divergence at both ends: shrink the horizon guard by 1e4 and
  // measure the extra unwrapped phase.
  const double guard2 = spec.tau_floor * 1e-4;
  const double extra_lo = std::abs(
      spiral_phase_change(spec, c, cut.first + guard2, cut.first + spec.tau_floor));
  const double extra_hi = std::abs(
      spiral_phase_change(spec, c, cut.second - spec.tau_floor, cut.second - guard2));
  res.outputs["count"] = recs.size();
  res.outputs["records"] = jr;
  res.outputs["all_transversal"] = all_trans;
  res.outputs["phase_span"] =
      std::abs(spiral_phase_change(spec, c, tr.tau_lo, tr.tau_hi));
  res.outputs["extra_phase_lo_on_horizon_x1e4"] = extra_lo;
  res.outputs["extra_phase_hi_on_horizon_x1e4"] = extra_hi;
  res.certified = all_trans && extra_lo >= 4.0 * M_PI && extra_hi >= 4.0 * M_PI;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Saddle-center homoclinic loop parameters mu_n (Theorem-10 mechanism) with
// the non-rotation genericity certificate.
// ---------------------------------------------------------------------------
inline ScanResult loop_parameters(const SystemSpec& spec, long n_lo,
                                  long n_hi) {
  const GlobalJet& j = spec.gmap_jet;
  const double a_slope = j.fam_a_slope0();
  if (a_slope == 0.0)
    throw GenericityFailure("loop_parameters: fam_a'(0) = 0");
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "loop_parameters";
  res.digest = spec_digest(spec);
  res.inputs = {{"n_lo", n_lo},
                {"n_hi", n_hi},
                {"tolerances", detail::tolerances_json(spec)}};

  // Loop equation: a(mu)/(v_+ + b(mu)) = f^{2n}(a(mu) (v_+ + b(mu))),
  // solved on the side where a(mu) > 0.
  auto residual = [&](double mu, long n) {
    const double a = j.fam_a_of(mu);
    const double vb = spec.r + j.fam_b_of(mu);
    return a / vb - spec.eval_f_pow(a * vb, 2 * n);
  };
  // Cap |mu| so that zeta = a (v_+ + b) stays in the validated range.
  double mu_cap = 1.0;
  const double side = a_slope > 0.0 ? 1.0 : -1.0;
  for (int g = 0; g < 200; ++g) {
    const double a = j.fam_a_of(side * mu_cap);
    const double vb = spec.r + j.fam_b_of(side * mu_cap);
    if (a > 0.0 && vb > 0.0 && std::abs(a * vb) <= spec.zeta_max()) break;
    mu_cap *= 0.5;
  }
  json seq = json::array();
  bool any = false, all_ok = true;
  for (long n = n_lo; n <= n_hi; ++n) {
    json e;
    e["n"] = n;
    // Bracket on a geometric grid from mu_cap downward.
    double hi = side * mu_cap;
    double f_hi = residual(hi, n);
    double lo = hi, f_lo = f_hi;
    bool bracket = false;
    for (int g = 1; g <= 400; ++g) {
      lo = side * mu_cap * std::pow(0.7, g);
      f_lo = residual(lo, n);
      if ((f_lo > 0) != (f_hi > 0)) {
        bracket = true;
        break;
      }
      hi = lo;
      f_hi = f_lo;
    }
    if (!bracket) {
      e["status"] = "NoBracket";
      all_ok = false;
      seq.push_back(e);
      continue;
    }
    const double lo_ = std::min(lo, hi), hi_ = std::max(lo, hi);
    const double flo_ = lo_ == lo ? f_lo : f_hi;
    const double fhi_ = lo_ == lo ? f_hi : f_lo;
    const double mu_n = detail::refine_root(
        [&](double m) { return residual(m, n); }, lo_, hi_, flo_, fhi_, 0.0);
    const double resid = residual(mu_n, n);
    const double asym = mu_n * a_slope /
                        (std::pow(spec.nu, 2.0 * static_cast<double>(n)) *
                         spec.r);
    // Non-rotation certificate of the composed linearization T1 S^n T2.
    const double vn_m = std::pow(spec.nu, -static_cast<double>(n));
    const double vn_p = std::pow(spec.nu, static_cast<double>(n));
    const double A = vn_m * j.alpha * j.gamma - vn_p * j.beta * j.delta_m;
    const double B = vn_m * j.alpha * j.alpha - vn_p * j.beta * j.beta;
    const double C = vn_m * j.gamma * j.gamma - vn_p * j.delta_m * j.delta_m;
    const double non_rot = 2.0 - 2.0 * A * A - B * B - C * C;
    e["mu_n"] = mu_n;
    e["residual"] = resid;
    e["asymptotic_ratio"] = asym;
    e["A"] = A;
    e["B"] = B;
    e["C"] = C;
    e["non_rotation_lhs"] = non_rot;
    e["non_rotation_certified"] = non_rot < 0.0;
    seq.push_back(e);
    any = true;
    if (!(non_rot < 0.0) || std::abs(resid) > 1e-12) all_ok = false;
  }
  res.outputs["sequence"] = seq;
  res.outputs["a_slope"] = a_slope;
  res.certified = any && all_ok;
  res.wall_time_ms = sw.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Elliptic-point search: fixed points of F = G_c o S^k seeded on strip
// centerlines over a c-grid, classified by the Jacobian trace.
// ---------------------------------------------------------------------------

struct EllipticRecord {
  double c = 0.0;
  long k = 0;
  double u = 0.0, v = 0.0;
  double trace = 0.0;
  double det = 0.0;
  std::string classification;  // elliptic | saddle | parabolic-undecided
};

namespace detail {

struct ReturnMapEval {
  SigmaPoint image;
  Mat2 jacobian;
};

// F = (T2 o T(c) o T1) o S^k with the analytic Jacobian chain.
inline ReturnMapEval return_map(const SystemSpec& spec, double c, long k,
                                const SigmaPoint& p) {
  double Jk[4];
  const SigmaPoint q = s_apply_n(spec, p, k);
  s_apply_n_jacobian(spec, p, k, Jk);
  const DiskPoint d1 = t1_apply(spec, c, q);
  const DiskPoint d2 = transit_map(spec, c, d1);
  const Mat2 jt = transit_jacobian(spec, c, d1);
  const SigmaPoint out = t2_apply(spec, c, d2);
  const Mat2 m1 = t1_linear(spec);
  const Mat2 m2 = t2_linear(spec);
  ReturnMapEval r;
  r.image = out;
  r.jacobian = m2.mul(jt).mul(m1).mul(Mat2{Jk[0], Jk[1], Jk[2], Jk[3]});
  return r;
}

}  // namespace detail

inline std::vector<EllipticRecord> elliptic_search(
    const SystemSpec& spec, double c_lo, double c_hi, long k_lo, long k_hi,
    int c_grid = 400, json* diagnostics = nullptr) {
  std::vector<EllipticRecord> out;
  int newton_failures = 0;
  for (int i = 0; i <= c_grid; ++i) {
    const double c = c_lo + (c_hi - c_lo) * i / c_grid;
    for (long k = k_lo; k <= k_hi; ++k) {
      for (int sv = -1; sv <= 1; ++sv) {
        SigmaPoint p;
        try {
          const double v0 = spec.r + 0.5 * sv * spec.eps;
          p = {strip_centerline(spec, k, v0), v0};
        } catch (const std::exception&) {
          continue;
        }
        bool converged = false;
        Mat2 jac;
        for (int it = 0; it < 40; ++it) {
          detail::ReturnMapEval ev;
          try {
            ev = detail::return_map(spec, c, k, p);
          } catch (const std::exception&) {
            break;
          }
          const Vec2 g{ev.image.u - p.u, ev.image.v - p.v};
          jac = ev.jacobian;
          if (g.norm() <= 1e-13 * spec.r) {
            converged = true;
            break;
          }
          // Solve (J - I) dp = -g.
          const Mat2 m{jac.a11 - 1.0, jac.a12, jac.a21, jac.a22 - 1.0};
          if (std::abs(m.det()) < 1e-14) break;
          const Vec2 dp = m.inverse().apply(-g);
          p.u += dp.x;
          p.v += dp.y;
          if (std::abs(p.u) > spec.r + spec.eps ||
              std::abs(p.v - spec.r) > 2.0 * spec.eps)
            break;
        }
        if (!converged) {
          ++newton_failures;
          continue;
        }
        EllipticRecord rec;
        rec.c = c;
        rec.k = k;
        rec.u = p.u;
        rec.v = p.v;
        rec.trace = jac.trace();
        rec.det = jac.det();
        if (std::abs(rec.trace) < 2.0 - spec.tol.tol_parab)
          rec.classification = "elliptic";
        else if (std::abs(rec.trace) > 2.0 + spec.tol.tol_parab)
          rec.classification = "saddle";
        else
          rec.classification = "parabolic-undecided";
        // Deduplicate fixed points found from different seeds.
        bool dup = false;
        for (const auto& o : out)
          if (o.c == rec.c && o.k == rec.k &&
              std::abs(o.u - rec.u) < 1e-9 && std::abs(o.v - rec.v) < 1e-9)
            dup = true;
        if (!dup) out.push_back(rec);
      }
    }
  }
  if (diagnostics) (*diagnostics)["newton_failures"] = newton_failures;
  return out;
}

inline ScanResult elliptic_scan(const SystemSpec& spec, double c_lo,
                                double c_hi, long k_lo, long k_hi,
                                int c_grid = 400) {
  detail::Stopwatch sw;
  ScanResult res;
  res.scenario = "elliptic_search";
  res.digest = spec_digest(spec);
  res.inputs = {{"c_lo", c_lo},     {"c_hi", c_hi}, {"k_lo", k_lo},
                {"k_hi", k_hi},     {"c_grid", c_grid},
                {"tolerances", detail::tolerances_json(spec)}};
  json diag;
  const auto recs = elliptic_search(spec, c_lo, c_hi, k_lo, k_hi, c_grid, &diag);
  json jr = json::array();
  bool det_ok = true;
  size_t elliptic_count = 0;
  for (const auto& r : recs) {
    jr.push_back({{"c", r.c},
                  {"k", r.k},
                  {"u", r.u},
                  {"v", r.v},
                  {"trace", r.trace},
                  {"det", r.det},
                  {"class", r.classification}});
    if (std::abs(r.det - 1.0) > 1e-6) det_ok = false;
    if (r.classification == "elliptic") ++elliptic_count;
  }
  // Elliptic persistence intervals per k: maximal runs of consecutive grid
  // values carrying an elliptic record.
  json intervals = json::array();
  for (long k = k_lo; k <= k_hi; ++k) {
    std::vector<double> cs;
    for (const auto& r : recs)
      if (r.k == k && r.classification == "elliptic") cs.push_back(r.c);
    std::sort(cs.begin(), cs.end());
    const double step = (c_hi - c_lo) / c_grid;
    size_t i = 0;
    while (i < cs.size()) {
      size_t jdx = i;
      while (jdx + 1 < cs.size() && cs[jdx + 1] - cs[jdx] <= 1.5 * step) ++jdx;
      intervals.push_back(
          {{"k", k}, {"c_lo", cs[i]}, {"c_hi", cs[jdx]},
           {"width", cs[jdx] - cs[i]}});
      i = jdx + 1;
    }
  }
  res.outputs["records"] = jr;
  res.outputs["elliptic_count"] = elliptic_count;
  res.outputs["det_ok"] = det_ok;
  res.outputs["elliptic_intervals"] = intervals;
  res.outputs["diagnostics"] = diag;
  res.certified = det_ok;
  res.wall_time_ms = sw.ms();
  return res;
}

}  // namespace hetlab
