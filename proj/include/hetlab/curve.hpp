#pragma once

// Sampled parametrized curves on cross-sections with analytic jets, crossing
// detection with transversality certificates, and quadratic-tangency
// continuation in a scan parameter.

#include <cmath>
#include <functional>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hetlab/errors.hpp"
#include "hetlab/geometry.hpp"

namespace hetlab {

enum class Chart { D1, D2, Sigma };

inline std::string to_string(Chart c) {
  switch (c) {
    case Chart::D1: return "D1";
    case Chart::D2: return "D2";
    default: return "Sigma";
  }
}

struct CurveJet {
  Vec2 p;   // point
  Vec2 d1;  // first derivative w.r.t. the curve parameter
  Vec2 d2;  // second derivative
};

class PlanarCurve {
 public:
  using Evaluator = std::function<CurveJet(double)>;

  PlanarCurve(double t_lo, double t_hi, Chart chart, Evaluator eval,
              double max_turn = 0.2)
      : t_lo_(t_lo), t_hi_(t_hi), chart_(chart), eval_(std::move(eval)),
        max_turn_(max_turn) {}

  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  Chart chart() const { return chart_; }
  CurveJet at(double t) const { return eval_(t); }

  // Adaptive parameter samples: the tangent direction turns at most
  // max_turn radians per step, so locally monotone crossing functionals
  // cannot skip a sign change between consecutive samples.  Built once and
  // cached; read-only afterwards.
  const std::vector<double>& samples(int initial = 64) const {
    if (samples_.empty()) build_samples(initial);
    return samples_;
  }

  // Seed the sampler with a caller-supplied grid (e.g. geometric in tau for
  // spirals) before refinement.
  void seed_samples(std::vector<double> grid) const { seed_ = std::move(grid); }

 private:
  void build_samples(int initial) const {
    std::vector<double> grid = seed_;
    if (grid.empty()) {
      grid.reserve(initial + 1);
      for (int i = 0; i <= initial; ++i)
        grid.push_back(t_lo_ + (t_hi_ - t_lo_) * i / initial);
    }
    std::vector<double> out;
    out.push_back(grid.front());
    for (size_t i = 0; i + 1 < grid.size(); ++i)
      refine(grid[i], grid[i + 1], eval_(grid[i]), eval_(grid[i + 1]), out, 0);
    samples_ = std::move(out);
  }

  void refine(double ta, double tb, const CurveJet& ja, const CurveJet& jb,
              std::vector<double>& out, int depth) const {
    const double cross = ja.d1.x * jb.d1.y - ja.d1.y * jb.d1.x;
    const double dot = ja.d1.dot(jb.d1);
    const double turn = std::abs(std::atan2(cross, dot));
    if (turn > max_turn_ && depth < 40) {
      const double tm = 0.5 * (ta + tb);
      const CurveJet jm = eval_(tm);
      refine(ta, tm, ja, jm, out, depth + 1);
      refine(tm, tb, jm, jb, out, depth + 1);
    } else {
      out.push_back(tb);
    }
  }

  double t_lo_, t_hi_;
  Chart chart_;
  Evaluator eval_;
  double max_turn_;
  mutable std::vector<double> samples_;
  mutable std::vector<double> seed_;
};

// Scalar functional on a chart with gradient, so crossing derivatives along a
// curve come out analytically: d/dt g(p(t)) = grad g . p'(t).
struct CrossingFunctional {
  std::string name;
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
  // Optional Hessian for non-affine functionals (row-major [gxx,gxy,gyx,gyy]).
  std::function<std::array<double, 4>(const Vec2&)> hess;

  double second_along(const CurveJet& j) const {
    double s = grad(j.p).dot(j.d2);
    if (hess) {
      const auto H = hess(j.p);
      s += H[0] * j.d1.x * j.d1.x + (H[1] + H[2]) * j.d1.x * j.d1.y +
           H[3] * j.d1.y * j.d1.y;
    }
    return s;
  }
};

inline CrossingFunctional functional_u_equals(double k) {
  return {"u=" + std::to_string(k),
          [k](const Vec2& p) { return p.x - k; },
          [](const Vec2&) { return Vec2{1.0, 0.0}; }};
}
inline CrossingFunctional functional_v_equals(double k) {
  return {"v=" + std::to_string(k),
          [k](const Vec2& p) { return p.y - k; },
          [](const Vec2&) { return Vec2{0.0, 1.0}; }};
}
inline CrossingFunctional functional_diagonal() {
  return {"u-v=0",
          [](const Vec2& p) { return p.x - p.y; },
          [](const Vec2&) { return Vec2{1.0, -1.0}; }};
}

struct IntersectionRecord {
  double t = 0.0;
  Vec2 point;
  double value = 0.0;       // residual of the functional at t
  double derivative = 0.0;  // d/dt of the functional at t
  bool transversal = false;
};

namespace detail {

inline double curve_functional(const PlanarCurve& curve,
                               const CrossingFunctional& g, double t) {
  return g.value(curve.at(t).p);
}

inline double curve_functional_d1(const PlanarCurve& curve,
                                  const CrossingFunctional& g, double t) {
  const CurveJet j = curve.at(t);
  return g.grad(j.p).dot(j.d1);
}

// Bracketed root refinement: secant with bisection safeguard.
inline double refine_root(const std::function<double(double)>& f, double lo,
                          double hi, double flo, double fhi, double tol) {
  for (int it = 0; it < 200; ++it) {
    double t = lo - flo * (hi - lo) / (fhi - flo);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    const double ft = f(t);
    if (std::abs(ft) <= tol || hi - lo <= 1e-16 * (std::abs(lo) + std::abs(hi)))
      return t;
    if ((ft > 0) == (flo > 0)) {
      lo = t;
      flo = ft;
    } else {
      hi = t;
      fhi = ft;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// All sign changes of the functional along the curve's sample chain, refined
// to tol_root * scale; each record carries the analytic crossing derivative
// and a transversality verdict.
inline std::vector<IntersectionRecord> find_crossings(
    const PlanarCurve& curve, const CrossingFunctional& g,
    double tol_root = 1e-12, double tol_transversal = 1e-6) {
  std::vector<IntersectionRecord> out;
  const auto& ts = curve.samples();
  if (ts.size() < 2) return out;
  auto f = [&](double t) { return detail::curve_functional(curve, g, t); };
  double scale = 0.0;
  std::vector<double> vals(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    vals[i] = f(ts[i]);
    scale = std::max(scale, std::abs(vals[i]));
  }
  const double tol = tol_root * std::max(scale, 1e-300);
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    if (vals[i] == 0.0 || (vals[i] > 0) == (vals[i + 1] > 0)) continue;
    const double t =
        detail::refine_root(f, ts[i], ts[i + 1], vals[i], vals[i + 1], tol);
    IntersectionRecord rec;
    rec.t = t;
    const CurveJet j = curve.at(t);
    rec.point = j.p;
    rec.value = f(t);
    rec.derivative = detail::curve_functional_d1(curve, g, t);
    // Transversality is a local angle condition: the crossing rate against
    // the product of the local curve speed and the gradient magnitude.
    const double local =
        std::max(j.d1.norm() * g.grad(j.p).norm(), 1e-300);
    rec.transversal = std::abs(rec.derivative) > tol_transversal * local;
    out.push_back(rec);
  }
  return out;
}

struct TangencyRecord {
  double scan_value = 0.0;  // c or mu at the tangency
  double t_star = 0.0;      // curve parameter of the tangency point
  Vec2 point;
  double functional_value = 0.0;   // should be ~0
  double first_derivative = 0.0;   // d/dt of the functional, ~0
  double second_derivative = 0.0;  // d^2/dt^2 of the functional
  // Graph-form curvature d^2 g / d(arclength-transverse)^2 normalized the way
  // the quadratic-tangency growth law is stated: second_derivative / |p'|^2.
  double graph_second_derivative = 0.0;
  bool certified = false;
};

// Extremal value of the functional along the curve: locates critical points
// of g(t) via sign changes of g'(t) and returns the critical value nearest
// zero together with its location and second derivative.
struct CurveExtremum {
  double t = 0.0;
  double value = 0.0;
  double second = 0.0;
};

inline std::vector<CurveExtremum> critical_points(
    const PlanarCurve& curve, const CrossingFunctional& g) {
  const auto& ts = curve.samples();
  auto fp = [&](double t) { return detail::curve_functional_d1(curve, g, t); };
  std::vector<CurveExtremum> out;
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    const double da = fp(ts[i]), db = fp(ts[i + 1]);
    double t;
    if (da == 0.0)
      t = ts[i];
    else if ((da > 0) == (db > 0))
      continue;
    else
      t = detail::refine_root(fp, ts[i], ts[i + 1], da, db, 0.0);
    CurveExtremum e;
    e.t = t;
    e.value = detail::curve_functional(curve, g, t);
    e.second = g.second_along(curve.at(t));
    out.push_back(e);
  }
  return out;
}

inline std::optional<CurveExtremum> extremum_nearest_zero(
    const PlanarCurve& curve, const CrossingFunctional& g) {
  std::optional<CurveExtremum> best;
  for (const CurveExtremum& e : critical_points(curve, g))
    if (!best || std::abs(e.value) < std::abs(best->value)) best = e;
  return best;
}

// Quadratic-tangency continuation: g(scan) = critical value of the
// functional along the scan-dependent curve; solve g = 0 by bracketed
// secant, then certify |g'(t)| ~ 0 and |g''(t)| >= tol_quad at the root.
inline TangencyRecord find_tangency_in_parameter(
    const std::function<PlanarCurve(double)>& curve_builder,
    const CrossingFunctional& g, double scan_lo, double scan_hi,
    double tol_quad, double tol_root = 1e-12) {
  auto crit_value = [&](double s) -> double {
    const PlanarCurve curve = curve_builder(s);
    const auto e = extremum_nearest_zero(curve, g);
    if (!e) throw NoSignChange("tangency scan: no critical point along curve");
    return e->value;
  };
  const double flo = crit_value(scan_lo), fhi = crit_value(scan_hi);
  double s_star;
  if (flo == 0.0) {
    s_star = scan_lo;
  } else if (fhi == 0.0) {
    s_star = scan_hi;
  } else if ((flo > 0) == (fhi > 0)) {
    throw NoSignChange("tangency scan: no sign change of the critical value");
  } else {
    s_star =
        detail::refine_root(crit_value, scan_lo, scan_hi, flo, fhi,
                            tol_root * std::max(std::abs(flo), std::abs(fhi)));
  }
  const PlanarCurve curve = curve_builder(s_star);
  const auto e = extremum_nearest_zero(curve, g);
  if (!e) throw NoSignChange("tangency scan: critical point lost at root");
  TangencyRecord rec;
  rec.scan_value = s_star;
  rec.t_star = e->t;
  const CurveJet j = curve.at(e->t);
  rec.point = j.p;
  rec.functional_value = e->value;
  rec.first_derivative = g.grad(j.p).dot(j.d1);
  rec.second_derivative = e->second;
  const double sp = j.d1.norm2();
  rec.graph_second_derivative = sp > 0.0 ? e->second / sp : 0.0;
  // The quadratic certificate is parametrization-free: judge the graph
  // curvature, not the raw parameter second derivative.
  rec.certified = std::abs(rec.graph_second_derivative) >= tol_quad &&
                  std::abs(rec.functional_value) <=
                      1e-8 * std::max(1.0, std::abs(rec.second_derivative));
  return rec;
}

}  // namespace hetlab
