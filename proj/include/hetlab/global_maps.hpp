#pragma once

// Affine symplectic global maps T1(c): Pi^u -> D1(c) and T2(c): D2(c) -> Pi^s,
// the involution on both charts, and the one-parameter mu-family.  T2 is
// computed as L o T1^{-1} o L, so the reversibility identity holds exactly.
// The higher-order terms of the paper's expansions are truncated: both maps
// are exactly affine, which keeps symplecticity exact as well.

#include <cmath>

#include "hetlab/errors.hpp"
#include "hetlab/geometry.hpp"
#include "hetlab/model_core.hpp"
#include "hetlab/saddle_center.hpp"
#include "hetlab/saddle_map.hpp"

namespace hetlab {

inline SigmaPoint involution_sigma(const SigmaPoint& p) { return {p.v, p.u}; }
inline DiskPoint involution_disk(const DiskPoint& q) { return {-q.x2, q.y2}; }

// Derived T2 offsets a1(c) = gamma a - alpha b, b1(c) = -delta a + beta b.
struct DerivedOffsets {
  double a1 = 0.0;
  double b1 = 0.0;
};

inline DerivedOffsets derived_offsets(const GlobalJet& j, double c) {
  const double a = j.a_of_c(c), b = j.b_of_c(c);
  return {j.gamma * a - j.alpha * b, -j.delta_m * a + j.beta * b};
}

// T1(c): x2 = a(c) + alpha (u - r) + beta v, y2 = b(c) + gamma (u - r) + delta v.
inline DiskPoint t1_apply(const SystemSpec& spec, double c,
                          const SigmaPoint& p) {
  const GlobalJet& j = spec.gmap_jet;
  const double du = p.u - spec.r;
  return {j.a_of_c(c) + j.alpha * du + j.beta * p.v,
          j.b_of_c(c) + j.gamma * du + j.delta_m * p.v};
}

inline SigmaPoint t1_inverse(const SystemSpec& spec, double c,
                             const DiskPoint& q) {
  const GlobalJet& j = spec.gmap_jet;
  const double x = q.x2 - j.a_of_c(c), y = q.y2 - j.b_of_c(c);
  // inverse of [[alpha, beta],[gamma, delta]], determinant 1
  return {spec.r + j.delta_m * x - j.beta * y, -j.gamma * x + j.alpha * y};
}

// T2(c) = L_sigma o T1(c)^{-1} o L_disk; lands at
// (a1 + gamma x + alpha y, v_+ + b1 - delta x - beta y).
inline SigmaPoint t2_apply(const SystemSpec& spec, double c,
                           const DiskPoint& q) {
  const SigmaPoint s = t1_inverse(spec, c, involution_disk(q));
  return involution_sigma(s);
}

inline DiskPoint t2_inverse(const SystemSpec& spec, double c,
                            const SigmaPoint& p) {
  return involution_disk(t1_apply(spec, c, involution_sigma(p)));
}

inline Mat2 t1_linear(const SystemSpec& spec) {
  const GlobalJet& j = spec.gmap_jet;
  return {j.alpha, j.beta, j.gamma, j.delta_m};
}

inline Mat2 t2_linear(const SystemSpec& spec) {
  const GlobalJet& j = spec.gmap_jet;
  return {j.gamma, j.alpha, -j.delta_m, -j.beta};
}

// Box predicates for the Pi neighborhoods.
inline bool in_pi_u(const SystemSpec& spec, const SigmaPoint& p) {
  return std::abs(p.v) <= spec.delta_nb * (1.0 + 1e-12) &&
         std::abs(p.u - spec.r) <= spec.eps * (1.0 + 1e-12);
}
inline bool in_pi_s(const SystemSpec& spec, const SigmaPoint& p) {
  return std::abs(p.u) <= spec.delta_nb * (1.0 + 1e-12) &&
         std::abs(p.v - spec.r) <= spec.eps * (1.0 + 1e-12);
}

// --- mu-family (perturbed connection) ---
// The family is anchored at T2(mu): u1 = a(mu) + gamma x + alpha y,
// v1 - v_+ = b(mu) - delta x - beta y; T1(mu) is derived through the
// involution so the reversible structure survives the perturbation.

inline SigmaPoint family_t2(const SystemSpec& spec, double mu,
                            const DiskPoint& q) {
  const GlobalJet& j = spec.gmap_jet;
  const double a = j.fam_a_of(mu), b = j.fam_b_of(mu);
  return {a + j.gamma * q.x2 + j.alpha * q.y2,
          spec.r + b - j.delta_m * q.x2 - j.beta * q.y2};
}

inline DiskPoint family_t2_inverse(const SystemSpec& spec, double mu,
                                   const SigmaPoint& p) {
  const GlobalJet& j = spec.gmap_jet;
  const double du = p.u - j.fam_a_of(mu);
  const double dv = p.v - spec.r - j.fam_b_of(mu);
  // inverse of [[gamma, alpha], [-delta, -beta]], determinant 1
  return {-j.beta * du - j.alpha * dv, j.delta_m * du + j.gamma * dv};
}

inline DiskPoint family_t1(const SystemSpec& spec, double mu,
                           const SigmaPoint& p) {
  return involution_disk(family_t2_inverse(spec, mu, involution_sigma(p)));
}

// The family's saddle map: the multiplier function is held at its mu = 0
// value (nu(mu) = nu), so this is s_apply for all mu.
inline SigmaPoint family_s(const SystemSpec& spec, double /*mu*/,
                           const SigmaPoint& p) {
  return s_apply(spec, p);
}

}  // namespace hetlab
