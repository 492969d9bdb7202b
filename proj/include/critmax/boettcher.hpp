#pragma once

#include <optional>
#include <vector>

#include "critmax/family.hpp"

namespace critmax {

enum class Pole { Zero, Infinity };

inline int multiplier_base(const FamilyContext& ctx, Pole p) {
  return p == Pole::Infinity ? ctx.d : ctx.d - 1;
}

struct PotentialValue {
  double value;  // Green value; 0 when the orbit test never fired
  double tol;    // magnitude of the last correction term
};

/// Green function G^p_a. Infinity: lim log|f^n(z)|/d^n. Zero: the harmonic
/// function with G^0(z) = -log|lambda z| + o(1) near 0 and
/// (d-1) G^0(z) = G^0(f(z)). Returns 0 when the orbit test does not fire
/// within the budget.
PotentialValue green(const FamilyContext& ctx, Pole pole, cplx z, int budget = 10000);

/// Radius beyond which every factor F_a = 1 + da/((d-1)z) satisfies
/// |F_a - 1| <= 1/8; the infinite product is branch-safe there.
double tame_radius_inf(int d, double abs_a);

/// log phi^infinity by the product formula: Log z + sum Log F(f^k z)/d^{k+1},
/// principal determination per factor. Caller guarantees the orbit escapes.
template <class T>
T log_phi_inf(int d, const T& a, T z, int budget = 4096) {
  T c = family_coefficient(d, a);
  double tame = tame_radius_inf(d, mag(a));
  T acc = log(z);
  double scale = 1.0 / d;
  int k = 0;
  while (mag(z) < tame) {
    T f1 = 1.0 + c / z;
    if (mag(f1) == 0.0) throw precondition_error("orbit passes through the cocritical point");
    acc = acc + log(f1) * scale;
    scale /= d;
    z = family_eval(d, a, z);
    if (++k > budget) throw precondition_error("orbit did not reach the escape region");
  }
  for (int j = 0; j < 64; ++j) {
    if (mag(z) > 1e150) break;
    T f1 = 1.0 + c / z;
    acc = acc + log(f1) * scale;
    if (mag(f1 - 1.0) < 1e-15) break;
    scale /= d;
    z = family_eval(d, a, z);
  }
  return acc;
}

/// log phi^0(z) = log phi_g(lambda z) where g(w) = w^{d-1} + lambda^{1-d} w^d.
/// phi^0 is tangent to z -> lambda(a) z at 0 and satisfies
/// phi^0(f(z)) = phi^0(z)^{d-1}. Caller guarantees z is in the basin of 0.
template <class T>
T log_phi_zero(int d, const T& a, const T& z, int budget = 65536) {
  T lam = family_lambda(d, a);
  T lam1d = 1.0 / ipow(lam, d - 1);  // lambda^{1-d}
  T w = lam * z;
  T acc = log(w);
  double scale = 1.0 / (d - 1);
  int k = 0;
  while (mag(lam1d) * mag(w) > 0.125) {
    T g1 = 1.0 + lam1d * w;
    if (mag(g1) == 0.0) throw precondition_error("orbit passes through the cocritical point");
    acc = acc + log(g1) * scale;
    scale /= (d - 1);
    w = ipow(w, d - 1) * g1;
    if (++k > budget) throw precondition_error("orbit did not reach the tame region near 0");
  }
  for (int j = 0; j < 64; ++j) {
    if (mag(w) == 0.0) throw precondition_error("orbit hits 0 exactly");
    T g1 = 1.0 + lam1d * w;
    acc = acc + log(g1) * scale;
    if (mag(g1 - 1.0) < 1e-15) break;
    scale /= (d - 1);
    w = ipow(w, d - 1) * g1;
  }
  return acc;
}

/// Boettcher coordinate at the given pole. Infinity: tangent to the identity
/// at infinity, |phi| > 1. Zero: tangent to z -> lambda(a) z, 0 < |phi| < 1.
/// Throws precondition_error when z is outside the valid domain (the measured
/// potential gap is attached).
cplx boettcher_coordinate(const FamilyContext& ctx, Pole pole, cplx z);

/// Newton inversion of boettcher_coordinate from the given seed.
cplx boettcher_inverse(const FamilyContext& ctx, Pole pole, cplx w, cplx seed);

/// Decides z in B_a (the immediate basin of 0) by backward path lifting.
/// Exact when -a is not itself in B_a; throws undecidable_error when a lift
/// passes within delta_crash of the critical point.
bool in_immediate_basin(const FamilyContext& ctx, cplx z, int budget = 10000);

/// Least n >= 0 with f^n(f(-a)) in B_a, i.e. the depth of the capture
/// component containing a (0 means a in H_0). Absent when the critical orbit
/// does not converge to 0.
std::optional<int> capture_time(const FamilyContext& ctx, int budget = 10000);

inline double delta_crash(const FamilyContext& ctx) { return 1e-8 * (1.0 + std::abs(ctx.a)); }

/// Lift a path backward through one application of f_a by Newton continuation:
/// returns the lifted path starting at x_start (f(x_start) ~ path.front()).
/// Steps are subdivided adaptively; grazing the critical point throws.
std::vector<cplx> lift_path_once(const FamilyContext& ctx, const std::vector<cplx>& path,
                                 cplx x_start);

}  // namespace critmax
