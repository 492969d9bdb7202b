#pragma once

#include <complex>
#include <optional>

#include "critmax/cdual.hpp"
#include "critmax/errors.hpp"

namespace critmax {

/// Coefficient of the family member: f(z) = z^{d-1} (z + c) with c = d a/(d-1).
template <class T>
T family_coefficient(int d, const T& a) {
  return a * (double(d) / double(d - 1));
}

/// f_a(z) = z^{d-1}(z + d a/(d-1)). Overflow saturates to IEEE infinities.
template <class T>
T family_eval(int d, const T& a, const T& z) {
  return ipow(z, d - 1) * (z + family_coefficient(d, a));
}

/// f_a'(z) = d z^{d-2}(z + a).
template <class T>
T family_deriv(int d, const T& a, const T& z) {
  return double(d) * ipow(z, d - 2) * (z + a);
}

/// df_a/da at fixed z: z^{d-1} d/(d-1).
template <class T>
T family_deriv_a(int d, const T& z) {
  return ipow(z, d - 1) * (double(d) / double(d - 1));
}

/// Critical value f_a(-a) = -(-a)^d/(d-1).
template <class T>
T family_critical_value(int d, const T& a) {
  return -ipow(-a, d) / double(d - 1);
}

/// Cocritical point -d a/(d-1), the non-zero preimage of 0.
template <class T>
T family_cocritical(int d, const T& a) {
  return -family_coefficient(d, a);
}

inline bool on_negative_real_axis(cplx a) { return a.imag() == 0.0 && a.real() < 0.0; }

/// Principal (d-2)-th root of d a/(d-1); maps R^+ into R^+. For d = 3 this is
/// d a/(d-1) itself. Undefined on R^- (branch cut of the principal log).
template <class T>
T family_lambda(int d, const T& a) {
  T c = family_coefficient(d, a);
  if (d == 3) return c;
  return exp(log(c) / double(d - 2));
}

/// Family member with derived constants. All members are plain values; the
/// struct is freely copyable and every operation on it is pure.
struct FamilyContext {
  int d;
  cplx a;
  cplx tau;        // e^{2 pi i/(d-1)}
  cplx lambda;     // principal (d-2)-th root of d a/(d-1); NaN when undefined
  bool lambda_defined;
  double r_escape;  // |z| >= r_escape implies |f(z)| >= 2|z|
  double r_zero;    // |z| <= r_zero implies |f(z)| <= |z|/2

  cplx eval(cplx z) const { return family_eval(d, a, z); }
  cplx deriv(cplx z) const { return family_deriv(d, a, z); }
  cplx critical_value() const { return family_critical_value(d, a); }
  cplx critical_point() const { return -a; }
  cplx cocritical() const { return family_cocritical(d, a); }
};

FamilyContext make_context(int d, cplx a);

enum class OrbitKind { EscapedToInfinity, ConvergedToZero, Undecided };

struct OrbitOutcome {
  OrbitKind kind;
  int step;       // first index at which the deciding test fired
  cplx witness;   // the iterate at that index
  int budget;
};

/// Iterate z and report the first index whose escape or zero-contraction test
/// fires; Undecided when the budget runs out first.
OrbitOutcome classify_orbit(const FamilyContext& ctx, cplx z, int budget);

inline cplx apply_sigma(cplx x) { return std::conj(x); }
cplx apply_tau_power(const FamilyContext& ctx, int k, cplx x);

}  // namespace critmax
