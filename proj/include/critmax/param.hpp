#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critmax/rays.hpp"

namespace critmax {

enum class ComponentKind { HInfinity, HZero, Capture, Undecided };

struct ComponentClass {
  ComponentKind kind;
  double potential = 0.0;           // G^inf_a(f_a(-a)) for HInfinity
  std::optional<cplx> phi;          // Phi_0 or Phi_U value where defined
  int depth = 0;                    // capture depth for Capture
  int budget = 0;                   // for Undecided
};

/// Angular data of the sector images: Delta_d (image of S cap H_inf under
/// Phi_inf) and Lambda_d (image of S cap H_0 under Phi_0), in turns.
struct SectorConstants {
  int d;
  double delta_lo, delta_hi;    // Delta_d = {arg in [lo, hi] turns}
  double lambda_lo, lambda_hi;  // Lambda_d likewise
  double s_hi;                  // S = {0 <= arg a <= s_hi turns}
};
SectorConstants sector_constants(int d);

/// Phi_inf(a) = phi^inf_a(f_a(-a)); requires a in H_infinity.
cplx phi_infinity_param(const FamilyContext& ctx);

/// Phi_0(a) = phi^0_a(f_a(-a)); requires a in H_0 minus R^-; Phi_0(0) = 0.
cplx phi_zero_param(const FamilyContext& ctx);

/// Phi_U(a) = phi^0_a(f_a^n(f_a(-a))) for a in a depth-n capture component.
cplx phi_capture_param(const FamilyContext& ctx, int depth);

/// Compose orbit classification and capture time; attaches the Phi value.
ComponentClass classify_parameter(int d, cplx a, int budget = 10000);

/// log Phi at the given locus, generic over the scalar for Newton in a.
template <class T>
T log_phi_infinity_param(int d, const T& a) {
  return log_phi_inf(d, a, family_critical_value(d, a));
}
template <class T>
T log_phi_zero_param(int d, const T& a) {
  return log_phi_zero(d, a, family_critical_value(d, a));
}
template <class T>
T log_phi_capture_param(int d, const T& a, int depth) {
  T w = family_critical_value(d, a);
  for (int i = 0; i < depth; ++i) w = family_eval(d, a, w);
  return log_phi_zero(d, a, w);
}

enum class Locus { Zero, Infinity, Capture };

struct ParamRaySample {
  double s;
  cplx a;
};

struct ParamRayTrace {
  Locus locus;
  Angle angle;
  int sector;        // branch index of the asymptotic seed (s(S) label)
  double seed_arg;   // argument of the seed direction, radians
  std::vector<ParamRaySample> samples;
  RayStatus status;
  cplx terminal;
  double min_potential;
  std::string note;
};

/// Trace the parameter ray UR_p(t): Newton-continue Phi(a) = e^{+-s + 2 pi i t}
/// along the halving grid from an asymptotic seed. sector selects among the
/// finitely many seed branches (default: closest to R^+). For Locus::Capture,
/// capture_seed must identify the component (any interior parameter) and
/// capture_depth its depth.
ParamRayTrace trace_param_ray(int d, Locus locus, const Angle& t, double s_min, int sector = -1,
                              cplx capture_seed = {0.0, 0.0}, int capture_depth = 0);

struct ParamLanding {
  cplx a;
  double tail_diameter;
  ParamRayTrace trace;
};

/// Trace to small potential and report the tail limit.
ParamLanding land_param_ray(int d, Locus locus, const Angle& t, int sector = -1,
                            double s_min = 1e-7);

/// Wake membership by the winding side test: true iff a lies in the component
/// of the complement of R_inf(zeta) u R_inf(zeta') u {landing} that does not
/// contain H_0 (represented by a = 0). Boundary points report false.
bool wake_membership(int d, cplx a, const Angle& zeta, const Angle& zeta_prime, int sector = -1,
                     int sector_prime = -1);

/// Exact angles of the dynamical rays that hit the critical point when a sits
/// on a parameter ray of angle t (two for Infinity, one for Zero).
std::vector<Angle> critical_ray_angles(int d, const Angle& t, Locus locus);

}  // namespace critmax
