#pragma once

#include "critmax/param.hpp"

namespace critmax {

struct LandingClass {
  bool parabolic;       // some transformed angle is strictly periodic
  int period;           // period of that angle under its multiplier
  Angle transformed;    // the angle used in the test (first branch)
  bool branch2_parabolic = false;  // infinity locus: the second candidate
  Angle transformed2;
};

/// Exact classification of the landing parameter of a rational parameter ray:
/// parabolic when the transformed angle is strictly periodic under
/// multiplication by d-1 (locus Zero) or d (locus Infinity), Misiurewicz
/// otherwise.
LandingClass classify_ray_landing(int d, const Angle& t, Locus locus);

struct ParameterSolution {
  cplx a;
  cplx z;            // the periodic (or eventually periodic) point
  int preperiod;     // l
  int period;        // p
  cplx multiplier;   // (f^p)' along the cycle
  double residual;
};

/// Newton solve of f_a^{l+p}(-a) = f_a^l(-a) with minimality verification.
ParameterSolution find_misiurewicz(int d, int l, int p, cplx seed);

/// Two-variable Newton on (f_a^p(z) - z, (f_a^p)'(z) - 1).
ParameterSolution find_parabolic(int d, int p, cplx seed_a, cplx seed_z);

/// Cusp of the satellite copy attached to H_0 at internal angle t: land the
/// parameter ray R_0(t), then refine with the parabolic solver.
ParameterSolution satellite_cusp(int d, const Angle& t, int sector = -1);

}  // namespace critmax
