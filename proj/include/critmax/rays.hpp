#pragma once

#include <optional>
#include <vector>

#include "critmax/angle.hpp"
#include "critmax/boettcher.hpp"
#include "critmax/family.hpp"

namespace critmax {

struct RaySample {
  double s;  // potential
  cplx z;
};

enum class RayStatus { Landed, Crashed, Truncated };

struct RayTrace {
  Pole pole;
  std::optional<cplx> center;  // set for rays stemming from a capture center
  Angle angle;
  std::vector<RaySample> samples;  // strictly decreasing potentials
  RayStatus status;
  cplx terminal;         // landing point / crash point / deepest sample
  double min_potential;  // potential of the deepest valid sample
  std::string note;      // diagnostic for Truncated
};

/// Trace the ray R^p_a(t) at potentials s_max * 2^{-j} down to s_min by the
/// pullback scheme (reference targets on the image ray, Newton warm starts).
/// Rays attracted to the critical point or one of its iterated preimages stop
/// with status Crashed at the deepest valid potential.
RayTrace trace_ray(const FamilyContext& ctx, Pole pole, const Angle& t, double s_min,
                   double s_max = -1.0);

struct LandingRecord {
  cplx point;
  int preperiod;
  int period;
  cplx multiplier;  // (f^p)' along the landed cycle
  bool parabolic;   // |multiplier| within 1e-6 of 1
  RayTrace trace;
};

/// Trace to small potential and Newton-refine the landing point as a root of
/// f^{l+p}(z) = f^l(z), (l, p) the exact preperiod/period of t.
LandingRecord land_ray(const FamilyContext& ctx, Pole pole, const Angle& t,
                       double s_land = 1e-8);

/// Closed polyline of n points with |G^p - v| <= 1e-8 v, ordered by angle.
std::vector<cplx> equipotential(const FamilyContext& ctx, Pole pole, double v, int n_samples);

/// The unique angle eta, periodic under multiplication by d with denominator
/// dividing d^l - 1, whose external ray lands at the landing point of
/// R^0_a(theta0). theta0 must have exact period l under multiplication by d-1.
Angle match_external_angle(const FamilyContext& ctx, const Angle& theta0, int l);

/// Ray stemming from the center r of the component U_a of depth n (the unique
/// point of U_a with f^n(r) = 0), obtained by pulling R^0_a(t) back through
/// the homeomorphism f^n|_{U_a}. Sample potentials refer to the f^n-image.
RayTrace trace_center_ray(const FamilyContext& ctx, int depth, const Angle& t, double s_min);

/// Point at exact potential/angle obtained by the ladder scheme. seeds, when
/// given, are the forward images of a nearby already-solved point; the chain
/// of the solved point is written back for reuse. Internal building block,
/// exposed for the puzzle and parameter modules.
cplx ray_point(const FamilyContext& ctx, Pole pole, double s, const Angle& t,
               const std::vector<cplx>* seeds, std::vector<cplx>* chain_out,
               double crash_potential = 0.0);

}  // namespace critmax
