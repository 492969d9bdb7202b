#include "critmax/special.hpp"

#include <cmath>
#include <limits>

#include "critmax/cdual.hpp"

namespace critmax {

LandingClass classify_ray_landing(int d, const Angle& t, Locus locus) {
  LandingClass out;
  if (locus == Locus::Zero) {
    Angle tr = t.preimage(d - 1, (d - 1) / 2);
    out.transformed = tr;
    out.parabolic = tr.strictly_periodic_under(d - 1);
    out.period = out.parabolic ? angle_orbit(tr, d - 1).period : angle_orbit(tr, d - 1).period;
    out.transformed2 = tr;
    return out;
  }
  if (locus != Locus::Infinity)
    throw precondition_error("landing classification: locus must be Zero or Infinity");
  Angle t0 = t.preimage(d, (d - 1) / 2);
  Angle t1 = t.preimage(d, (d + 1) / 2);
  out.transformed = t0;
  out.transformed2 = t1;
  bool p0 = t0.strictly_periodic_under(d);
  bool p1 = t1.strictly_periodic_under(d);
  out.parabolic = p0 || p1;
  out.branch2_parabolic = p1;
  out.period = angle_orbit(p1 && !p0 ? t1 : t0, d).period;
  return out;
}

namespace {

// Critical-value orbit with forward-mode derivative in a.
cdual critical_orbit_point(int d, cdual a, int n) {
  cdual z = family_critical_value(d, a);
  for (int i = 0; i < n; ++i) z = family_eval(d, a, z);
  return z;
}

// Exact numeric preperiod/period of the critical-value orbit at parameter a,
// detected by first-repeat with a relative tolerance.
bool minimal_orbit_type(int d, cplx a, int max_n, double tol, int& l_out, int& p_out) {
  std::vector<cplx> orbit;
  cplx z = family_critical_value(d, a);
  orbit.push_back(z);
  for (int i = 1; i <= max_n; ++i) {
    z = family_eval(d, a, z);
    for (size_t j = 0; j < orbit.size(); ++j) {
      if (std::abs(z - orbit[j]) <= tol * (1.0 + std::abs(z))) {
        l_out = int(j);
        p_out = i - int(j);
        return true;
      }
    }
    orbit.push_back(z);
  }
  return false;
}

}  // namespace

ParameterSolution find_misiurewicz(int d, int l, int p, cplx seed) {
  if (l < 1 || p < 1) throw precondition_error("need l >= 1 and p >= 1");
  cplx a = seed;
  cplx best = seed;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    cdual aa = cdual::variable(a);
    cdual zl = critical_orbit_point(d, aa, l - 1);
    cdual zlp = zl;
    for (int i = 0; i < p; ++i) zlp = family_eval(d, aa, zlp);
    cdual g = zlp - zl;
    double res = std::abs(g.v);
    if (res < best_res) {
      best_res = res;
      best = a;
    }
    double scale = 1.0 + std::abs(value_of(zl));
    if (std::abs(g.d) == 0.0) break;
    cplx step = g.v / g.d;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(a)) && res <= 1e-10 * scale) break;
    double cap = 0.25 * (1.0 + std::abs(a));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    a -= step;
  }
  a = best;
  // Residual acceptance.
  cplx zl = value_of(critical_orbit_point(d, cdual(a), l - 1));
  cplx zlp = zl;
  FamilyContext ctx = make_context(d, a);
  for (int i = 0; i < p; ++i) zlp = ctx.eval(zlp);
  double res = std::abs(zlp - zl);
  if (res > 1e-10 * (1.0 + std::abs(zl)))
    throw newton_error("misiurewicz solve did not converge", a, res);
  // Minimality: the exact preperiod/period of the critical value orbit.
  int l0 = 0, p0 = 0;
  if (!minimal_orbit_type(d, a, 4 * (l + p) + 64, 1e-8, l0, p0))
    throw newton_error("orbit type detection failed", a, res);
  // The solved equation uses the critical value as index 0, so l counts
  // iterates past it; the detector uses the same convention.
  if (l0 + 1 != l || p0 != p) {
    throw precondition_error("solution has smaller type (l=" + std::to_string(l0 + 1) +
                             ", p=" + std::to_string(p0) + ")");
  }
  ParameterSolution sol;
  sol.a = a;
  sol.z = zl;
  sol.preperiod = l;
  sol.period = p;
  cplx mult(1.0, 0.0);
  cplx cur = zl;
  for (int i = 0; i < p; ++i) {
    mult *= ctx.deriv(cur);
    cur = ctx.eval(cur);
  }
  sol.multiplier = mult;
  sol.residual = res;
  if (std::abs(mult) <= 1.0 + 1e-9)
    throw precondition_error("landed cycle is not repelling");
  return sol;
}

ParameterSolution find_parabolic(int d, int p, cplx seed_a, cplx seed_z) {
  if (p < 1) throw precondition_error("need p >= 1");
  if (seed_z == cplx(0.0, 0.0)) throw precondition_error("seed z must be nonzero");
  cplx a = seed_a, z = seed_z;
  double best_res = std::numeric_limits<double>::infinity();
  cplx best_a = a, best_z = z;
  for (int it = 0; it < 300; ++it) {
    // Forward pass with first-order jets in (a, z):
    // value v, va = dv/da, vz = dv/dz0, and the multiplier M with dM/da, dM/dz0.
    cplx v = z, va = 0.0, vz = 1.0;
    cplx M = 1.0, Ma = 0.0, Mz = 0.0;
    for (int i = 0; i < p; ++i) {
      cplx fp = family_deriv(d, a, v);                         // df/dz
      cplx fa = family_deriv_a(d, v);                          // df/da
      cplx fpp = double(d) * ipow(v, d - 3) *
                 (double(d - 1) * v + double(d - 2) * a);      // d2f/dz2
      cplx fpa = double(d) * ipow(v, d - 2);                   // d2f/(dz da)
      cplx Ma_new = Ma * fp + M * (fpp * va + fpa);
      cplx Mz_new = Mz * fp + M * fpp * vz;
      M *= fp;
      Ma = Ma_new;
      Mz = Mz_new;
      cplx v_new = family_eval(d, a, v);
      cplx va_new = fp * va + fa;
      cplx vz_new = fp * vz;
      v = v_new;
      va = va_new;
      vz = vz_new;
    }
    cplx r1 = v - z;
    cplx r2 = M - 1.0;
    double res = std::abs(r1) + std::abs(r2);
    if (res < best_res) {
      best_res = res;
      best_a = a;
      best_z = z;
    }
    // Jacobian [[dr1/da, dr1/dz], [dr2/da, dr2/dz]]
    cplx j11 = va, j12 = vz - 1.0;
    cplx j21 = Ma, j22 = Mz;
    cplx det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-18 * (std::abs(j11 * j22) + std::abs(j12 * j21) + 1e-30))
      throw newton_error("parabolic solve: singular Jacobian (degenerate parabolic)", a,
                         res);
    cplx da = (r1 * j22 - r2 * j12) / det;
    cplx dz = (j11 * r2 - j21 * r1) / det;
    double cap = 0.2 * (1.0 + std::abs(a) + std::abs(z));
    double norm = std::abs(da) + std::abs(dz);
    if (norm > cap) {
      da *= cap / norm;
      dz *= cap / norm;
    }
    a -= da;
    z -= dz;
    if (norm <= 1e-15 * (1.0 + std::abs(a) + std::abs(z))) break;
  }
  a = best_a;
  z = best_z;
  if (best_res > 1e-10 * (1.0 + std::abs(z)))
    throw newton_error("parabolic solve did not converge", a, best_res);
  ParameterSolution sol;
  sol.a = a;
  sol.z = z;
  sol.preperiod = 0;
  sol.period = p;
  FamilyContext ctx = make_context(d, a);
  cplx mult(1.0, 0.0);
  cplx cur = z;
  for (int i = 0; i < p; ++i) {
    mult *= ctx.deriv(cur);
    cur = ctx.eval(cur);
  }
  sol.multiplier = mult;
  sol.residual = best_res;
  return sol;
}

ParameterSolution satellite_cusp(int d, const Angle& t, int sector) {
  LandingClass lc = classify_ray_landing(d, t, Locus::Zero);
  if (!lc.parabolic)
    throw precondition_error("R_0(" + t.str() + ") lands at a Misiurewicz parameter");
  int k = lc.period;
  ParamLanding pl = land_param_ray(d, Locus::Zero, t, sector, 1e-7);
  cplx a_seed = pl.a;
  // Seed z: landing point of the transformed internal ray at the seed
  // parameter; fall back to the deepest trace point when refinement balks.
  cplx z_seed;
  try {
    FamilyContext ctx = make_context(d, a_seed);
    LandingRecord rec = land_ray(ctx, Pole::Zero, lc.transformed);
    z_seed = rec.point;
  } catch (const error&) {
    FamilyContext ctx = make_context(d, a_seed);
    RayTrace tr = trace_ray(ctx, Pole::Zero, lc.transformed, 1e-6);
    if (tr.samples.empty()) throw;
    z_seed = tr.samples.back().z;
  }
  return find_parabolic(d, k, a_seed, z_seed);
}

}  // namespace critmax
