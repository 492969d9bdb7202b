#include "critmax/boettcher.hpp"

#include <cmath>
#include <limits>

namespace critmax {

double tame_radius_inf(int d, double abs_a) {
  return std::max(2.0, 8.0 * d * abs_a / (d - 1));
}

namespace {

PotentialValue green_inf(const FamilyContext& ctx, cplx z, int budget) {
  int n = 0;
  while (std::abs(z) <= ctx.r_escape) {
    if (n++ >= budget) return {0.0, 0.0};
    z = ctx.eval(z);
    if (!std::isfinite(std::abs(z))) break;
  }
  // G(z) = (log|z_n| + sum_j log|F(z_{n+j})|/d^{j+1}) / d^n
  double c = std::abs(family_coefficient(ctx.d, ctx.a));
  double acc = std::log(std::abs(z));
  double scale = 1.0 / ctx.d;
  double last = 0.0;
  for (int j = 0; j < 64; ++j) {
    double r = std::abs(z);
    if (!std::isfinite(r) || r > 1e150) break;
    cplx f1 = 1.0 + family_coefficient(ctx.d, ctx.a) / z;
    last = std::abs(std::log(std::abs(f1))) * scale;
    acc += std::log(std::abs(f1)) * scale;
    if (c / r < 1e-17) break;
    scale /= ctx.d;
    z = ctx.eval(z);
  }
  double dn = std::pow(double(ctx.d), double(n));
  return {acc / dn, last / dn};
}

PotentialValue green_zero(const FamilyContext& ctx, cplx z, int budget) {
  if (!ctx.lambda_defined)
    throw precondition_error("G^0 undefined for a on the negative real axis");
  if (ctx.a == cplx(0.0, 0.0))
    throw precondition_error("G^0 degenerate at a = 0 (lambda vanishes)");
  if (z == cplx(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  // March until the normalized iterate is tiny, tracking the depth.
  double lam1d = 1.0 / std::abs(ipow(ctx.lambda, ctx.d - 2));  // |lambda^{2-d}|
  int n = 0;
  {
    cplx probe = z;
    OrbitOutcome oc = classify_orbit(ctx, probe, budget);
    if (oc.kind != OrbitKind::ConvergedToZero) return {0.0, 0.0};
  }
  while (lam1d * std::abs(z) > 1e-13) {
    z = ctx.eval(z);
    if (z == cplx(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
    if (++n > budget) return {0.0, 0.0};
  }
  cplx lam_1d = 1.0 / ipow(ctx.lambda, ctx.d - 1);
  cplx w = ctx.lambda * z;
  double acc = -std::log(std::abs(w));
  double scale = 1.0 / (ctx.d - 1);
  double last = 0.0;
  for (int j = 0; j < 64; ++j) {
    cplx g1 = 1.0 + lam_1d * w;
    last = std::abs(std::log(std::abs(g1))) * scale;
    acc -= std::log(std::abs(g1)) * scale;
    if (std::abs(g1 - 1.0) < 1e-16) break;
    scale /= (ctx.d - 1);
    w = ipow(w, ctx.d - 1) * g1;
    if (std::abs(w) == 0.0) break;
  }
  double mn = std::pow(double(ctx.d - 1), double(n));
  return {acc / mn, last / mn};
}

}  // namespace

PotentialValue green(const FamilyContext& ctx, Pole pole, cplx z, int budget) {
  return pole == Pole::Infinity ? green_inf(ctx, z, budget) : green_zero(ctx, z, budget);
}

cplx boettcher_coordinate(const FamilyContext& ctx, Pole pole, cplx z) {
  if (pole == Pole::Infinity) {
    double g = green(ctx, Pole::Infinity, z).value;
    if (g <= 0.0) throw precondition_error("point does not escape", g);
    double gc = green(ctx, Pole::Infinity, -ctx.a).value;
    if (g <= gc)
      throw precondition_error("point below the critical equipotential", gc - g);
    return std::exp(log_phi_inf(ctx.d, ctx.a, z));
  }
  if (!ctx.lambda_defined)
    throw precondition_error("phi^0 undefined for a on the negative real axis");
  if (ctx.a == cplx(0.0, 0.0))
    throw precondition_error("phi^0 degenerate at a = 0 (lambda vanishes)");
  OrbitOutcome oc = classify_orbit(ctx, z, 10000);
  if (oc.kind != OrbitKind::ConvergedToZero)
    throw precondition_error("point not certified in the basin of 0");
  // The critical point obstructs univalence only when it lies in B_a itself.
  OrbitOutcome occ = classify_orbit(ctx, -ctx.a, 10000);
  if (occ.kind == OrbitKind::ConvergedToZero) {
    std::optional<int> cap = capture_time(ctx);
    if (cap && *cap == 0) {
      double g = green(ctx, Pole::Zero, z).value;
      double gc = green(ctx, Pole::Zero, -ctx.a).value;
      if (g <= gc)
        throw precondition_error("point outside the univalent disk around 0", gc - g);
    }
  }
  return std::exp(log_phi_zero(ctx.d, cplx(ctx.a), z));
}

cplx boettcher_inverse(const FamilyContext& ctx, Pole pole, cplx w, cplx seed) {
  double aw = std::abs(w);
  if (pole == Pole::Infinity && aw <= 1.0)
    throw precondition_error("|w| must exceed 1 for the infinity coordinate");
  if (pole == Pole::Zero && (aw == 0.0 || aw >= 1.0))
    throw precondition_error("w must lie in the punctured unit disk for the zero coordinate");
  cplx target = std::log(w);
  cplx z = seed;
  cplx best = seed;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 64; ++it) {
    cdual zd = cdual::variable(z);
    cdual lp;
    try {
      lp = pole == Pole::Infinity ? log_phi_inf(ctx.d, cdual(ctx.a), zd)
                                  : log_phi_zero(ctx.d, cdual(ctx.a), zd);
    } catch (const precondition_error&) {
      // Wandered out of the valid domain; retreat halfway toward the best point.
      z = 0.5 * (z + best);
      continue;
    }
    cplx r = lp.v - target;
    r = cplx(r.real(), std::remainder(r.imag(), 2.0 * M_PI));
    double res = std::abs(std::exp(lp.v) - w);
    if (res < best_res) {
      best_res = res;
      best = z;
    }
    if (res <= 1e-10 * aw) return z;
    cplx step = r / lp.d;
    double zs = std::abs(z);
    if (!std::isfinite(std::abs(step)) || std::abs(step) > 0.5 * (zs + 1.0))
      step *= 0.5 * (zs + 1.0) / std::abs(step);
    z -= step;
  }
  throw newton_error("boettcher_inverse: no convergence in 64 steps", best, best_res);
}

namespace {

// Newton solve f(x) = t from the given seed, with damping. Throws
// newton_error carrying the best iterate on failure.
cplx solve_preimage(const FamilyContext& ctx, cplx t, cplx seed, double tol) {
  cplx x = seed;
  cplx best = seed;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    cplx r = ctx.eval(x) - t;
    double res = std::abs(r);
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    // Accept at the requested tolerance or at the rounding floor of the
    // polynomial evaluation, whichever is larger.
    double ax = std::abs(x);
    double floor_err = 16.0 * std::numeric_limits<double>::epsilon() *
                       std::pow(ax, ctx.d - 1) *
                       (ax + std::abs(family_coefficient(ctx.d, ctx.a)));
    if (res <= std::max(tol, floor_err)) return x;
    cplx dp = ctx.deriv(x);
    if (std::abs(dp) == 0.0) {
      // Sitting exactly on a critical point: nudge off it.
      x += 1e-9 * (1.0 + std::abs(x));
      continue;
    }
    cplx step = r / dp;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + ax)) return x;
    // Damp oversized steps.
    double cap = 0.5 * (1.0 + ax);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    x -= step;
  }
  throw newton_error("preimage solve stalled", best, best_res);
}

}  // namespace

std::vector<cplx> lift_path_once(const FamilyContext& ctx, const std::vector<cplx>& path,
                                 cplx x_start) {
  if (path.size() < 2) return {x_start};
  double dc = delta_crash(ctx);
  std::vector<cplx> out;
  out.reserve(path.size());
  out.push_back(x_start);
  cplx x = x_start;
  for (size_t k = 1; k < path.size(); ++k) {
    // Adaptive subdivision between path[k-1] and path[k].
    cplx from = path[k - 1], to = path[k];
    double lo = 0.0;
    int guard = 0;
    while (lo < 1.0) {
      double hi = 1.0;
      cplx cand;
      while (true) {
        cplx target = from + (to - from) * hi;
        double scale = 1e-13 * (1.0 + std::abs(target));
        bool solved = true;
        try {
          cand = solve_preimage(ctx, target, x, scale);
        } catch (const newton_error& e) {
          if (std::abs(e.best - (-ctx.a)) < 100.0 * dc)
            throw undecidable_error("path lift grazes the critical point");
          solved = false;
        }
        if (solved) {
          double dprev = std::abs(cand - x);
          double local = std::abs(ctx.deriv(x));
          double expected = std::abs((to - from) * (hi - lo)) / std::max(local, 1e-12);
          if (dprev <= std::max(10.0 * expected, 1e-9 * (1.0 + std::abs(x)))) break;
        }
        hi = lo + 0.5 * (hi - lo);
        if (++guard > 64) throw undecidable_error("path lift: subdivision limit reached");
      }
      if (std::abs(cand - (-ctx.a)) < dc)
        throw undecidable_error("path lift passes within delta_crash of the critical point");
      x = cand;
      lo = hi;
    }
    out.push_back(x);
  }
  return out;
}

namespace {

// Endpoint classification for basin lifts: 0, the cocritical point, or other.
enum class LiftEnd { Zero, NonZero };

LiftEnd classify_endpoint(const FamilyContext& ctx, cplx e) {
  double scale = std::max(ctx.r_zero, 1e-6 * (1.0 + std::abs(ctx.a)));
  return std::abs(e) < 0.25 * scale ? LiftEnd::Zero : LiftEnd::NonZero;
}

// Lift the straight segment [f^n(z), 0] back n times along the orbit of z.
// Returns true iff every stage ends at 0 (so z connects to 0 inside the
// basin). First non-zero endpoint decides false.
bool lift_decides_immediate(const FamilyContext& ctx, const std::vector<cplx>& orbit_prefix,
                            cplx w_end) {
  const int segment_samples = 33;
  std::vector<cplx> path;
  path.reserve(segment_samples);
  for (int i = 0; i < segment_samples; ++i)
    path.push_back(w_end * (1.0 - double(i) / (segment_samples - 1)));
  int n = int(orbit_prefix.size()) - 1;  // orbit_prefix = z, f(z), ..., f^n(z)
  for (int j = n; j >= 1; --j) {
    path = lift_path_once(ctx, path, orbit_prefix[j - 1]);
    if (classify_endpoint(ctx, path.back()) == LiftEnd::NonZero) return false;
    path.back() = cplx(0.0, 0.0);  // snap the certified endpoint
  }
  return true;
}

}  // namespace

bool in_immediate_basin(const FamilyContext& ctx, cplx z, int budget) {
  OrbitOutcome oc = classify_orbit(ctx, z, budget);
  if (oc.kind != OrbitKind::ConvergedToZero) return false;
  if (oc.step == 0) return true;  // already inside the contraction disk
  std::vector<cplx> orbit;
  orbit.reserve(oc.step + 1);
  cplx cur = z;
  for (int i = 0; i <= oc.step; ++i) {
    orbit.push_back(cur);
    cur = ctx.eval(cur);
  }
  return lift_decides_immediate(ctx, orbit, orbit.back());
}

namespace {

// Basin test for the critical point itself: the first backward lift starts at
// -a where f' vanishes, so both local branches are tried.
bool critical_point_in_immediate_basin(const FamilyContext& ctx, int budget) {
  cplx ca = -ctx.a;
  OrbitOutcome oc = classify_orbit(ctx, ca, budget);
  if (oc.kind != OrbitKind::ConvergedToZero) return false;
  if (oc.step == 0) return true;
  std::vector<cplx> orbit;
  cplx cur = ca;
  for (int i = 0; i <= oc.step; ++i) {
    orbit.push_back(cur);
    cur = ctx.eval(cur);
  }
  cplx w_end = orbit.back();
  const int segment_samples = 33;
  std::vector<cplx> base;
  for (int i = 0; i < segment_samples; ++i)
    base.push_back(w_end * (1.0 - double(i) / (segment_samples - 1)));
  // f''(-a) = d (-a)^{d-2}
  cplx fpp = double(ctx.d) * ipow(-ctx.a, ctx.d - 2);
  if (std::abs(fpp) == 0.0) return true;  // a = 0: basin is a disk around 0
  std::vector<cplx> level = base;
  int n = oc.step;
  // Lift levels n..2 normally (path at level j starts at f^{j-1}(-a)).
  // The last lift (level 1 -> 0) starts at the critical point: branch split.
  for (int j = n; j >= 2; --j) {
    level = lift_path_once(ctx, level, orbit[j - 1]);
    if (std::abs(level.back()) > 0.25 * std::max(ctx.r_zero, 1e-6)) return false;
    level.back() = cplx(0.0, 0.0);
  }
  cplx fca = orbit[1];  // f(-a)
  for (int sgn = 0; sgn < 2; ++sgn) {
    // Local branch seed: -a +/- sqrt(2 (level[1] - f(-a))/f'').
    cplx rad = std::sqrt(2.0 * (level[1] - fca) / fpp);
    cplx seed = -ctx.a + (sgn == 0 ? rad : -rad);
    try {
      std::vector<cplx> tail(level.begin() + 1, level.end());
      std::vector<cplx> lifted = lift_path_once(ctx, tail, seed);
      if (std::abs(lifted.back()) < 0.25 * std::max(ctx.r_zero, 1e-6)) return true;
    } catch (const error&) {
      // try the other branch
    }
  }
  return false;
}

}  // namespace

std::optional<int> capture_time(const FamilyContext& ctx, int budget) {
  OrbitOutcome oc = classify_orbit(ctx, -ctx.a, budget);
  if (oc.kind != OrbitKind::ConvergedToZero) return std::nullopt;
  cplx w = ctx.critical_value();
  for (int n = 0; n <= budget; ++n) {
    if (in_immediate_basin(ctx, w, budget)) {
      if (n >= 1 && critical_point_in_immediate_basin(ctx, budget)) return 0;
      return n;
    }
    w = ctx.eval(w);
  }
  return std::nullopt;
}

}  // namespace critmax
