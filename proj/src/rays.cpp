#include "critmax/rays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "critmax/cdual.hpp"

namespace critmax {

namespace {

// Signal thrown inside the ladder when a pullback is attracted to the
// critical point: level k means the chain point at potential m^k s hit -a.
struct crash_signal {
  int level;
  cplx point;
  double potential;
};

// Potential above which the direct tame Newton solve is branch-safe.
double tame_potential(const FamilyContext& ctx, Pole pole) {
  if (pole == Pole::Infinity) return std::log(4.0 * tame_radius_inf(ctx.d, std::abs(ctx.a)));
  double lam = std::abs(ctx.lambda);
  // |w| <= |lambda|^{d-1}/8 with a factor-4 margin
  return std::log(32.0 / std::pow(lam, ctx.d - 1));
}

cplx target_log(Pole pole, double s, double theta) {
  double re = pole == Pole::Infinity ? s : -s;
  return {re, 2.0 * M_PI * theta};
}

// Tame-region Newton: solve log phi(z) = target (mod 2 pi i) from seed.
cplx newton_log_phi(const FamilyContext& ctx, Pole pole, cplx target, cplx seed) {
  cplx z = seed;
  cplx best = seed;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    cdual lp;
    try {
      lp = pole == Pole::Infinity ? log_phi_inf(ctx.d, cdual(ctx.a), cdual::variable(z))
                                  : log_phi_zero(ctx.d, cdual(ctx.a), cdual::variable(z));
    } catch (const precondition_error&) {
      z = 0.5 * (z + best);
      continue;
    }
    cplx r = lp.v - target;
    r = cplx(r.real(), std::remainder(r.imag(), 2.0 * M_PI));
    double res = std::abs(r);
    if (res < best_res) {
      best_res = res;
      best = z;
    }
    if (res < 1e-12) return z;
    cplx step = r / lp.d;
    double cap = 0.4 * (1.0 + std::abs(z));
    if (!std::isfinite(std::abs(step))) step = cplx(cap, 0.0);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    z -= step;
  }
  throw newton_error("tame-region Newton did not converge", best, best_res);
}

// Thrown when branch selection between preimages is ambiguous at the current
// potential step; the caller subdivides the step.
struct step_too_coarse {};

// All d roots of f_a(x) = y, i.e. x^d + c x^{d-1} - y = 0, by Durand-Kerner
// with a Newton polish.
std::vector<cplx> preimage_roots(const FamilyContext& ctx, cplx y) {
  int d = ctx.d;
  cplx c = family_coefficient(d, ctx.a);
  double bound = 1.0 + std::max(std::abs(c), std::abs(y));
  std::vector<cplx> r(d);
  for (int j = 0; j < d; ++j)
    r[j] = bound * std::exp(cplx(0.0, 2.0 * M_PI * (j + 0.37) / d));
  auto p = [&](cplx x) { return ipow(x, d - 1) * (x + c) - y; };
  for (int it = 0; it < 300; ++it) {
    double moved = 0.0;
    for (int j = 0; j < d; ++j) {
      cplx denom(1.0, 0.0);
      for (int k = 0; k < d; ++k)
        if (k != j) denom *= (r[j] - r[k]);
      if (std::abs(denom) == 0.0) {
        r[j] += 1e-8 * bound;
        continue;
      }
      cplx delta = p(r[j]) / denom;
      r[j] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-14 * bound) break;
  }
  for (int j = 0; j < d; ++j) {
    for (int it = 0; it < 4; ++it) {
      cplx dp = ctx.deriv(r[j]);
      if (std::abs(dp) == 0.0) break;
      r[j] -= (ctx.eval(r[j]) - y) / dp;
    }
  }
  return r;
}

// Boettcher angle of z in [0,1), valid above the critical equipotential.
double boettcher_angle(const FamilyContext& ctx, Pole pole, cplx z) {
  cplx lp = pole == Pole::Infinity ? log_phi_inf(ctx.d, cplx(ctx.a), z)
                                   : log_phi_zero(ctx.d, cplx(ctx.a), z);
  double t = lp.imag() / (2.0 * M_PI);
  t -= std::floor(t);
  return t;
}

double circular_dist(double x, double y) {
  double d = std::fabs(x - y);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

// Select the preimage of y on the ray branch of exact angle `ang` at
// potential `pot`. Above the critical equipotential the Boettcher-angle
// oracle decides; below it the seed must be unambiguous.
cplx pullback(const FamilyContext& ctx, Pole pole, cplx y, const cplx* seed, double ang,
              double pot, double crit_potential) {
  std::vector<cplx> roots = preimage_roots(ctx, y);
  int m = multiplier_base(ctx, pole);
  if (seed) {
    // Proximity selection with a clear margin.
    int bestj = 0;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (size_t j = 0; j < roots.size(); ++j) {
      double dd = std::abs(roots[j] - *seed);
      if (dd < d1) {
        d2 = d1;
        d1 = dd;
        bestj = int(j);
      } else if (dd < d2) {
        d2 = dd;
      }
    }
    if (d1 <= 0.33 * d2) return roots[bestj];
  }
  bool oracle_ok = pot > crit_potential * (1.0 + 1e-9);
  if (oracle_ok) {
    int bestj = -1;
    double bestd = 1.0;
    for (size_t j = 0; j < roots.size(); ++j) {
      double rt;
      try {
        rt = boettcher_angle(ctx, pole, roots[j]);
      } catch (const error&) {
        continue;
      }
      double dd = circular_dist(rt, ang);
      if (dd < bestd) {
        bestd = dd;
        bestj = int(j);
      }
    }
    if (bestj >= 0 && bestd < 0.25 / m) return roots[bestj];
  }
  throw step_too_coarse{};
}

}  // namespace

namespace {

// Core ladder at exact angle t and potential s. seeds (when present) are the
// chain of a nearby solved point. Throws step_too_coarse when a pullback
// cannot be disambiguated and crash_signal on critical attraction.
cplx ray_point_core(const FamilyContext& ctx, Pole pole, double s, const Angle& t,
                    const std::vector<cplx>* seeds, std::vector<cplx>* chain_out,
                    double crash_potential, double crit_potential) {
  if (s <= 0.0) throw precondition_error("ray potential must be positive");
  int m = multiplier_base(ctx, pole);
  double s_tame = tame_potential(ctx, pole);
  int levels = 0;
  double top = s;
  while (top < s_tame) {
    top *= m;
    if (++levels > 4000) throw precondition_error("potential too small for the ladder");
  }
  std::vector<Angle> level_angle(levels + 1);
  level_angle[0] = t;
  for (int i = 1; i <= levels; ++i) level_angle[i] = level_angle[i - 1].times(m);
  const Angle& t_top = level_angle[levels];
  cplx seed_top = (seeds && int(seeds->size()) > levels)
                      ? (*seeds)[levels]
                      : (pole == Pole::Infinity
                             ? std::exp(cplx(top, 2.0 * M_PI * t_top.to_double()))
                             : std::exp(cplx(-top, 2.0 * M_PI * t_top.to_double())) / ctx.lambda);
  cplx y = newton_log_phi(ctx, pole, target_log(pole, top, t_top.to_double()), seed_top);
  std::vector<cplx> chain(levels + 1);
  chain[levels] = y;
  double proximity = 0.05 * (1.0 + std::abs(ctx.a));
  for (int k = levels - 1; k >= 0; --k) {
    const cplx* seed = (seeds && int(seeds->size()) > k) ? &(*seeds)[k] : nullptr;
    double pot_k = s * std::pow(double(m), k);
    cplx x = pullback(ctx, pole, y, seed, level_angle[k].to_double(), pot_k, crit_potential);
    if (crash_potential > 0.0 && std::abs(x + ctx.a) < proximity)
      throw crash_signal{k, x, pot_k};
    chain[k] = x;
    y = x;
  }
  if (chain_out) *chain_out = std::move(chain);
  return y;
}

// Advance from a solved chain at potential s_prev to potential s_new at the
// same angle, bisecting the potential step when branch selection is
// ambiguous.
cplx advance_point(const FamilyContext& ctx, Pole pole, const Angle& t, double s_prev,
                   std::vector<cplx>& chain_io, double s_new, double crash_potential,
                   double crit_potential, int depth = 0) {
  std::vector<cplx> next;
  try {
    cplx z = ray_point_core(ctx, pole, s_new, t, chain_io.empty() ? nullptr : &chain_io, &next,
                            crash_potential, crit_potential);
    chain_io = std::move(next);
    return z;
  } catch (const step_too_coarse&) {
    if (depth >= 14)
      throw newton_error("ray continuation: branch ambiguity persists", cplx(0.0, 0.0), 0.0);
    double s_mid = std::sqrt(std::max(s_prev, s_new) * std::min(s_prev, s_new));
    advance_point(ctx, pole, t, s_prev, chain_io, s_mid, crash_potential, crit_potential,
                  depth + 1);
    return advance_point(ctx, pole, t, s_mid, chain_io, s_new, crash_potential, crit_potential,
                         depth + 1);
  }
}

double critical_potential(const FamilyContext& ctx, Pole pole) {
  try {
    double g = green(ctx, pole, -ctx.a).value;
    return std::isfinite(g) ? g : 0.0;
  } catch (const precondition_error&) {
    return 0.0;
  }
}

}  // namespace

cplx ray_point(const FamilyContext& ctx, Pole pole, double s, const Angle& t,
               const std::vector<cplx>* seeds, std::vector<cplx>* chain_out,
               double crash_potential) {
  double s_tame = tame_potential(ctx, pole);
  double crit = critical_potential(ctx, pole);
  if (seeds && !seeds->empty()) {
    std::vector<cplx> chain = *seeds;
    // The seed chain's base potential is unknown here; treat the step as one
    // halving for subdivision purposes.
    cplx z = advance_point(ctx, pole, t, 2.0 * s, chain, s, crash_potential, crit);
    if (chain_out) *chain_out = std::move(chain);
    return z;
  }
  // No warm start: walk the halving grid down from the tame region so every
  // pullback level inherits a same-angle seed.
  int halvings = 0;
  while (s * std::pow(2.0, halvings) < s_tame) ++halvings;
  std::vector<cplx> chain;
  cplx z(0.0, 0.0);
  double s_prev = 0.0;
  for (int j = halvings; j >= 0; --j) {
    double sj = s * std::pow(2.0, j);
    z = advance_point(ctx, pole, t, s_prev > 0.0 ? s_prev : 2.0 * sj, chain, sj, crash_potential,
                      crit);
    s_prev = sj;
  }
  if (chain_out) *chain_out = std::move(chain);
  return z;
}

namespace {

// Refine a suspected crash: approach the critical potential from above and
// watch the chain point at the crash level converge to -a.
bool refine_crash(const FamilyContext& ctx, Pole pole, const Angle& t, int level, double g_crit,
                  double s_good, const std::vector<cplx>& good_chain, cplx& crash_point_out,
                  double& crash_potential_out) {
  int m = multiplier_base(ctx, pole);
  double s_star = g_crit / std::pow(double(m), level);
  if (!(s_star > 0.0) || s_star > s_good) return false;
  std::vector<cplx> seeds = good_chain;
  cplx level_pt(0.0, 0.0);
  cplx level0_pt(0.0, 0.0);
  bool have = false;
  for (int i = 1; i <= 40; ++i) {
    double s_ref = s_star + (s_good - s_star) * std::pow(0.5, i);
    std::vector<cplx> chain;
    try {
      level0_pt = ray_point(ctx, pole, s_ref, t, &seeds, &chain, 0.0);
    } catch (const error&) {
      break;
    }
    if (int(chain.size()) <= level) break;
    level_pt = chain[level];
    seeds = std::move(chain);
    have = true;
    crash_potential_out = s_ref;
    if (std::abs(level_pt + ctx.a) < 1e-6 * (1.0 + std::abs(ctx.a))) break;
  }
  if (!have) return false;
  if (std::abs(level_pt + ctx.a) > 1e-4 * (1.0 + std::abs(ctx.a))) return false;
  crash_point_out = level == 0 ? level_pt : level0_pt;
  return true;
}

}  // namespace

RayTrace trace_ray(const FamilyContext& ctx, Pole pole, const Angle& t, double s_min,
                   double s_max) {
  if (s_min <= 0.0) throw precondition_error("s_min must be positive");
  if (pole == Pole::Zero) {
    if (!ctx.lambda_defined)
      throw precondition_error("internal rays undefined for a on the negative real axis");
    if (ctx.a == cplx(0.0, 0.0))
      throw precondition_error("internal rays degenerate at a = 0");
  }
  double g_crit = 0.0;
  try {
    g_crit = green(ctx, pole, -ctx.a).value;
  } catch (const precondition_error&) {
    g_crit = 0.0;
  }
  if (!std::isfinite(g_crit)) g_crit = 0.0;
  if (s_max <= 0.0) s_max = 2.0 * std::max(1.0, g_crit);
  // Start the halving grid at a tame potential so the first sample is direct.
  double s_tame = tame_potential(ctx, pole);
  int pre = 0;
  while (s_max * std::pow(2.0, pre) < s_tame) ++pre;
  double s_start = s_max * std::pow(2.0, pre);

  RayTrace out;
  out.pole = pole;
  out.angle = t;
  out.status = RayStatus::Truncated;
  out.terminal = cplx(0.0, 0.0);
  out.min_potential = s_start;

  std::vector<cplx> chain;
  std::vector<cplx> prev_chain;
  double s = s_start;
  double eps_land = 1e-9 * (1.0 + std::abs(ctx.a));
  int false_alarms = 0;
  int m = multiplier_base(ctx, pole);
  std::vector<bool> probed;
  while (true) {
    // Proactive crash probe: when the potential at some chain level is about
    // to cross G^p(-a), approach the critical potential from above and watch
    // that level converge (or not) to the critical point.
    if (g_crit > 0.0 && !prev_chain.empty()) {
      double s_old = out.samples.empty() ? s_start : 2.0 * s;
      double lvl_new = s, lvl_old = s_old;
      for (int k = 0; k + 1 < int(prev_chain.size()); ++k) {
        if (int(probed.size()) <= k) probed.resize(k + 1, false);
        if (!probed[k] && lvl_new <= g_crit && g_crit <= lvl_old * (1.0 + 1e-12)) {
          probed[k] = true;
          cplx crash_pt;
          double crash_s = s;
          if (refine_crash(ctx, pole, t, k, g_crit, s_old, prev_chain, crash_pt, crash_s)) {
            out.status = RayStatus::Crashed;
            out.terminal = crash_pt;
            out.min_potential = crash_s;
            return out;
          }
        }
        lvl_new *= m;
        lvl_old *= m;
      }
    }
    cplx z;
    try {
      double detect = false_alarms < 5 ? g_crit : 0.0;
      z = ray_point(ctx, pole, s, t, prev_chain.empty() ? nullptr : &prev_chain, &chain, detect);
    } catch (const crash_signal& c) {
      cplx crash_pt = c.point;
      double crash_s = c.potential / std::pow(double(multiplier_base(ctx, pole)), c.level);
      double s_good = out.samples.empty() ? s_start : out.samples.back().s;
      if (!prev_chain.empty() &&
          refine_crash(ctx, pole, t, c.level, g_crit, s_good, prev_chain, crash_pt, crash_s)) {
        out.status = RayStatus::Crashed;
        out.terminal = crash_pt;
        out.min_potential = crash_s;
        return out;
      }
      // Proximity alarm that did not certify: redo the sample without
      // detection and keep tracing.
      ++false_alarms;
      try {
        z = ray_point(ctx, pole, s, t, prev_chain.empty() ? nullptr : &prev_chain, &chain, 0.0);
      } catch (const error& e) {
        out.status = RayStatus::Truncated;
        out.note = e.what();
        if (!out.samples.empty()) {
          out.terminal = out.samples.back().z;
          out.min_potential = out.samples.back().s;
        }
        return out;
      }
    } catch (const error& e) {
      out.status = RayStatus::Truncated;
      out.note = e.what();
      if (!out.samples.empty()) {
        out.terminal = out.samples.back().z;
        out.min_potential = out.samples.back().s;
      }
      return out;
    }
    if (s <= s_max * (1.0 + 1e-12)) out.samples.push_back({s, z});
    out.terminal = z;
    out.min_potential = s;
    prev_chain = chain;
    if (s <= s_min * (1.0 + 1e-12)) break;
    s = std::max(0.5 * s, s_min);
  }
  // Landing test: diameter of the last 10 samples.
  if (out.samples.size() >= 10) {
    double diam = 0.0;
    size_t n = out.samples.size();
    for (size_t i = n - 10; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        diam = std::max(diam, std::abs(out.samples[i].z - out.samples[j].z));
    if (diam <= eps_land) {
      out.status = RayStatus::Landed;
      out.terminal = out.samples.back().z;
      return out;
    }
  }
  out.status = RayStatus::Truncated;
  out.note = "reached s_min without landing certificate";
  return out;
}

LandingRecord land_ray(const FamilyContext& ctx, Pole pole, const Angle& t, double s_land) {
  int m = multiplier_base(ctx, pole);
  AngleOrbit orbit = angle_orbit(t, m);
  int l = orbit.preperiod, p = orbit.period;
  RayTrace trace = trace_ray(ctx, pole, t, s_land);
  if (trace.status == RayStatus::Crashed)
    throw precondition_error("ray crashes; no landing point");
  if (trace.samples.empty()) throw precondition_error("ray trace produced no samples");
  cplx z = trace.samples.back().z;
  // Newton on h(z) = f^{l+p}(z) - f^l(z). Run to step exhaustion so that
  // multiple roots (parabolic landings) are polished to machine precision.
  cplx best = z;
  double best_res = std::numeric_limits<double>::infinity();
  double last_scale = 1.0;
  for (int it = 0; it < 200; ++it) {
    cdual x = cdual::variable(z);
    cdual xl = x;
    for (int i = 0; i < l; ++i) xl = family_eval(ctx.d, cdual(ctx.a), xl);
    cdual xlp = xl;
    for (int i = 0; i < p; ++i) xlp = family_eval(ctx.d, cdual(ctx.a), xlp);
    cdual h = xlp - xl;
    double res = std::abs(h.v);
    last_scale = 1.0 + std::abs(value_of(xl));
    if (res < best_res) {
      best_res = res;
      best = z;
    }
    if (std::abs(h.d) == 0.0) break;
    cplx step = h.v / h.d;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    double cap = 0.2 * (1.0 + std::abs(z));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    z -= step;
  }
  z = best;
  if (best_res > 1e-10 * last_scale)
    throw newton_error("landing refinement unstable (rational structure mismatch)", best,
                       best_res);
  // Parabolic landings approach slowly; allow a generous but bounded gap.
  if (std::abs(z - trace.samples.back().z) > 0.25 * (1.0 + std::abs(ctx.a)))
    throw newton_error("refined landing point far from the traced tail", z, best_res);
  LandingRecord rec;
  rec.point = z;
  rec.preperiod = l;
  rec.period = p;
  cplx w = z;
  for (int i = 0; i < l; ++i) w = ctx.eval(w);
  cplx mult(1.0, 0.0);
  cplx cur = w;
  for (int i = 0; i < p; ++i) {
    mult *= ctx.deriv(cur);
    cur = ctx.eval(cur);
  }
  rec.multiplier = mult;
  rec.parabolic = std::abs(std::abs(mult) - 1.0) <= 1e-6;
  rec.trace = std::move(trace);
  return rec;
}

namespace {

// Level-curve continuation for potentials at or below the critical
// equipotential: returns the component of {G = v} through the first crossing
// of R^+ (seen from the pole), ordered along the traversal.
std::vector<cplx> equipotential_contour(const FamilyContext& ctx, Pole pole, double v,
                                        int n_samples) {
  auto g_of = [&](cplx z) { return green(ctx, pole, z, 20000).value; };
  // Bracket the first crossing of G = v along R^+ walking away from the pole.
  double r_lo, r_hi;
  if (pole == Pole::Zero) {
    r_lo = 1e-6;
    while (!(g_of({r_lo, 0.0}) > v)) {
      r_lo *= 0.5;
      if (r_lo < 1e-300) throw precondition_error("no basepoint on R^+ for the level");
    }
    r_hi = r_lo;
    while (g_of({r_hi, 0.0}) > v) {
      r_hi *= 2.0;
      if (r_hi > 1e6) throw precondition_error("level curve not bracketed on R^+");
    }
  } else {
    r_hi = std::max(10.0, 2.0 * ctx.r_escape);
    while (!(g_of({r_hi, 0.0}) > v)) r_hi *= 2.0;
    r_lo = r_hi;
    while (g_of({r_lo, 0.0}) > v) {
      r_lo *= 0.5;
      if (r_lo < 1e-12) throw precondition_error("level curve not bracketed on R^+");
    }
    std::swap(r_lo, r_hi);  // keep G(r_lo) > v
  }
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (r_lo + r_hi);
    (g_of({mid, 0.0}) > v ? r_lo : r_hi) = mid;
  }
  cplx start(0.5 * (r_lo + r_hi), 0.0);
  auto grad = [&](cplx z) {
    double h = 1e-6 * (1.0 + std::abs(z));
    double gx = (g_of(z + cplx(h, 0.0)) - g_of(z - cplx(h, 0.0))) / (2.0 * h);
    double gy = (g_of(z + cplx(0.0, h)) - g_of(z - cplx(0.0, h))) / (2.0 * h);
    return cplx(gx, gy);
  };
  auto correct = [&](cplx z, bool& ok) {
    ok = false;
    for (int i = 0; i < 30; ++i) {
      double gv = g_of(z);
      if (gv == 0.0) return z;  // fell off the domain
      if (std::abs(gv - v) <= 1e-9 * v) {
        ok = true;
        return z;
      }
      cplx g = grad(z);
      double n2 = std::norm(g);
      if (n2 < 1e-30) return z;
      z -= (gv - v) * g / n2;
    }
    return z;
  };
  std::vector<cplx> curve{start};
  double step = 0.02 * (1.0 + std::abs(start));
  double turned = 0.0;
  cplx z = start;
  int steps_guard = 0;
  while (true) {
    cplx g = grad(z);
    if (std::abs(g) < 1e-15) throw precondition_error("level-curve gradient degenerate");
    cplx tangent = cplx(0.0, -1.0) * g / std::abs(g);
    bool ok = false;
    cplx znew = correct(z + step * tangent, ok);
    if (!ok || std::abs(znew - z) > 3.0 * step) {
      step *= 0.5;
      if (step < 1e-12 * (1.0 + std::abs(z)))
        throw precondition_error("level-curve continuation stalled");
      continue;
    }
    cplx gn = grad(znew);
    turned += std::arg((cplx(0.0, -1.0) * gn / std::abs(gn)) / tangent);
    curve.push_back(znew);
    z = znew;
    step = std::min(step * 1.3, 0.02 * (1.0 + std::abs(z)));
    if (std::abs(turned) > 1.75 * M_PI && std::abs(z - start) < 2.0 * step) break;
    if (++steps_guard > 200000) throw precondition_error("level-curve continuation diverged");
  }
  // Resample uniformly by arc length.
  std::vector<double> acc{0.0};
  for (size_t i = 1; i < curve.size(); ++i)
    acc.push_back(acc.back() + std::abs(curve[i] - curve[i - 1]));
  double total = acc.back() + std::abs(curve.front() - curve.back());
  std::vector<cplx> out;
  out.reserve(n_samples);
  size_t j = 0;
  for (int k = 0; k < n_samples; ++k) {
    double target = total * k / n_samples;
    while (j + 1 < acc.size() && acc[j + 1] < target) ++j;
    if (j + 1 >= curve.size()) {
      out.push_back(curve.back());
      continue;
    }
    double seg = acc[j + 1] - acc[j];
    double f = seg > 0.0 ? (target - acc[j]) / seg : 0.0;
    bool ok = false;
    cplx p = correct(curve[j] + f * (curve[j + 1] - curve[j]), ok);
    out.push_back(ok ? p : curve[j]);
  }
  return out;
}

}  // namespace

std::vector<cplx> equipotential(const FamilyContext& ctx, Pole pole, double v, int n_samples) {
  if (v <= 0.0) throw precondition_error("equipotential level must be positive");
  if (n_samples < 3) throw precondition_error("need at least 3 samples");
  {
    double crit = critical_potential(ctx, pole);
    if (crit > 0.0 && v <= crit) return equipotential_contour(ctx, pole, v, n_samples);
  }
  // Bootstrap: walk one ray down to potential v to obtain a seed chain.
  const std::pair<long long, long long> boot[] = {{0, 1}, {1, 7}, {3, 11}, {5, 13}};
  std::vector<cplx> seeds;
  int boot_idx = -1;
  for (int b = 0; b < 4; ++b) {
    Angle t(boot[b].first, boot[b].second);
    try {
      RayTrace tr = trace_ray(ctx, pole, t, v, v);
      if (tr.samples.empty()) continue;
      ray_point(ctx, pole, v, t, nullptr, &seeds, 0.0);
      boot_idx = b;
      break;
    } catch (const error&) {
      continue;
    }
  }
  if (boot_idx < 0) throw precondition_error("equipotential bootstrap failed on all base angles");
  Angle t0(boot[boot_idx].first, boot[boot_idx].second);
  // Verified march: advance by adaptive exact-angle steps so the Newton
  // continuation never jumps to another preimage branch (the curve can have
  // narrow necks near precritical points).
  double r_curve = 0.0;
  {
    std::vector<cplx> prev = seeds;
    for (int k = 0; k < n_samples; k += std::max(1, n_samples / 16)) {
      std::vector<cplx> chain;
      cplx z = ray_point(ctx, pole, v, t0.plus(Angle(k, n_samples)), &prev, &chain, 0.0);
      prev = std::move(chain);
      r_curve = std::max(r_curve, std::abs(z));
    }
  }
  double gap_tol = 0.05 * r_curve + 1e-12;
  std::vector<std::pair<double, cplx>> pts;
  pts.reserve(n_samples);
  std::vector<cplx> chain = seeds;
  cplx cur = ray_point(ctx, pole, v, t0, &seeds, &chain, 0.0);
  pts.push_back({t0.to_double(), cur});
  for (int k = 1; k <= n_samples; ++k) {
    Angle pos = t0.plus(Angle(k - 1, n_samples));
    Angle remaining(1, n_samples);
    int depth = 0;
    while (remaining.num() != 0) {
      Angle step = remaining;
      for (int i = 0; i < depth; ++i) step = step.preimage(2, 0);
      Angle try_angle = pos.plus(step);
      std::vector<cplx> nchain;
      bool ok = false;
      cplx z;
      try {
        z = ray_point(ctx, pole, v, try_angle, &chain, &nchain, 0.0);
        ok = std::abs(z - cur) <= gap_tol;
      } catch (const error&) {
        ok = false;
      }
      if (ok || depth >= 16) {
        if (!ok)
          throw precondition_error("equipotential march cannot resolve a neck");
        pos = try_angle;
        remaining = remaining.minus(step);
        cur = z;
        chain = std::move(nchain);
        if (depth > 0) --depth;
      } else {
        ++depth;
      }
    }
    if (k < n_samples) pts.push_back({pos.to_double(), cur});
  }
  std::sort(pts.begin(), pts.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<cplx> out;
  out.reserve(n_samples);
  for (auto& pc : pts) out.push_back(pc.second);
  return out;
}

Angle match_external_angle(const FamilyContext& ctx, const Angle& theta0, int l) {
  AngleOrbit orbit = angle_orbit(theta0, ctx.d - 1);
  if (orbit.preperiod != 0 || orbit.period != l)
    throw precondition_error("theta0 must have exact period l under multiplication by d-1");
  LandingRecord internal = land_ray(ctx, Pole::Zero, theta0);
  if (std::abs(internal.multiplier) <= 1.0 + 1e-6)
    throw precondition_error("internal ray lands at a non-repelling point");
  cplx x = internal.point;
  bigint den = pow(bigint(ctx.d), l) - 1;
  if (den > (bigint(1) << 22))
    throw precondition_error("candidate set too large (period too high)");
  long long count = den.convert_to<long long>();
  std::vector<Angle> matches;
  for (long long j = 0; j < count; ++j) {
    Angle eta(bigint(j), den);
    cplx tail;
    try {
      RayTrace quick = trace_ray(ctx, Pole::Infinity, eta, 1e-4);
      if (quick.status == RayStatus::Crashed || quick.samples.empty()) continue;
      tail = quick.samples.back().z;
    } catch (const error&) {
      continue;
    }
    if (std::abs(tail - x) > 0.05 * (1.0 + std::abs(x))) continue;
    try {
      LandingRecord ext = land_ray(ctx, Pole::Infinity, eta);
      if (std::abs(ext.point - x) <= 1e-6 * (1.0 + std::abs(x))) matches.push_back(eta);
    } catch (const error&) {
      continue;
    }
  }
  if (matches.empty())
    throw precondition_error(
        "no external ray of the cycle lands at the point (graph inadmissible)");
  if (matches.size() > 1) throw precondition_error("external-angle match ambiguous");
  return matches.front();
}

RayTrace trace_center_ray(const FamilyContext& ctx, int depth, const Angle& t, double s_min) {
  if (depth < 1) throw precondition_error("capture depth must be >= 1");
  // Center r: Newton on f^depth(x) = 0 seeded at the critical value.
  cplx r = ctx.critical_value();
  for (int it = 0; it < 200; ++it) {
    cdual x = cdual::variable(r);
    for (int i = 0; i < depth; ++i) x = family_eval(ctx.d, cdual(ctx.a), x);
    if (std::abs(x.v) <= 1e-14 * (1.0 + std::abs(r))) break;
    if (std::abs(x.d) == 0.0)
      throw newton_error("center solve: singular derivative", r, std::abs(x.v));
    cplx step = x.v / x.d;
    double cap = 0.3 * (1.0 + std::abs(r));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    r -= step;
  }
  RayTrace base = trace_ray(ctx, Pole::Zero, t, s_min);
  auto fn = [&](cplx x, cplx& deriv) {
    cplx v = x, dv(1.0, 0.0);
    for (int i = 0; i < depth; ++i) {
      dv *= ctx.deriv(v);
      v = ctx.eval(v);
    }
    deriv = dv;
    return v;
  };
  cplx dr;
  fn(r, dr);
  if (std::abs(dr) == 0.0) throw precondition_error("f^n not invertible at the center");
  RayTrace out;
  out.pole = Pole::Zero;
  out.center = r;
  out.angle = t;
  out.status = base.status;
  out.terminal = r;
  out.min_potential = base.min_potential;
  out.note = base.note;
  // Newton solve f^depth(x) = target from a seed.
  auto solve_fn = [&](cplx target, cplx seed, bool& ok) {
    cplx lifted = seed;
    ok = false;
    for (int it = 0; it < 100; ++it) {
      cplx dv;
      cplx v = fn(lifted, dv);
      cplx res = v - target;
      if (std::abs(res) <= 1e-11 * (1.0 + std::abs(target))) {
        ok = true;
        break;
      }
      if (std::abs(dv) == 0.0) break;
      cplx step = res / dv;
      double cap = 0.2 * (1.0 + std::abs(lifted));
      if (std::abs(step) > cap) step *= cap / std::abs(step);
      lifted -= step;
    }
    return lifted;
  };
  cplx x = r;
  cplx prev_target(0.0, 0.0);
  bool first = true;
  for (const RaySample& smp : base.samples) {
    if (first) {
      bool ok = false;
      cplx lifted = solve_fn(smp.z, r + smp.z / dr, ok);
      if (!ok) throw newton_error("center-ray lift failed at the first sample", lifted, 0.0);
      x = lifted;
      first = false;
    } else {
      // Continuation with adaptive subdivision of the target segment.
      double lo = 0.0;
      int guard = 0;
      while (lo < 1.0) {
        double hi = 1.0;
        while (true) {
          cplx target = prev_target + (smp.z - prev_target) * hi;
          bool ok = false;
          cplx cand = solve_fn(target, x, ok);
          if (ok) {
            cplx dv;
            fn(x, dv);
            double expected =
                std::abs(smp.z - prev_target) * (hi - lo) / std::max(std::abs(dv), 1e-12);
            if (std::abs(cand - x) <= std::max(10.0 * expected, 1e-9 * (1.0 + std::abs(x)))) {
              x = cand;
              lo = hi;
              break;
            }
          }
          hi = lo + 0.5 * (hi - lo);
          if (++guard > 80)
            throw precondition_error("center-ray lift: branch ambiguity");
        }
      }
    }
    prev_target = smp.z;
    out.samples.push_back({smp.s, x});
  }
  if (!out.samples.empty()) {
    out.terminal = out.samples.back().z;
    out.min_potential = out.samples.back().s;
  }
  if (base.status == RayStatus::Landed && !out.samples.empty()) {
    cplx lifted = out.samples.back().z;
    for (int it = 0; it < 100; ++it) {
      cplx dv;
      cplx v = fn(lifted, dv);
      cplx res = v - base.terminal;
      if (std::abs(res) <= 1e-12 * (1.0 + std::abs(base.terminal)) || std::abs(dv) == 0.0) break;
      lifted -= res / dv;
    }
    out.terminal = lifted;
  }
  return out;
}

}  // namespace critmax
