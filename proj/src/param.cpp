#include "critmax/param.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "critmax/cdual.hpp"

namespace critmax {

SectorConstants sector_constants(int d) {
  SectorConstants sc;
  sc.d = d;
  double base = (d % 2 == 1) ? 0.0 : 0.5;  // (-1)^{d-1} prefix as a half turn
  sc.delta_lo = base;
  sc.delta_hi = base + 0.5 + 0.5 / (d - 1);
  sc.lambda_lo = base;
  sc.lambda_hi = base + 0.5 + 0.5 / (d - 2);
  sc.s_hi = 0.5 / (d - 1);
  return sc;
}

cplx phi_infinity_param(const FamilyContext& ctx) {
  OrbitOutcome oc = classify_orbit(ctx, -ctx.a, 10000);
  if (oc.kind != OrbitKind::EscapedToInfinity)
    throw precondition_error("a is not in H_infinity");
  return std::exp(log_phi_infinity_param(ctx.d, cplx(ctx.a)));
}

cplx phi_zero_param(const FamilyContext& ctx) {
  if (ctx.a == cplx(0.0, 0.0)) return {0.0, 0.0};  // extension Phi_0(0) = 0
  if (!ctx.lambda_defined)
    throw precondition_error("Phi_0 undefined for a on the negative real axis");
  std::optional<int> cap = capture_time(ctx);
  if (!cap || *cap != 0) throw precondition_error("a is not in H_0");
  return std::exp(log_phi_zero_param(ctx.d, cplx(ctx.a)));
}

cplx phi_capture_param(const FamilyContext& ctx, int depth) {
  if (depth < 1) throw precondition_error("capture depth must be >= 1");
  if (!ctx.lambda_defined)
    throw precondition_error("Phi_U undefined for a on the negative real axis");
  std::optional<int> cap = capture_time(ctx);
  if (!cap || *cap != depth)
    throw precondition_error("capture depth mismatch with capture_time");
  return std::exp(log_phi_capture_param(ctx.d, cplx(ctx.a), depth));
}

ComponentClass classify_parameter(int d, cplx a, int budget) {
  FamilyContext ctx = make_context(d, a);
  ComponentClass out;
  OrbitOutcome oc = classify_orbit(ctx, -a, budget);
  if (oc.kind == OrbitKind::EscapedToInfinity) {
    out.kind = ComponentKind::HInfinity;
    out.potential = green(ctx, Pole::Infinity, ctx.critical_value(), budget).value;
    return out;
  }
  if (oc.kind == OrbitKind::Undecided) {
    out.kind = ComponentKind::Undecided;
    out.budget = budget;
    return out;
  }
  std::optional<int> cap = capture_time(ctx, budget);
  if (!cap) {
    out.kind = ComponentKind::Undecided;
    out.budget = budget;
    return out;
  }
  if (*cap == 0) {
    out.kind = ComponentKind::HZero;
    if (a == cplx(0.0, 0.0))
      out.phi = cplx(0.0, 0.0);
    else if (ctx.lambda_defined)
      out.phi = std::exp(log_phi_zero_param(d, a));
    return out;
  }
  out.kind = ComponentKind::Capture;
  out.depth = *cap;
  if (ctx.lambda_defined) out.phi = std::exp(log_phi_capture_param(d, a, *cap));
  return out;
}

namespace {

double wrap_angle(double x) {
  x = std::fmod(x, 2.0 * M_PI);
  if (x > M_PI) x -= 2.0 * M_PI;
  if (x <= -M_PI) x += 2.0 * M_PI;
  return x;
}

// Newton solve log Phi(a) = target (mod 2 pi i) from a seed.
template <class LogPhi>
cplx newton_param(LogPhi&& lp, cplx target, cplx seed, double tol, cplx* deriv_out = nullptr,
                  int iters = 60) {
  cplx a = seed;
  cplx best = seed;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    cdual v;
    try {
      v = lp(cdual::variable(a));
    } catch (const error&) {
      a = 0.5 * (a + best);
      continue;
    }
    cplx r = v.v - target;
    r = cplx(r.real(), std::remainder(r.imag(), 2.0 * M_PI));
    double res = std::abs(r);
    if (res < best_res) {
      best_res = res;
      best = a;
    }
    if (res <= tol) {
      if (deriv_out) *deriv_out = v.d;
      return a;
    }
    if (std::abs(v.d) == 0.0) break;
    cplx step = r / v.d;
    double cap = 0.25 * (1.0 + std::abs(a));
    if (!std::isfinite(std::abs(step))) step = cplx(cap, 0.0);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    a -= step;
  }
  throw newton_error("parameter-ray Newton stalled", best, best_res);
}

struct SeedInfo {
  cplx a;
  int sector;
  double psi;  // argument of a
};

// Asymptotic seed for the infinity locus: Phi_inf(a) ~ -(-a)^d/(d-1).
SeedInfo seed_infinity(int d, const Angle& t, double s, int sector) {
  double rho = std::pow((d - 1) * std::exp(s), 1.0 / d);
  double t2pi = 2.0 * M_PI * t.to_double();
  int best_k = 0;
  double best = 1e9;
  for (int k = 0; k < d; ++k) {
    double psi = wrap_angle((t2pi - M_PI + 2.0 * M_PI * k) / d + M_PI);
    if (sector >= 0) {
      if (k == sector) return {rho * std::exp(cplx(0.0, psi)), k, psi};
    } else if (std::fabs(psi) < best) {
      best = std::fabs(psi);
      best_k = k;
    }
  }
  double psi = wrap_angle((t2pi - M_PI + 2.0 * M_PI * best_k) / d + M_PI);
  return {rho * std::exp(cplx(0.0, psi)), best_k, psi};
}

// Asymptotic seed for the zero locus: Phi_0(a) ~ -lambda(a)(-a)^d/(d-1).
SeedInfo seed_zero(int d, const Angle& t, double s, int sector) {
  double q = d + 1.0 / (d - 2);
  double C = std::pow(double(d) / (d - 1), 1.0 / (d - 2)) / (d - 1);
  double rho = std::pow(std::exp(-s) / C, 1.0 / q);
  double t2pi = 2.0 * M_PI * t.to_double();
  int nsec = 2 * d;  // enough branches to cover a full turn
  int best_j = 0;
  double best = 1e9;
  for (int j = -nsec; j <= nsec; ++j) {
    double psi = (t2pi - (d + 1) * M_PI + 2.0 * M_PI * j) / q;
    if (psi <= -M_PI || psi > M_PI) continue;
    if (sector >= 0) {
      if (j == sector) return {rho * std::exp(cplx(0.0, psi)), j, psi};
    } else if (std::fabs(psi) < best) {
      best = std::fabs(psi);
      best_j = j;
    }
  }
  if (sector >= 0) throw precondition_error("no seed branch with the requested sector index");
  double psi = (t2pi - (d + 1) * M_PI + 2.0 * M_PI * best_j) / q;
  return {rho * std::exp(cplx(0.0, psi)), best_j, psi};
}

}  // namespace

ParamRayTrace trace_param_ray(int d, Locus locus, const Angle& t, double s_min, int sector,
                              cplx capture_seed, int capture_depth) {
  if (s_min <= 0.0) throw precondition_error("s_min must be positive");
  ParamRayTrace out;
  out.locus = locus;
  out.angle = t;
  out.status = RayStatus::Truncated;
  out.terminal = cplx(0.0, 0.0);

  double s_start;
  cplx a;
  std::function<cdual(cdual)> lp;
  double sign;  // Re(log Phi) = sign * s
  if (locus == Locus::Infinity) {
    s_start = std::max(d * std::log(50.0), 1.0);
    SeedInfo si = seed_infinity(d, t, s_start, sector);
    a = si.a;
    out.sector = si.sector;
    out.seed_arg = si.psi;
    lp = [d](cdual aa) { return log_phi_infinity_param(d, aa); };
    sign = 1.0;
  } else if (locus == Locus::Zero) {
    double q = d + 1.0 / (d - 2);
    double C = std::pow(double(d) / (d - 1), 1.0 / (d - 2)) / (d - 1);
    s_start = -std::log(C * std::pow(0.02, q));
    SeedInfo si = seed_zero(d, t, s_start, sector);
    a = si.a;
    out.sector = si.sector;
    out.seed_arg = si.psi;
    lp = [d](cdual aa) { return log_phi_zero_param(d, aa); };
    sign = -1.0;
  } else {
    if (capture_depth < 1) throw precondition_error("capture trace needs a depth >= 1");
    // Center of the component: Newton on f^depth(f(-a)) = 0 from the seed.
    cplx c = capture_seed;
    for (int it = 0; it < 200; ++it) {
      cdual aa = cdual::variable(c);
      cdual w = family_critical_value(d, aa);
      for (int i = 0; i < capture_depth; ++i) w = family_eval(d, aa, w);
      if (std::abs(w.v) <= 1e-14 * (1.0 + std::abs(c))) break;
      if (std::abs(w.d) == 0.0) throw newton_error("capture center: singular", c, std::abs(w.v));
      cplx step = w.v / w.d;
      double cap = 0.2 * (1.0 + std::abs(c));
      if (std::abs(step) > cap) step *= cap / std::abs(step);
      c -= step;
    }
    int dep = capture_depth;
    lp = [d, dep](cdual aa) { return log_phi_capture_param(d, aa, dep); };
    sign = -1.0;
    // Start near the center with a linearized seed.
    cdual probe = cdual::variable(c);
    cdual w = family_critical_value(d, probe);
    for (int i = 0; i < dep; ++i) w = family_eval(d, probe, w);
    // Phi_U(a) ~ phi0'(0-chart) * w(a); derivative of Phi at the center via
    // the jet of log is singular at 0, so use w directly: Phi ~ lambda * w.
    cplx lam = family_lambda(d, c);
    cplx dPhi = lam * w.d;
    s_start = 12.0;
    cplx target0 = std::exp(cplx(-s_start, 2.0 * M_PI * t.to_double()));
    a = c + target0 / dPhi;
    out.sector = 0;
    out.seed_arg = std::arg(a - c);
  }

  double s = s_start;
  double tol = 1e-9;
  cplx prev = a;
  double s_prev = s_start;
  cplx deriv(0.0, 0.0);
  while (true) {
    cplx target = cplx(sign * s, 2.0 * M_PI * t.to_double());
    try {
      a = newton_param(lp, target, a, tol, &deriv);
    } catch (const newton_error& e) {
      out.note = e.what();
      if (!out.samples.empty()) {
        out.terminal = out.samples.back().a;
        out.min_potential = out.samples.back().s;
      }
      return out;
    }
    // Continuity: compare the step against the local derivative estimate.
    if (!out.samples.empty() && std::abs(deriv) > 0.0) {
      double expected = (s_prev - s) / std::abs(deriv);
      if (std::abs(a - prev) > 20.0 * expected + 1e-6 * (1.0 + std::abs(prev))) {
        out.note = "parameter continuation jumped";
        out.terminal = out.samples.back().a;
        out.min_potential = out.samples.back().s;
        return out;
      }
    }
    out.samples.push_back({s, a});
    out.terminal = a;
    out.min_potential = s;
    prev = a;
    s_prev = s;
    if (s <= s_min * (1.0 + 1e-12)) break;
    s = std::max(0.5 * s, s_min);
  }
  if (out.samples.size() >= 10) {
    double diam = 0.0;
    size_t n = out.samples.size();
    for (size_t i = n - 10; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        diam = std::max(diam, std::abs(out.samples[i].a - out.samples[j].a));
    if (diam <= 1e-9 * (1.0 + std::abs(out.terminal))) {
      out.status = RayStatus::Landed;
      return out;
    }
  }
  out.note = "reached s_min without landing certificate";
  return out;
}

ParamLanding land_param_ray(int d, Locus locus, const Angle& t, int sector, double s_min) {
  ParamRayTrace tr = trace_param_ray(d, locus, t, s_min, sector);
  if (tr.samples.empty()) throw precondition_error("parameter ray produced no samples");
  size_t n = tr.samples.size();
  double diam = 0.0;
  size_t from = n > 6 ? n - 6 : 0;
  for (size_t i = from; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      diam = std::max(diam, std::abs(tr.samples[i].a - tr.samples[j].a));
  ParamLanding out;
  out.a = tr.samples.back().a;
  out.tail_diameter = diam;
  out.trace = std::move(tr);
  return out;
}

namespace {

double winding_around(const std::vector<cplx>& poly, cplx p) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < poly.size(); ++i)
    total += std::arg((poly[i + 1] - p) / (poly[i] - p));
  total += std::arg((poly.front() - p) / (poly.back() - p));
  return total / (2.0 * M_PI);
}

}  // namespace

bool wake_membership(int d, cplx a, const Angle& zeta, const Angle& zeta_prime, int sector,
                     int sector_prime) {
  ParamRayTrace r1 = trace_param_ray(d, Locus::Infinity, zeta, 1e-6, sector);
  ParamRayTrace r2 = trace_param_ray(d, Locus::Infinity, zeta_prime, 1e-6, sector_prime);
  if (r1.samples.empty() || r2.samples.empty())
    throw precondition_error("wake rays could not be traced");
  cplx a1 = r1.samples.back().a, a2 = r2.samples.back().a;
  // Landing at a parabolic parameter is logarithmically slow, so the tails
  // cannot be driven arbitrarily close; require them to approach each other.
  double gap = std::abs(a1 - a2);
  if (gap > 0.05 * (1.0 + std::abs(a1)))
    throw precondition_error("wake rays do not land at a common parameter");
  size_t n1 = r1.samples.size(), n2 = r2.samples.size();
  if (n1 > 4 && n2 > 4) {
    double gap_before =
        std::abs(r1.samples[n1 - 4].a - r2.samples[n2 - 4].a);
    if (gap > gap_before * (1.0 + 1e-9))
      throw precondition_error("wake ray tails do not approach each other");
  }
  cplx landing = 0.5 * (a1 + a2);
  // Closed curve: ray 1 from far in, the common landing point, ray 2 back
  // out, closed by an arc at large radius.
  std::vector<cplx> curve;
  for (const auto& smp : r1.samples) curve.push_back(smp.a);
  curve.push_back(landing);
  for (auto it = r2.samples.rbegin(); it != r2.samples.rend(); ++it) curve.push_back(it->a);
  cplx far2 = r2.samples.front().a, far1 = r1.samples.front().a;
  double R = std::max(std::abs(far1), std::abs(far2));
  double a2arg = std::arg(far2), a1arg = std::arg(far1);
  double sweep = wrap_angle(a1arg - a2arg);
  for (int i = 1; i < 32; ++i)
    curve.push_back(R * std::exp(cplx(0.0, a2arg + sweep * i / 32.0)));
  // Boundary convention: points on the curve are not in the open wake.
  for (const cplx& p : curve)
    if (std::abs(p - a) < 1e-9 * (1.0 + std::abs(a))) return false;
  if (std::abs(a - landing) < 1e-9 * (1.0 + std::abs(a))) return false;
  double wa = winding_around(curve, a);
  double w0 = winding_around(curve, {0.0, 0.0});
  return std::lround(wa) != std::lround(w0);
}

std::vector<Angle> critical_ray_angles(int d, const Angle& t, Locus locus) {
  if (locus == Locus::Infinity)
    return {t.preimage(d, (d - 1) / 2), t.preimage(d, (d + 1) / 2)};
  if (locus == Locus::Zero) return {t.preimage(d - 1, (d - 1) / 2)};
  throw precondition_error("critical ray angles: locus must be Zero or Infinity");
}

}  // namespace critmax
