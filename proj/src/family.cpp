#include "critmax/family.hpp"

#include <cmath>
#include <limits>

namespace critmax {

namespace {

// Largest r <= 1/2 with r^{d-2}(r + d|a|/(d-1)) <= 1/2, by bisection.
// Inside that radius |f_a(z)| <= |z|/2, so convergence to 0 is certified.
double contraction_radius(int d, double abs_a) {
  double c = d * abs_a / (d - 1);
  auto g = [&](double r) { return std::pow(r, d - 2) * (r + c); };
  if (g(0.5) <= 0.5) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) <= 0.5 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

FamilyContext make_context(int d, cplx a) {
  if (d < 3) throw precondition_error("degree must be >= 3");
  FamilyContext ctx;
  ctx.d = d;
  ctx.a = a;
  double ang = 2.0 * M_PI / (d - 1);
  ctx.tau = cplx(std::cos(ang), std::sin(ang));
  ctx.lambda_defined = !on_negative_real_axis(a);
  ctx.lambda = ctx.lambda_defined
                   ? family_lambda(d, a)
                   : cplx(std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN());
  double abs_a = std::abs(a);
  ctx.r_escape = std::max(2.0, 2.0 * d * abs_a / (d - 1));
  ctx.r_zero = contraction_radius(d, abs_a);
  return ctx;
}

OrbitOutcome classify_orbit(const FamilyContext& ctx, cplx z, int budget) {
  if (budget < 1) throw precondition_error("orbit budget must be >= 1");
  for (int n = 0; n <= budget; ++n) {
    double r = std::abs(z);
    if (!std::isfinite(r) || r > ctx.r_escape)
      return {OrbitKind::EscapedToInfinity, n, z, budget};
    if (r < ctx.r_zero) return {OrbitKind::ConvergedToZero, n, z, budget};
    if (n == budget) break;
    z = ctx.eval(z);
  }
  return {OrbitKind::Undecided, budget, z, budget};
}

cplx apply_tau_power(const FamilyContext& ctx, int k, cplx x) {
  k %= (ctx.d - 1);
  if (k < 0) k += ctx.d - 1;
  cplx t(1.0, 0.0);
  for (int i = 0; i < k; ++i) t *= ctx.tau;
  return t * x;
}

}  // namespace critmax
