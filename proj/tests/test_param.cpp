#include <cmath>
#include <complex>

#include "critmax/param.hpp"
#include "doctest.h"

using namespace critmax;

TEST_CASE("Phi_infinity asymptotics and range") {
  auto ctx = make_context(3, {100.0, 0.0});
  cplx v = phi_infinity_param(ctx);
  cplx asym = -ipow(cplx(-100.0, 0.0), 3) / 2.0;  // 5e5
  CHECK(std::abs(v / asym - 1.0) < 1e-3);
  CHECK(std::abs(v) > 1.0);

  // real positive parameter maps into (-1)^{d-1} R^+ = R^+ for d = 3
  auto c10 = make_context(3, {10.0, 0.0});
  cplx v10 = phi_infinity_param(c10);
  CHECK(v10.imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v10.real() > 1.0);

  auto inC = make_context(3, {0.1, 0.0});
  CHECK_THROWS_AS(phi_infinity_param(inC), precondition_error);
}

TEST_CASE("Phi_infinity covering degree by winding") {
  for (int d : {3, 4, 5}) {
    const int n = 720;
    double total = 0.0;
    cplx prev;
    cplx first;
    for (int k = 0; k <= n; ++k) {
      cplx a = 50.0 * std::exp(cplx(0.0, 2.0 * M_PI * k / n));
      cplx v = phi_infinity_param(make_context(d, a));
      if (k == 0) {
        first = v;
      } else {
        total += std::arg(v / prev);
      }
      prev = v;
    }
    CHECK(std::lround(total / (2.0 * M_PI)) == d);
  }
}

TEST_CASE("Phi_zero asymptotics, extension, and sign") {
  auto ctx = make_context(3, {0.01, 0.0});
  cplx v = phi_zero_param(ctx);
  CHECK(std::abs(v - cplx(0.75e-8, 0.0)) < 0.01 * 0.75e-8);

  CHECK(phi_zero_param(make_context(3, {0.0, 0.0})) == cplx(0.0, 0.0));

  // d = 4 on R^+: value lands on (-1)^{d-1} R^+ = R^-
  auto c4 = make_context(4, {0.01, 0.0});
  cplx v4 = phi_zero_param(c4);
  CHECK(v4.real() < 0.0);
  CHECK(std::abs(v4.imag()) < 1e-12 * std::abs(v4.real()));

  auto esc = make_context(3, {10.0, 0.0});
  CHECK_THROWS_AS(phi_zero_param(esc), precondition_error);
}

TEST_CASE("Phi symmetries") {
  for (int d : {3, 4}) {
    cplx a(0.9, 1.2);
    if (classify_parameter(d, a).kind != ComponentKind::HInfinity) continue;
    auto ctx = make_context(d, a);
    cplx v = phi_infinity_param(ctx);
    cplx vc = phi_infinity_param(make_context(d, std::conj(a)));
    CHECK(std::abs(std::conj(vc) - v) < 1e-9 * (1.0 + std::abs(v)));
    cplx vt = phi_infinity_param(make_context(d, ctx.tau * a));
    CHECK(std::abs(vt - ctx.tau * v) < 1e-9 * (1.0 + std::abs(v)));
  }
  // Phi_0(tau a) = e^{2 pi i/(d-2)} Phi_0(a) for a in S^+
  {
    int d = 4;
    cplx a(0.02, 0.004);
    auto ctx = make_context(d, a);
    cplx v = phi_zero_param(ctx);
    cplx vt = phi_zero_param(make_context(d, ctx.tau * a));
    cplx rot = std::exp(cplx(0.0, 2.0 * M_PI / (d - 2)));
    CHECK(std::abs(vt - rot * v) < 1e-9 * (1.0 + std::abs(v)));
  }
}

TEST_CASE("sector containment of Phi_infinity on S") {
  for (int d : {3, 4}) {
    SectorConstants sc = sector_constants(d);
    for (double frac : {0.15, 0.5, 0.85}) {
      double psi = 2.0 * M_PI * sc.s_hi * frac;
      cplx a = 9.0 * std::exp(cplx(0.0, psi));
      auto cls = classify_parameter(d, a);
      if (cls.kind != ComponentKind::HInfinity) continue;
      cplx v = phi_infinity_param(make_context(d, a));
      double turns = std::arg(v) / (2.0 * M_PI);
      // shift into [delta_lo, delta_lo + 1)
      while (turns < sc.delta_lo - 1e-9) turns += 1.0;
      while (turns >= sc.delta_lo + 1.0 - 1e-9) turns -= 1.0;
      CHECK(turns <= sc.delta_hi + 1e-6);
    }
  }
}

TEST_CASE("classify_parameter basic kinds") {
  CHECK(classify_parameter(3, {0.0, 0.0}).kind == ComponentKind::HZero);
  CHECK(classify_parameter(3, {10.0, 0.0}).kind == ComponentKind::HInfinity);
  CHECK(classify_parameter(3, {0.0, 4.0 / 3.0}, 2000).kind == ComponentKind::Undecided);
  auto cap = classify_parameter(3, {0.0, std::sqrt(3.0)});
  CHECK(cap.kind == ComponentKind::Capture);
  CHECK(cap.depth == 1);
  REQUIRE(cap.phi.has_value());
  CHECK(std::abs(*cap.phi) < 1e-10);  // center of the component
}

TEST_CASE("parameter ray at infinity locus, angle 0: along R^+, lands at 1") {
  ParamRayTrace tr = trace_param_ray(3, Locus::Infinity, Angle(0, 1), 1e-7);
  REQUIRE(!tr.samples.empty());
  for (const auto& smp : tr.samples) {
    CHECK(std::abs(smp.a.imag()) < 1e-9 * (1.0 + std::abs(smp.a)));
    CHECK(smp.a.real() > 1.0);
  }
  CHECK(std::abs(tr.samples.back().a - cplx(1.0, 0.0)) < 1e-4);
  // Misiurewicz polynomial witness: a^6 + 3a^4 - 4 = 0 at the landing point
  cplx a = tr.samples.back().a;
  cplx w = ipow(a, 6) + 3.0 * ipow(a, 4) - 4.0;
  CHECK(std::abs(w) < 1e-3);
}

TEST_CASE("parameter ray at zero locus, angle 0: lands at 1 from inside H_0") {
  ParamLanding pl = land_param_ray(3, Locus::Zero, Angle(0, 1));
  CHECK(std::abs(pl.a - cplx(1.0, 0.0)) < 1e-4);
  for (const auto& smp : pl.trace.samples) {
    CHECK(std::abs(smp.a.imag()) < 1e-9 * (1.0 + std::abs(smp.a)));
    CHECK(smp.a.real() > 0.0);
    CHECK(smp.a.real() < 1.0 + 1e-9);
  }
}

TEST_CASE("zero-locus sector tag selects the iR^+ boundary ray for d=3") {
  // R_0^{tau sigma}(0) is the ray i R^+ cap H_0; it lands at the parabolic
  // cusp 4i/3.
  // landing at the parabolic cusp is logarithmically slow; the tail gets
  // within a couple of percent and the refinement is the solvers' job
  ParamLanding pl = land_param_ray(3, Locus::Zero, Angle(0, 1), 3);
  CHECK(std::abs(pl.a - cplx(0.0, 4.0 / 3.0)) < 0.02);
  for (const auto& smp : pl.trace.samples) {
    CHECK(std::abs(smp.a.real()) < 1e-9 * (1.0 + std::abs(smp.a)));
    CHECK(smp.a.imag() > 0.0);
  }
}

TEST_CASE("ray correspondence: dynamical angle of the critical value") {
  ParamRayTrace tr = trace_param_ray(3, Locus::Infinity, Angle(1, 7), 0.05);
  REQUIRE(tr.samples.size() >= 3);
  for (size_t i = 0; i < tr.samples.size(); i += 5) {
    const auto& smp = tr.samples[i];
    auto ctx = make_context(3, smp.a);
    cplx ph = boettcher_coordinate(ctx, Pole::Infinity, ctx.critical_value());
    double ang = std::arg(ph) / (2.0 * M_PI);
    ang -= std::floor(ang);
    double diff = std::fabs(ang - 1.0 / 7.0);
    diff = std::min(diff, 1.0 - diff);
    CHECK(diff < 1e-6);
    CHECK(std::abs(std::log(std::abs(ph)) - smp.s) < 1e-6 * smp.s);
  }
}

TEST_CASE("capture-component parametrization") {
  cplx center(0.0, std::sqrt(3.0));
  auto ctx = make_context(3, center);
  CHECK(std::abs(phi_capture_param(ctx, 1)) < 1e-10);
  CHECK_THROWS_AS(phi_capture_param(ctx, 2), precondition_error);

  // |Phi_U| grows toward 1 along a path leaving the center
  double last = 0.0;
  for (double step : {0.05, 0.1, 0.15, 0.2}) {
    cplx a = center + step * cplx(0.05, 0.11);
    auto cls = classify_parameter(3, a);
    if (cls.kind != ComponentKind::Capture || cls.depth != 1) break;
    double m = std::abs(*cls.phi);
    CHECK(m > last);
    CHECK(m < 1.0);
    last = m;
  }
  CHECK(last > 0.0);

  // trace a ray inside the component and verify the dynamical correspondence
  ParamRayTrace tr = trace_param_ray(3, Locus::Capture, Angle(1, 4), 0.3, -1, center, 1);
  REQUIRE(!tr.samples.empty());
  const auto& smp = tr.samples.back();
  auto cctx = make_context(3, smp.a);
  cplx w = cctx.eval(cctx.critical_value());  // f^1(f(-a))
  cplx ph = boettcher_coordinate(cctx, Pole::Zero, w);
  double ang = std::arg(ph) / (2.0 * M_PI);
  ang -= std::floor(ang);
  double diff = std::fabs(ang - 0.25);
  diff = std::min(diff, 1.0 - diff);
  CHECK(diff < 1e-6);
}

TEST_CASE("critical ray angles are exact") {
  auto v = critical_ray_angles(3, Angle(0, 1), Locus::Infinity);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == Angle(1, 3));
  CHECK(v[1] == Angle(2, 3));
  auto z = critical_ray_angles(3, Angle(0, 1), Locus::Zero);
  REQUIRE(z.size() == 1);
  CHECK(z[0] == Angle(1, 2));
  auto w = critical_ray_angles(4, Angle(1, 2), Locus::Infinity);
  CHECK(w[0] == Angle(3, 8));
  CHECK(w[1] == Angle(5, 8));
}

TEST_CASE("wake membership at the d=3 cusp 4i/3") {
  // The external rays of angles 0 and 1/2 in the sectors with asymptotic
  // directions 120 and 60 degrees land at the cusp and bound its wake.
  CHECK(!wake_membership(3, {0.0, 0.0}, Angle(0, 1), Angle(1, 2), 0, 2));
  // a point just beyond the cusp, radially outward, lies in the wake
  cplx inside = cplx(0.0, 4.0 / 3.0) * 1.08;
  CHECK(wake_membership(3, inside, Angle(0, 1), Angle(1, 2), 0, 2));
  // a point on the non-wake side
  CHECK(!wake_membership(3, {0.05, 0.0}, Angle(0, 1), Angle(1, 2), 0, 2));
}
