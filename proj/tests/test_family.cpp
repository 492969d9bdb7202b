#include <cmath>
#include <complex>
#include <random>

#include "critmax/family.hpp"
#include "doctest.h"

using namespace critmax;

namespace {
cplx rand_cplx(std::mt19937& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  return {u(rng), u(rng)};
}
}  // namespace

TEST_CASE("evaluate closed-form examples") {
  auto c3 = make_context(3, {1.0, 0.0});
  CHECK(std::abs(c3.eval({-1.0, 0.0}) - cplx(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(c3.eval({0.0, 0.0})) == 0.0);
  auto c4 = make_context(4, {1.0, 0.0});
  CHECK(std::abs(c4.eval({-1.0, 0.0}) - cplx(-1.0 / 3.0, 0.0)) < 1e-15);
}

TEST_CASE("derivative closed-form examples") {
  auto c3 = make_context(3, {1.0, 0.0});
  CHECK(std::abs(c3.deriv({0.5, 0.0}) - cplx(2.25, 0.0)) < 1e-15);
  CHECK(std::abs(c3.deriv({0.0, 0.0})) == 0.0);
  // parabolic pair (a, z) = (4i/3, -i): multiplier exactly 1
  auto cp = make_context(3, {0.0, 4.0 / 3.0});
  CHECK(std::abs(cp.deriv({0.0, -1.0}) - cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("critical value") {
  CHECK(std::abs(make_context(3, {1.0, 0.0}).critical_value() - cplx(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(make_context(4, {1.0, 0.0}).critical_value() - cplx(-1.0 / 3.0, 0.0)) < 1e-15);
  CHECK(std::abs(make_context(3, {0.0, 0.0}).critical_value()) == 0.0);
}

TEST_CASE("tau and sigma conjugacy identities") {
  std::mt19937 rng(12345);
  for (int d : {3, 4, 5}) {
    for (int i = 0; i < 500; ++i) {
      cplx a = rand_cplx(rng, 1000.0);
      cplx z = rand_cplx(rng, 1000.0);
      auto ctx = make_context(d, a);
      auto ctx_tau = make_context(d, ctx.tau * a);
      auto ctx_conj = make_context(d, std::conj(a));
      cplx fz = ctx.eval(z);
      double scale = 1e-12 * (1.0 + std::abs(fz));
      CHECK(std::abs(ctx_tau.eval(ctx.tau * z) - ctx.tau * fz) < scale);
      CHECK(std::abs(std::conj(ctx_conj.eval(std::conj(z))) - fz) < scale);
    }
  }
}

TEST_CASE("tau powers") {
  auto c3 = make_context(3, {1.0, 0.0});
  CHECK(std::abs(c3.tau - cplx(-1.0, 0.0)) < 1e-15);
  auto c4 = make_context(4, {1.0, 0.0});
  CHECK(std::abs(apply_tau_power(c4, 3, {1.0, 0.0}) - cplx(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(apply_sigma({1.0, 2.0}) - cplx(1.0, -2.0)) == 0.0);
}

TEST_CASE("escape radius doubles the modulus") {
  std::mt19937 rng(7);
  for (int d : {3, 4, 5}) {
    for (double abs_a : {0.0, 0.5, 3.0, 40.0}) {
      std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
      cplx a = abs_a * std::exp(cplx(0.0, u(rng)));
      auto ctx = make_context(d, a);
      for (int i = 0; i < 64; ++i) {
        cplx z = ctx.r_escape * std::exp(cplx(0.0, u(rng)));
        CHECK(std::abs(ctx.eval(z)) >= 2.0 * std::abs(z) * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("contraction radius halves the modulus") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int d : {3, 4, 5}) {
    for (double abs_a : {0.1, 1.0, 10.0}) {
      auto ctx = make_context(d, cplx(abs_a, 0.0));
      for (int i = 0; i < 64; ++i) {
        cplx z = ctx.r_zero * 0.999 * std::exp(cplx(0.0, u(rng)));
        CHECK(std::abs(ctx.eval(z)) <= 0.5 * std::abs(z) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("derivative matches central finite difference") {
  std::mt19937 rng(99);
  for (int d : {3, 4, 5}) {
    for (int i = 0; i < 200; ++i) {
      cplx a = rand_cplx(rng, 5.0);
      cplx z = rand_cplx(rng, 5.0);
      if (std::abs(z) < 0.1 || std::abs(z + a) < 0.1) continue;
      auto ctx = make_context(d, a);
      double h = 1e-6 * (1.0 + std::abs(z));
      cplx fd = (ctx.eval(z + h) - ctx.eval(z - h)) / (2.0 * h);
      cplx ex = ctx.deriv(z);
      CHECK(std::abs(fd - ex) < 1e-6 * (1.0 + std::abs(ex)));
    }
  }
}

TEST_CASE("lambda branch identity") {
  std::mt19937 rng(1001);
  for (int d : {3, 4, 5, 7}) {
    for (int i = 0; i < 200; ++i) {
      cplx a = rand_cplx(rng, 50.0);
      if (on_negative_real_axis(a) || std::abs(a) < 1e-6) continue;
      auto ctx = make_context(d, a);
      cplx q = ipow(ctx.lambda, d - 2) * double(d - 1) / (double(d) * a);
      CHECK(std::abs(q - 1.0) < 1e-12);
    }
    // lambda maps R^+ into R^+
    auto ctx = make_context(d, cplx(2.5, 0.0));
    CHECK(ctx.lambda.imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ctx.lambda.real() > 0.0);
  }
}

TEST_CASE("orbit classification examples") {
  auto big = make_context(3, {10.0, 0.0});
  auto oc = classify_orbit(big, {-10.0, 0.0}, 100);
  CHECK(oc.kind == OrbitKind::EscapedToInfinity);
  CHECK(oc.step == 1);  // f(-10) = 500 > r_escape = 30
  CHECK(std::abs(oc.witness - cplx(500.0, 0.0)) < 1e-9);

  auto small = make_context(3, {0.1, 0.0});
  auto oc2 = classify_orbit(small, {-0.1, 0.0}, 100);
  CHECK(oc2.kind == OrbitKind::ConvergedToZero);

  // parabolic parameter: critical orbit converges sub-geometrically to -i
  auto par = make_context(3, {0.0, 4.0 / 3.0});
  auto oc3 = classify_orbit(par, {0.0, -4.0 / 3.0}, 200);
  CHECK(oc3.kind == OrbitKind::Undecided);
}

TEST_CASE("overflow saturates to escape") {
  auto ctx = make_context(3, {2.0, 0.0});
  auto oc = classify_orbit(ctx, {1e200, 0.0}, 10);
  CHECK(oc.kind == OrbitKind::EscapedToInfinity);
}
