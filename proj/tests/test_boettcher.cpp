#include <cmath>
#include <complex>
#include <random>

#include "critmax/boettcher.hpp"
#include "doctest.h"

using namespace critmax;

namespace {

// Independent iteration oracle for the Green function at 0:
// -log|lambda f^n(z)|/(d-1)^n once the iterate is tiny.
double green_zero_oracle(const FamilyContext& ctx, cplx z) {
  cplx cur = z;
  int n = 0;
  while (std::abs(cur) > 1e-16 / (1.0 + std::abs(ctx.lambda)) && n < 100000) {
    cur = ctx.eval(cur);
    ++n;
  }
  return -std::log(std::abs(ctx.lambda * cur)) / std::pow(double(ctx.d - 1), double(n));
}

// Sample z values in the escape region above the critical equipotential.
std::vector<cplx> valid_outer_samples(const FamilyContext& ctx, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> rad(1.0, 3.0);
  double gc = green(ctx, Pole::Infinity, -ctx.a).value;
  std::vector<cplx> out;
  while (int(out.size()) < count) {
    double r = tame_radius_inf(ctx.d, std::abs(ctx.a)) * rad(rng);
    cplx z = r * std::exp(cplx(0.0, ang(rng)));
    if (green(ctx, Pole::Infinity, z).value > gc) out.push_back(z);
  }
  return out;
}

}  // namespace

TEST_CASE("green at infinity: pure power map") {
  auto ctx = make_context(3, {0.0, 0.0});
  CHECK(green(ctx, Pole::Infinity, {2.0, 0.0}).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(green(ctx, Pole::Infinity, {0.5, 0.5}).value == 0.0);
}

TEST_CASE("green multiplicativity") {
  for (int d : {3, 4, 5}) {
    auto ctx = make_context(d, {1.0, 0.25});
    auto samples = valid_outer_samples(ctx, 50, 42 + d);
    for (cplx z : samples) {
      double g = green(ctx, Pole::Infinity, z).value;
      double gf = green(ctx, Pole::Infinity, ctx.eval(z)).value;
      CHECK(std::abs(gf - d * g) < 1e-9 * (1.0 + g));
    }
  }
}

TEST_CASE("green at zero: normalization and functional equation") {
  auto ctx = make_context(3, {0.5, 0.0});
  // lambda(0.5) = 0.75 for d = 3
  CHECK(std::abs(ctx.lambda - cplx(0.75, 0.0)) < 1e-15);
  double g = green(ctx, Pole::Zero, {0.01, 0.0}).value;
  double oracle = green_zero_oracle(ctx, {0.01, 0.0});
  CHECK(std::abs(g - oracle) < 1e-9 * (1.0 + std::abs(oracle)));
  // G^0(z) = -log|lambda z| + O(|z|)
  CHECK(std::abs(g + std::log(0.75 * 0.01)) < 0.01);
  // functional equation
  double gf = green(ctx, Pole::Zero, ctx.eval({0.01, 0.0})).value;
  CHECK(std::abs(gf - 2.0 * g) < 1e-9 * (1.0 + g));
  // zero outside the basin
  CHECK(green(ctx, Pole::Zero, {100.0, 0.0}).value == 0.0);
}

TEST_CASE("green rejects lambda-undefined parameters at pole zero") {
  auto ctx = make_context(3, {-1.0, 0.0});
  CHECK_THROWS_AS(green(ctx, Pole::Zero, {0.01, 0.0}), precondition_error);
  auto ctx0 = make_context(3, {0.0, 0.0});
  CHECK_THROWS_AS(green(ctx0, Pole::Zero, {0.01, 0.0}), precondition_error);
}

TEST_CASE("boettcher coordinate: identity for a = 0") {
  auto ctx = make_context(3, {0.0, 0.0});
  CHECK(std::abs(boettcher_coordinate(ctx, Pole::Infinity, {3.0, 0.0}) - cplx(3.0, 0.0)) < 1e-12);
}

TEST_CASE("boettcher functional equations") {
  for (int d : {3, 4, 5}) {
    auto ctx = make_context(d, {0.8, 0.3});
    for (cplx z : valid_outer_samples(ctx, 40, 5 + d)) {
      cplx p = boettcher_coordinate(ctx, Pole::Infinity, z);
      cplx pf = boettcher_coordinate(ctx, Pole::Infinity, ctx.eval(z));
      CHECK(std::abs(pf - ipow(p, d)) <= 1e-9 * std::abs(ipow(p, d)));
    }
  }
  // pole zero, a in H_0
  auto ctx = make_context(3, {0.5, 0.0});
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  double gc = green(ctx, Pole::Zero, -ctx.a).value;
  int done = 0;
  while (done < 25) {
    std::uniform_real_distribution<double> rad(1e-4, 0.2);
    cplx z = rad(rng) * std::exp(cplx(0.0, ang(rng)));
    if (green(ctx, Pole::Zero, z).value <= gc) continue;
    cplx p = boettcher_coordinate(ctx, Pole::Zero, z);
    cplx pf = boettcher_coordinate(ctx, Pole::Zero, ctx.eval(z));
    CHECK(std::abs(pf - ipow(p, 2)) <= 1e-9 * std::abs(ipow(p, 2)));
    ++done;
  }
}

TEST_CASE("boettcher tangency at both poles") {
  auto ctx = make_context(3, {0.5, 0.0});
  // phi^0(z) = lambda z (1 + O(z))
  cplx p = boettcher_coordinate(ctx, Pole::Zero, {1e-4, 0.0});
  CHECK(std::abs(p - cplx(7.5e-5, 0.0)) < 1e-3 * 7.5e-5);
  // phi^inf(z)/z - 1 small at large |z|
  for (int d : {3, 4}) {
    auto c2 = make_context(d, {2.0, 1.0});
    double aa = std::abs(c2.a);
    for (double mult : {100.0, 300.0}) {
      cplx z = mult * std::max(1.0, aa) * std::exp(cplx(0.0, 0.7));
      cplx ph = boettcher_coordinate(c2, Pole::Infinity, z);
      CHECK(std::abs(ph / z - 1.0) <= 10.0 * aa / std::abs(z));
    }
  }
}

TEST_CASE("boettcher symmetry identities") {
  // phi^inf_a(z) = tau^{-1} phi^inf_{tau a}(tau z)
  for (int d : {3, 4}) {
    auto ctx = make_context(d, {0.9, 0.4});
    auto ctx_t = make_context(d, ctx.tau * ctx.a);
    for (cplx z : valid_outer_samples(ctx, 20, 31 + d)) {
      cplx lhs = boettcher_coordinate(ctx, Pole::Infinity, z);
      cplx rhs = boettcher_coordinate(ctx_t, Pole::Infinity, ctx.tau * z) / ctx.tau;
      CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(lhs)));
    }
  }
  // phi^0_a(z) = e^{-2 pi i/(d-2)} phi^0_{tau a}(tau z) for a in S^+, d >= 4
  {
    int d = 4;
    auto ctx = make_context(d, {0.25, 0.05});
    auto ctx_t = make_context(d, ctx.tau * ctx.a);
    cplx rot = std::exp(cplx(0.0, -2.0 * M_PI / (d - 2)));
    double gc = green(ctx, Pole::Zero, -ctx.a).value;
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(1e-4, 0.05);
    int done = 0;
    while (done < 15) {
      cplx z = rad(rng) * std::exp(cplx(0.0, ang(rng)));
      if (green(ctx, Pole::Zero, z).value <= gc) continue;
      cplx lhs = boettcher_coordinate(ctx, Pole::Zero, z);
      cplx rhs = rot * boettcher_coordinate(ctx_t, Pole::Zero, ctx.tau * z);
      CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(lhs)));
      ++done;
    }
  }
}

TEST_CASE("boettcher precondition failures carry the gap") {
  auto ctx = make_context(3, {2.0, 0.0});  // a in H_infinity
  double gc = green(ctx, Pole::Infinity, -ctx.a).value;
  REQUIRE(gc > 0.0);
  // a point well below the critical equipotential
  cplx z = ctx.critical_point() * 1.000001;
  try {
    boettcher_coordinate(ctx, Pole::Infinity, z);
    CHECK(false);
  } catch (const precondition_error& e) {
    CHECK(e.gap >= 0.0);
  }
}

TEST_CASE("boettcher inverse") {
  auto c0 = make_context(3, {0.0, 0.0});
  CHECK(std::abs(boettcher_inverse(c0, Pole::Infinity, {2.0, 0.0}, {2.5, 0.1}) - cplx(2.0, 0.0)) <
        1e-9);

  auto ctx = make_context(3, {0.5, 0.0});
  // round-trip at infinity
  for (cplx z : valid_outer_samples(ctx, 20, 9)) {
    cplx w = boettcher_coordinate(ctx, Pole::Infinity, z);
    cplx back = boettcher_inverse(ctx, Pole::Infinity, w, z * 1.03);
    CHECK(std::abs(back - z) < 1e-9 * (1.0 + std::abs(z)));
  }
  // tangency oracle at the zero pole
  cplx w(0.001, 0.0);
  cplx z = boettcher_inverse(ctx, Pole::Zero, w, {0.001, 0.0});
  CHECK(std::abs(z - w / ctx.lambda) < 2e-3 * std::abs(w / ctx.lambda));
  // preconditions on w
  CHECK_THROWS_AS(boettcher_inverse(ctx, Pole::Infinity, {0.5, 0.0}, {2.0, 0.0}),
                  precondition_error);
  CHECK_THROWS_AS(boettcher_inverse(ctx, Pole::Zero, {1.5, 0.0}, {0.L, 0.0}),
                  precondition_error);
}

TEST_CASE("immediate basin membership") {
  auto ctx = make_context(3, {0.1, 0.0});
  CHECK(in_immediate_basin(ctx, {0.01, 0.0}));
  CHECK(!in_immediate_basin(ctx, {-10.0, 0.0}));  // escaping
  auto big = make_context(3, {10.0, 0.0});
  CHECK(!in_immediate_basin(big, {-10.0, 0.0}));
}

TEST_CASE("non-immediate preimage detected via the cocritical endpoint") {
  // For a = 10, a in H_infinity, the basin of 0 is the immediate one only.
  // Construct a preimage of a small basin point across the cocritical branch:
  // solve f(z) = w with the root near the cocritical point -3a/2.
  auto ctx = make_context(3, {10.0, 0.0});
  cplx target(0.01, 0.0);
  cplx z = ctx.cocritical() + 1e-3;
  for (int i = 0; i < 200; ++i) {
    cplx r = ctx.eval(z) - target;
    if (std::abs(r) < 1e-15) break;
    z -= r / ctx.deriv(z);
  }
  REQUIRE(std::abs(ctx.eval(z) - target) < 1e-12);
  REQUIRE(std::abs(z - ctx.cocritical()) < 0.1);
  CHECK(!in_immediate_basin(ctx, z));
  CHECK(in_immediate_basin(ctx, target));
}

TEST_CASE("capture time") {
  auto h0 = make_context(3, {0.1, 0.0});
  auto c0 = capture_time(h0);
  REQUIRE(c0.has_value());
  CHECK(*c0 == 0);

  auto inf = make_context(3, {10.0, 0.0});
  CHECK(!capture_time(inf).has_value());
}
