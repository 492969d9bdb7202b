#include "critmax/angle.hpp"

#include <unordered_map>

namespace critmax {

Angle::Angle(bigint p, bigint q) {
  if (q == 0) throw precondition_error("angle with zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  p %= q;
  if (p < 0) p += q;
  bigint g = gcd(p, q);
  num_ = p / g;
  den_ = q / g;
}

std::optional<Angle> Angle::parse(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Angle(bigint(s), bigint(1));
    bigint p(s.substr(0, slash));
    bigint q(s.substr(slash + 1));
    if (q == 0) return std::nullopt;
    return Angle(p, q);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Angle Angle::times(const bigint& m) const { return Angle(m * num_, den_); }

Angle Angle::plus(const Angle& o) const {
  return Angle(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Angle Angle::minus(const Angle& o) const {
  return Angle(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Angle Angle::negated() const { return Angle(-num_, den_); }

Angle Angle::preimage(const bigint& m, const bigint& k) const {
  if (m <= 0) throw precondition_error("preimage multiplier must be positive");
  return Angle(num_ + k * den_, m * den_);
}

double Angle::to_double() const {
  return num_.convert_to<double>() / den_.convert_to<double>();
}

std::string Angle::str() const { return num_.str() + "/" + den_.str(); }

bool Angle::strictly_periodic_under(const bigint& m) const {
  return gcd(den_, m) == 1;
}

AngleOrbit angle_orbit(const Angle& t, const bigint& m) {
  if (m < 2) throw precondition_error("orbit multiplier must be >= 2");
  // Brent: find the cycle length, then the cycle start.
  Angle tortoise = t;
  Angle hare = t.times(m);
  int power = 1, lam = 1;
  while (!(tortoise == hare)) {
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    hare = hare.times(m);
    ++lam;
  }
  Angle mu0 = t, mu1 = t;
  for (int i = 0; i < lam; ++i) mu1 = mu1.times(m);
  int mu = 0;
  while (!(mu0 == mu1)) {
    mu0 = mu0.times(m);
    mu1 = mu1.times(m);
    ++mu;
  }
  AngleOrbit out;
  out.preperiod = mu;
  out.period = lam;
  Angle cur = t;
  for (int i = 0; i < mu + lam; ++i) {
    out.orbit.push_back(cur);
    cur = cur.times(m);
  }
  return out;
}

bool in_open_arc(const Angle& t, const Angle& lo, const Angle& hi) {
  if (lo == hi) return false;
  if (lo < hi) return lo < t && t < hi;
  return lo < t || t < hi;  // arc wraps through 0
}

double arc_width(const Angle& lo, const Angle& hi) {
  double w = hi.to_double() - lo.to_double();
  if (w < 0) w += 1.0;
  return w;
}

}  // namespace critmax
