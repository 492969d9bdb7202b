#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

#include "critmax/errors.hpp"

namespace critmax {

using bigint = boost::multiprecision::cpp_int;

/// Exact rational angle modulo 1. Always stored reduced with
/// 0 <= num < den and gcd(num, den) = 1.
class Angle {
 public:
  Angle() : num_(0), den_(1) {}
  Angle(long long p, long long q) : Angle(bigint(p), bigint(q)) {}
  Angle(bigint p, bigint q);

  static std::optional<Angle> parse(const std::string& s);  // "p/q" or "p"

  const bigint& num() const { return num_; }
  const bigint& den() const { return den_; }

  Angle times(const bigint& m) const;      // m*t mod 1
  Angle plus(const Angle& o) const;
  Angle minus(const Angle& o) const;
  Angle negated() const;                   // -t mod 1
  /// Preimage branch under multiplication by m: (t + k)/m, exact.
  Angle preimage(const bigint& m, const bigint& k) const;

  bool operator==(const Angle& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Angle& o) const { return !(*this == o); }
  bool operator<(const Angle& o) const { return num_ * o.den_ < o.num_ * den_; }
  bool operator<=(const Angle& o) const { return num_ * o.den_ <= o.num_ * den_; }

  double to_double() const;
  std::string str() const;

  /// Strict periodicity under multiplication by m (no preperiod):
  /// equivalent to gcd(den, m) = 1.
  bool strictly_periodic_under(const bigint& m) const;

 private:
  bigint num_, den_;
};

struct AngleOrbit {
  std::vector<Angle> orbit;  // t, mt, m^2 t, ... up to preperiod + period - 1
  int preperiod;
  int period;
};

/// Exact forward orbit of t under multiplication by m with Brent cycle
/// detection on the exact rationals.
AngleOrbit angle_orbit(const Angle& t, const bigint& m);

/// Strict cyclic betweenness: is t inside the open arc from lo to hi,
/// travelling counterclockwise from lo?
bool in_open_arc(const Angle& t, const Angle& lo, const Angle& hi);

/// Arc length of the counterclockwise arc lo -> hi as a double in [0,1).
double arc_width(const Angle& lo, const Angle& hi);

}  // namespace critmax
