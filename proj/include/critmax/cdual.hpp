#pragma once

#include <cmath>
#include <complex>

namespace critmax {

using cplx = std::complex<double>;

/// First-order complex jet: value plus derivative with respect to one
/// holomorphic parameter. Enough for Newton; no second-order terms.
struct cdual {
  cplx v{0.0, 0.0};
  cplx d{0.0, 0.0};

  cdual() = default;
  cdual(double x) : v(x), d(0.0) {}
  cdual(cplx x) : v(x), d(0.0) {}
  cdual(cplx x, cplx dx) : v(x), d(dx) {}

  static cdual variable(cplx x) { return cdual(x, cplx(1.0, 0.0)); }
};

inline cdual operator+(const cdual& a, const cdual& b) { return {a.v + b.v, a.d + b.d}; }
inline cdual operator-(const cdual& a, const cdual& b) { return {a.v - b.v, a.d - b.d}; }
inline cdual operator-(const cdual& a) { return {-a.v, -a.d}; }
inline cdual operator*(const cdual& a, const cdual& b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline cdual operator/(const cdual& a, const cdual& b) {
  cplx q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
inline cdual operator+(const cdual& a, cplx b) { return {a.v + b, a.d}; }
inline cdual operator+(cplx b, const cdual& a) { return {a.v + b, a.d}; }
inline cdual operator-(const cdual& a, cplx b) { return {a.v - b, a.d}; }
inline cdual operator-(cplx b, const cdual& a) { return {b - a.v, -a.d}; }
inline cdual operator*(const cdual& a, cplx b) { return {a.v * b, a.d * b}; }
inline cdual operator*(cplx b, const cdual& a) { return {a.v * b, a.d * b}; }
inline cdual operator/(const cdual& a, cplx b) { return {a.v / b, a.d / b}; }
inline cdual operator/(cplx b, const cdual& a) {
  cplx q = b / a.v;
  return {q, -q * a.d / a.v};
}
inline cdual operator*(const cdual& a, double b) { return {a.v * b, a.d * b}; }
inline cdual operator*(double b, const cdual& a) { return {a.v * b, a.d * b}; }
inline cdual operator/(const cdual& a, double b) { return {a.v / b, a.d / b}; }
inline cdual operator+(const cdual& a, double b) { return {a.v + b, a.d}; }
inline cdual operator+(double b, const cdual& a) { return {a.v + b, a.d}; }
inline cdual operator-(const cdual& a, double b) { return {a.v - b, a.d}; }
inline cdual operator-(double b, const cdual& a) { return {b - a.v, -a.d}; }
inline cdual operator/(double b, const cdual& a) {
  cplx q = b / a.v;
  return {q, -q * a.d / a.v};
}

inline cdual log(const cdual& a) { return {std::log(a.v), a.d / a.v}; }
inline cdual exp(const cdual& a) {
  cplx e = std::exp(a.v);
  return {e, e * a.d};
}
inline cdual sqrt(const cdual& a) {
  cplx s = std::sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}

/// Integer power by repeated multiplication (n >= 0).
inline cdual ipow(cdual x, int n) {
  cdual r(cplx(1.0, 0.0));
  while (n > 0) {
    if (n & 1) r = r * x;
    x = x * x;
    n >>= 1;
  }
  return r;
}
inline cplx ipow(cplx x, int n) {
  cplx r(1.0, 0.0);
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

inline double mag(const cplx& z) { return std::abs(z); }
inline double mag(const cdual& z) { return std::abs(z.v); }
inline cplx value_of(const cplx& z) { return z; }
inline cplx value_of(const cdual& z) { return z.v; }

}  // namespace critmax
