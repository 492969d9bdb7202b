#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace critmax {

struct error : std::runtime_error {
  explicit error(const std::string& m) : std::runtime_error(m) {}
};

/// A stated precondition does not hold (wrong domain, bad potential gap, ...).
struct precondition_error : error {
  double gap = 0.0;  // measured potential gap where meaningful
  explicit precondition_error(const std::string& m, double g = 0.0) : error(m), gap(g) {}
};

/// Iterative solve did not converge; carries the best iterate found.
struct newton_error : error {
  std::complex<double> best{0.0, 0.0};
  double residual = 0.0;
  newton_error(const std::string& m, std::complex<double> b, double r)
      : error(m), best(b), residual(r) {}
};

/// A certified answer is not possible (e.g. a path lift grazes the critical point).
struct undecidable_error : error {
  explicit undecidable_error(const std::string& m) : error(m) {}
};

}  // namespace critmax
