#pragma once

// Independent reference computations for the unit tests. Nothing here uses
// the library's quadrature tables.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

#include "curveflow/spectral_space.hpp"

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule on [0,1] with `intervals` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, std::size_t intervals = 20000) {
  const double h = 1.0 / static_cast<double>(intervals);
  double s = f(0.0) + f(1.0);
  for (std::size_t i = 1; i < intervals; ++i) {
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(static_cast<double>(i) * h);
  }
  return s * h / 3.0;
}

/// u(x) and u'(x) summed directly from the sine series.
inline double value(const curveflow::SpectralField& u, double x) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) s += u[k - 1] * std::sqrt(2.0) * std::sin(k * pi * x);
  return s;
}

inline double deriv(const curveflow::SpectralField& u, double x) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) {
    s += u[k - 1] * std::sqrt(2.0) * k * pi * std::cos(k * pi * x);
  }
  return s;
}

/// Golden-section maximization of f on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double* at = nullptr) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  const double x = 0.5 * (a + b);
  if (at) *at = x;
  return f(x);
}

}  // namespace oracle
