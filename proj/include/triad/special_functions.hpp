#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace triad::special {

namespace detail {

// Continued fraction for I_x(a, b), evaluated with the modified Lentz method.
// Converges quickly for x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return h;
  }
  return h;
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0))
    throw std::invalid_argument("regularized_incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("regularized_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0)
    return 0.0;
  if (x == 1.0)
    return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
inline double f_distribution_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0))
    throw std::invalid_argument("f_distribution_sf: degrees of freedom must be positive");
  if (std::isnan(f))
    return std::numeric_limits<double>::quiet_NaN();
  if (f <= 0.0)
    return 1.0;
  if (std::isinf(f))
    return 0.0;
  // P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2)
  const double x = d2 / (d2 + d1 * f);
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

} // namespace triad::special
