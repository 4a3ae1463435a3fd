#include "mdrf/normal.hpp"

#include <cmath>
#include <numbers>

namespace mdrf {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2 pi)

// psi(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
double mills_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double C = x;
  double D = 0.0;
  for (int k = 1; k < 500; ++k) {
    D = x + k * D;
    if (D == 0.0) D = tiny;
    C = x + k / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_normal_tail(double x) {
  if (x < 6.0) return std::log(normal_tail(x));
  return log_mills_psi(x) - 0.5 * x * x - kLogSqrt2Pi;
}

double mills_psi(double x) {
  if (x > 6.0) return mills_continued_fraction(x);
  // erfc(x/sqrt2)/2 * sqrt(2 pi) e^{x^2/2}
  return 0.5 * std::erfc(x / std::numbers::sqrt2) * std::exp(0.5 * x * x + kLogSqrt2Pi);
}

double log_mills_psi(double x) {
  if (x > 6.0) return std::log(mills_continued_fraction(x));
  if (x < -30.0) return 0.5 * x * x + kLogSqrt2Pi;  // 1 - Phi(x) rounds to 1
  return std::log(0.5 * std::erfc(x / std::numbers::sqrt2)) + 0.5 * x * x + kLogSqrt2Pi;
}

}  // namespace mdrf
