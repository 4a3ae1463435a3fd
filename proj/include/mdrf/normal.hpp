#pragma once

namespace mdrf {

double normal_pdf(double x);
double normal_cdf(double x);
/// 1 - Phi(x) without cancellation.
double normal_tail(double x);
double log_normal_tail(double x);

/// Mills ratio psi(x) = (1 - Phi(x)) / phi(x).
double mills_psi(double x);
double log_mills_psi(double x);

}  // namespace mdrf
