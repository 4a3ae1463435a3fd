#pragma once

#include "mdrf/tilt.hpp"

namespace mdrf {

struct RiskResult {
  double alpha = 0.0;
  double x_alpha = 0.0;  // standardised quantile
  double Q = 0.0;        // x_alpha sqrt(B_n)
  double es = 0.0;       // E(S_n | S_n >= Q); zero when not computed
  double quadrature_error = 0.0;
  double error_scale = 0.0;
  Regime regime = Regime::full_range;
};

/// Solves P(S_n >= Q) = alpha from the tail approximation. alpha > 1/2 uses
/// the lower-tail formula.
RiskResult quantile(const PartialSumModel& model, double alpha, const TiltOptions& opts = {});

/// Quantile plus Q + (sqrt(B_n)/alpha) int_{x_alpha}^inf T(y) dy, for alpha <= 1/2.
RiskResult expected_shortfall(const PartialSumModel& model, double alpha, const TiltOptions& opts = {});

struct TruncationComparison {
  double ratio = 1.0;     // tail_upper(full) / tail_upper(truncated)
  double dominant = 1.0;  // exp{x^3 (beta_0 - beta_0^m) / (H_n sqrt(B_n))}
  double beta0_full = 0.0;
  double beta0_truncated = 0.0;
};

TruncationComparison truncation_ratio(const PartialSumModel& full, const PartialSumModel& truncated, double x,
                                      const TiltOptions& opts = {});

}  // namespace mdrf
