#pragma once

#include <string>
#include <vector>

#include "mdrf/field.hpp"

namespace mdrf {

struct TiltOptions {
  /// Largest admissible t = x / (H_n sqrt(B_n)). Gaussian sums ignore it.
  double t_max = 0.75;
  /// Below this |t| the correction lambda_n(t) comes from its power series.
  double small_t = 1e-4;
};

struct AggregateCgf {
  double value = 0.0;  // Lambda(z) = sum_j L(b_j z)
  double d1 = 0.0;     // Mbar(z)
  double d2 = 0.0;     // Bbar(z)
};

/// Requires |z| < H_n.
AggregateCgf aggregate_cgf(const PartialSumModel& model, double z);

struct TiltSolution {
  double x = 0.0;  // threshold in units of sqrt(B_n), signed: negative for the lower tail
  double t = 0.0;  // x / (H_n sqrt(B_n))
  double z = 0.0;
  double M_bar = 0.0;
  double B_bar = 0.0;
  double exponent = 0.0;  // z Mbar - Lambda(z)
  double lambda_t = 0.0;
  int newton_iters = 0;
  double residual = 0.0;  // |Mbar / sqrt(B_n) - x|
  bool in_bracket = true;  // |x| / (2 sqrt(B_n)) <= |z| <= 2 |x| / sqrt(B_n)
};

/// Saddle point of Mbar(z) = x sqrt(B_n), x >= 0.
TiltSolution solve_saddle(const PartialSumModel& model, double x, const TiltOptions& opts = {});
/// Signed variant: x < 0 solves for the lower tail with z < 0.
TiltSolution solve_saddle_signed(const PartialSumModel& model, double x, const TiltOptions& opts = {});

enum class Regime { full_range, cube_root_range, out_of_range };
enum class TailForm { theorem_form, saddlepoint_form };

std::string to_string(Regime r);
std::string to_string(TailForm f);

struct TailEstimate {
  double value = 0.0;
  double log_value = 0.0;
  double correction_factor = 1.0;  // exp{x^3 lambda_n(t) / (H_n sqrt(B_n))}
  double error_scale = 0.0;        // (x + 1) / (H_n sqrt(B_n))
  double additive_bound = 0.0;     // exp(-x^2/2) / (H_n sqrt(B_n))
  Regime regime = Regime::full_range;
  TailForm form = TailForm::theorem_form;
  double x = 0.0;
  double t = 0.0;
  double z = 0.0;
  double lambda_t = 0.0;
};

/// Approximation to P(S_n > x sqrt(B_n)).
TailEstimate tail_upper(const PartialSumModel& model, double x, TailForm form = TailForm::theorem_form,
                        const TiltOptions& opts = {});
/// Approximation to P(S_n < -x sqrt(B_n)).
TailEstimate tail_lower(const PartialSumModel& model, double x, TailForm form = TailForm::theorem_form,
                        const TiltOptions& opts = {});
/// (1 - Phi(x)) exp{x^3 Gamma_3 / (6 B_n^{3/2})}; flags x > 3 (H_n sqrt(B_n))^{1/3}.
TailEstimate tail_leading_order(const PartialSumModel& model, double x);

/// (T(x) - T(x + c/x)) / T(x) with T = tail_upper.
double interval_ratio(const PartialSumModel& model, double x, double c, const TiltOptions& opts = {});

Regime classify(const PartialSumModel& model, double x);

struct ProofBoundPoint {
  double z = 0.0;
  double mean_gap = 0.0;    // |Mbar - z B_n|
  double mean_bound = 0.0;  // 8 z^2 C_n / H_n^3
  double var_gap = 0.0;     // |Bbar - B_n|
  double var_bound = 0.0;   // 28 |z| C_n / H_n^3
  bool ok = false;
};

/// The two bounds on `points` evenly spaced z in (-H_n/2, H_n/2), z != 0.
std::vector<ProofBoundPoint> proof_bound_audit(const PartialSumModel& model, int points = 64);

}  // namespace mdrf
