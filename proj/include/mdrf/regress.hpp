#pragma once

#include <string>
#include <vector>

#include "mdrf/tilt.hpp"

namespace mdrf {

enum class Kernel { epanechnikov, gaussian };

std::string to_string(Kernel k);

/// Fixed-design kernel regression y_j = g(z_j) + X_j on the window [-n, n]^d,
/// with design points in [0, 1]^d and errors from a linear random field.
struct RegressionDesign {
  int n = 1;
  Kernel kernel = Kernel::epanechnikov;
  double bandwidth = 0.1;
  CoefficientField field = CoefficientField::iid(1);
  InnovationModel innovation = make_builtin("gaussian");
  /// Design point per site of [-n, n]^d in row-major order. Empty means the
  /// regular grid z_j = (j + n) / (2n + 1).
  std::vector<std::vector<double>> points;

  int dimension() const { return field.dimension(); }
  std::vector<double> point(std::size_t site) const;
  std::size_t site_count() const;
};

/// Product kernel evaluated at u in R^d.
double kernel_value(Kernel k, const std::vector<double>& u);

/// w_j(z) = K((z - z_j)/h) / sum_i K((z - z_i)/h), indexed like the design sites.
std::vector<double> weights_at(const RegressionDesign& design, const std::vector<double>& z);

/// b_j(z) = sum_i w_i(z) a_{i-j}.
PartialSumModel effective_model(const RegressionDesign& design, const std::vector<double>& z);

struct RegressionTail {
  TailEstimate upper;
  TailEstimate lower;
  double two_sided = 0.0;
  double B_n = 0.0;
  double M_n = 0.0;
  double H_n = 0.0;
  bool low_variance = false;  // B_n H_n^2 < 25
};

/// Tail of S_n(z) = g_n(z) - E g_n(z) at x sqrt(B_n(z)).
RegressionTail regression_tail(const RegressionDesign& design, const std::vector<double>& z, double x,
                               TailForm form = TailForm::theorem_form, const TiltOptions& opts = {});

/// Site index of the window [-n, n]^d in row-major order.
Index window_site(int d, int n, std::size_t k);

}  // namespace mdrf
