#pragma once

#include <vector>

#include "mdrf/field.hpp"

namespace mdrf {

/// Power series c_0 + c_1 t + ... + c_K t^K. Products and compositions are
/// truncated at the common order K.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(int order);
  explicit TruncatedSeries(std::vector<double> coeffs);

  static TruncatedSeries identity(int order);
  static TruncatedSeries constant(double c, int order);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  double operator[](int k) const { return c_.at(static_cast<std::size_t>(k)); }
  double& operator[](int k) { return c_.at(static_cast<std::size_t>(k)); }

  double evaluate(double t) const;
  TruncatedSeries derivative() const;

 private:
  std::vector<double> c_;
};

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries sub(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries scale(const TruncatedSeries& a, double s);
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b);
/// 1/a; needs a_0 != 0.
TruncatedSeries reciprocal(const TruncatedSeries& a);
/// outer(inner(t)); needs inner_0 == 0.
TruncatedSeries compose(const TruncatedSeries& outer, const TruncatedSeries& inner);
/// g with f(g(t)) = t; needs f_0 == 0 and f_1 != 0.
TruncatedSeries revert(const TruncatedSeries& f);

/// Coefficients a_1..a_K of z = sum_m a_m t^m, the inverse of
/// t(z) = sum_{k>=2} Gamma_k z^{k-1} / ((k-1)! H_n B_n).
TruncatedSeries inversion_coefficients(const PartialSumModel& model, int K);

/// beta_0..beta_K of lambda_n(t) = sum_k beta_k t^k.
TruncatedSeries lambda_coefficients(const PartialSumModel& model, int K);

/// H_n Gamma_3 / (6 B_n).
double beta0_closed_form(const PartialSumModel& model);

}  // namespace mdrf
