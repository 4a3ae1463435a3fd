#include "mdrf/series.hpp"

#include <cmath>

#include "mdrf/error.hpp"

namespace mdrf {

namespace {

void same_order(const TruncatedSeries& a, const TruncatedSeries& b) {
  if (a.order() != b.order()) throw InvalidArgument("series orders differ");
}

constexpr int kMaxSeriesOrder = 16;

void check_model_order(const PartialSumModel& model, int K) {
  if (K < 2) throw InvalidArgument("series order must be >= 2");
  if (K > kMaxSeriesOrder) throw InvalidArgument("series order above 16 is not supported");
  if (!(model.B_n() > 0.0)) throw InvalidArgument("B_n must be positive");
}

}  // namespace

TruncatedSeries::TruncatedSeries(int order) {
  if (order < 0) throw InvalidArgument("series order must be >= 0");
  c_.assign(static_cast<std::size_t>(order) + 1, 0.0);
}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) throw InvalidArgument("series needs at least one coefficient");
}

TruncatedSeries TruncatedSeries::identity(int order) {
  TruncatedSeries s(order);
  if (order >= 1) s[1] = 1.0;
  return s;
}

TruncatedSeries TruncatedSeries::constant(double c, int order) {
  TruncatedSeries s(order);
  s[0] = c;
  return s;
}

double TruncatedSeries::evaluate(double t) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * t + *it;
  return v;
}

TruncatedSeries TruncatedSeries::derivative() const {
  TruncatedSeries d(order());
  for (int k = 1; k <= order(); ++k) d[k - 1] = k * c_[static_cast<std::size_t>(k)];
  return d;
}

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b) {
  same_order(a, b);
  TruncatedSeries r(a.order());
  for (int k = 0; k <= a.order(); ++k) r[k] = a[k] + b[k];
  return r;
}

TruncatedSeries sub(const TruncatedSeries& a, const TruncatedSeries& b) {
  same_order(a, b);
  TruncatedSeries r(a.order());
  for (int k = 0; k <= a.order(); ++k) r[k] = a[k] - b[k];
  return r;
}

TruncatedSeries scale(const TruncatedSeries& a, double s) {
  TruncatedSeries r(a.order());
  for (int k = 0; k <= a.order(); ++k) r[k] = s * a[k];
  return r;
}

TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  same_order(a, b);
  const int K = a.order();
  TruncatedSeries r(K);
  for (int i = 0; i <= K; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; i + j <= K; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

TruncatedSeries reciprocal(const TruncatedSeries& a) {
  if (a[0] == 0.0) throw InvalidArgument("series reciprocal needs a nonzero constant term");
  const int K = a.order();
  TruncatedSeries r(K);
  r[0] = 1.0 / a[0];
  for (int k = 1; k <= K; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += a[j] * r[k - j];
    r[k] = -s / a[0];
  }
  return r;
}

TruncatedSeries compose(const TruncatedSeries& outer, const TruncatedSeries& inner) {
  same_order(outer, inner);
  if (inner[0] != 0.0) throw InvalidArgument("inner series of a composition must have zero constant term");
  const int K = outer.order();
  TruncatedSeries r = TruncatedSeries::constant(outer[K], K);
  for (int k = K - 1; k >= 0; --k) {
    r = mul(r, inner);
    r[0] += outer[k];
  }
  return r;
}

TruncatedSeries revert(const TruncatedSeries& f) {
  const int K = f.order();
  if (K < 1) throw InvalidArgument("reversion needs order >= 1");
  if (f[0] != 0.0) throw InvalidArgument("reversion needs a zero constant term");
  if (f[1] == 0.0) throw InvalidArgument("reversion needs a nonzero linear coefficient");
  // Newton on F(g) = f(g) - t; each pass doubles the number of correct terms.
  TruncatedSeries g(K);
  g[1] = 1.0 / f[1];
  const TruncatedSeries df = f.derivative();
  const TruncatedSeries id = TruncatedSeries::identity(K);
  for (int correct = 1; correct < K; correct *= 2) {
    const TruncatedSeries resid = sub(compose(f, g), id);
    const TruncatedSeries slope = compose(df, g);
    g = sub(g, mul(resid, reciprocal(slope)));
    g[0] = 0.0;
  }
  return g;
}

namespace {

TruncatedSeries inversion_series(const PartialSumModel& model, int K) {
  const double norm = model.H_n() * model.B_n();
  TruncatedSeries tz(K);
  double fact = 1.0;  // (k-1)!
  for (int k = 2; k <= K + 1; ++k) {
    fact *= (k - 1);
    tz[k - 1] = model.aggregate_cumulant(k) / (fact * norm);
  }
  return revert(tz);
}

}  // namespace

TruncatedSeries inversion_coefficients(const PartialSumModel& model, int K) {
  check_model_order(model, K);
  return inversion_series(model, K);
}

TruncatedSeries lambda_coefficients(const PartialSumModel& model, int K) {
  check_model_order(model, K);
  const int order = K + 3;
  const TruncatedSeries a = inversion_series(model, order);
  // E(t) = sum_k (k-1) Gamma_k / k! a(t)^k, the exponent z Mbar - Lambda(z).
  TruncatedSeries E(order);
  TruncatedSeries apow = a;
  double fact = 1.0;
  for (int k = 2; k <= order; ++k) {
    apow = mul(apow, a);
    fact *= k;
    const double c = (k - 1) * model.aggregate_cumulant(k) / fact;
    for (int i = 0; i <= order; ++i) E[i] += c * apow[i];
  }
  const double norm = model.H_n() * model.H_n() * model.B_n();
  TruncatedSeries beta(K);
  for (int k = 0; k <= K; ++k) beta[k] = -E[k + 3] / norm;
  return beta;
}

double beta0_closed_form(const PartialSumModel& model) {
  return model.H_n() * model.aggregate_cumulant(3) / (6.0 * model.B_n());
}

}  // namespace mdrf
