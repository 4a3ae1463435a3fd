#include "mdrf/risk.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <functional>

#include "mdrf/error.hpp"
#include "mdrf/series.hpp"

namespace mdrf {

namespace {

// Root of a decreasing f on [0, hi] with f(0) >= 0.
double decreasing_root(const std::function<double(double)>& f, double hi) {
  const double f0 = f(0.0);
  if (f0 <= 0.0) return 0.0;
  const double fh = f(hi);
  if (fh > 0.0) throw OutOfRange("quantile lies beyond the trust region", hi);
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, f0, fh, boost::math::tools::eps_tolerance<double>(52),
                                                  iters);
  return 0.5 * (a + b);
}

double search_limit(const PartialSumModel& model, const TiltOptions& opts, const std::function<double(double)>& f) {
  if (!model.innovation().gaussian()) return opts.t_max * model.scale() * (1.0 - 1e-9);
  double hi = 1.0;
  while (f(hi) > 0.0 && hi < 64.0) hi *= 2.0;
  return hi;
}

}  // namespace

RiskResult quantile(const PartialSumModel& model, double alpha, const TiltOptions& opts) {
  if (!(alpha > 1e-12 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (1e-12, 1)");
  RiskResult r;
  r.alpha = alpha;
  TailEstimate last;
  if (alpha <= 0.5) {
    const double la = std::log(alpha);
    auto f = [&](double x) { return tail_upper(model, x, TailForm::theorem_form, opts).log_value - la; };
    const double x = decreasing_root(f, search_limit(model, opts, f));
    last = tail_upper(model, x, TailForm::theorem_form, opts);
    r.x_alpha = x;
  } else {
    const double lb = std::log1p(-alpha);
    auto g = [&](double x) { return tail_lower(model, x, TailForm::theorem_form, opts).log_value - lb; };
    const double x = decreasing_root(g, search_limit(model, opts, g));
    last = tail_lower(model, x, TailForm::theorem_form, opts);
    r.x_alpha = -x;
  }
  r.Q = r.x_alpha * std::sqrt(model.B_n());
  r.error_scale = last.error_scale;
  r.regime = last.regime;
  return r;
}

RiskResult expected_shortfall(const PartialSumModel& model, double alpha, const TiltOptions& opts) {
  if (!(alpha > 1e-12 && alpha <= 0.5)) throw InvalidArgument("expected shortfall needs alpha in (1e-12, 1/2]");
  RiskResult r = quantile(model, alpha, opts);
  const bool bounded = !model.innovation().gaussian();
  const double ymax = bounded ? opts.t_max * model.scale() * (1.0 - 1e-9) : INFINITY;
  auto T = [&](double y) { return tail_upper(model, y, TailForm::theorem_form, opts).value; };

  double integral = 0.0;
  double error = 0.0;
  double a = r.x_alpha;
  double width = 1.0;
  for (int piece = 0; piece < 200; ++piece) {
    double b = a + width;
    const bool clipped = b >= ymax;
    if (clipped) b = ymax;
    double err = 0.0;
    integral += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(T, a, b, 12, 1e-11, &err);
    error += err;
    const double Tb = T(b);
    if (Tb < 1e-16 * integral) break;
    if (clipped) {
      // The tail decays at least like a normal tail beyond b, so int_b^inf T <= T(b) / b.
      const double rest = Tb / b;
      if (rest <= 1e-9 * integral) {
        integral += rest;
        error += rest;
        break;
      }
      const double partial = r.Q + std::sqrt(model.B_n()) / alpha * integral;
      throw NumericError("expected-shortfall integrand leaves the trust region before it becomes negligible "
                         "(partial result " + std::to_string(partial) + ")");
    }
    a = b;
    width *= 2.0;
  }
  const double s = std::sqrt(model.B_n()) / alpha;
  r.es = r.Q + s * integral;
  r.quadrature_error = s * error;
  return r;
}

TruncationComparison truncation_ratio(const PartialSumModel& full, const PartialSumModel& truncated, double x,
                                      const TiltOptions& opts) {
  if (full.window() != truncated.window() || full.dimension() != truncated.dimension())
    throw InvalidArgument("truncation comparison needs models on the same window");
  if (full.innovation().name() != truncated.innovation().name() ||
      full.innovation().params() != truncated.innovation().params())
    throw InvalidArgument("truncation comparison needs models with the same innovation");
  TruncationComparison c;
  const TailEstimate a = tail_upper(full, x, TailForm::theorem_form, opts);
  const TailEstimate b = tail_upper(truncated, x, TailForm::theorem_form, opts);
  c.ratio = std::exp(a.log_value - b.log_value);
  c.beta0_full = beta0_closed_form(full);
  c.beta0_truncated = beta0_closed_form(truncated);
  c.dominant = std::exp(x * x * x * (c.beta0_full - c.beta0_truncated) / full.scale());
  return c;
}

}  // namespace mdrf
