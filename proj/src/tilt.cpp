#include "mdrf/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdrf/error.hpp"
#include "mdrf/normal.hpp"
#include "mdrf/series.hpp"

namespace mdrf {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Neumaier compensated accumulator.
struct Compensated {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

AggregateCgf aggregate_unchecked(const PartialSumModel& model, double z) {
  const InnovationModel& inn = model.innovation();
  if (inn.gaussian()) {
    const double B = model.B_n();
    return {0.5 * B * z * z, B * z, B};
  }
  Compensated v, d1, d2;
  for (const auto& [b, count] : model.groups()) {
    const double c = static_cast<double>(count);
    const double u = b * z;
    v.add(c * inn.cgf(u));
    d1.add(c * b * inn.cgf_d1(u));
    d2.add(c * b * b * inn.cgf_d2(u));
  }
  return {v.value(), d1.value(), d2.value()};
}

TailEstimate make_estimate(const PartialSumModel& model, const TiltSolution& s, TailForm form) {
  const double x = std::abs(s.x);
  TailEstimate e;
  e.form = form;
  e.x = x;
  e.t = s.t;
  e.z = s.z;
  e.lambda_t = s.lambda_t;
  e.error_scale = (x + 1.0) / model.scale();
  e.additive_bound = std::exp(-0.5 * x * x) / model.scale();
  e.regime = classify(model, x);
  const double log_corr = 0.5 * x * x - s.exponent;
  e.correction_factor = std::exp(log_corr);
  if (form == TailForm::theorem_form) {
    e.log_value = log_mills_psi(x) - kLogSqrt2Pi - s.exponent;
  } else {
    e.log_value = log_mills_psi(std::abs(s.z) * std::sqrt(s.B_bar)) - kLogSqrt2Pi - s.exponent;
  }
  e.log_value = std::min(e.log_value, 0.0);
  e.value = std::exp(e.log_value);
  return e;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::full_range: return "full_range";
    case Regime::cube_root_range: return "cube_root_range";
    case Regime::out_of_range: return "out_of_range";
  }
  return "unknown";
}

std::string to_string(TailForm f) { return f == TailForm::theorem_form ? "theorem_form" : "saddlepoint_form"; }

AggregateCgf aggregate_cgf(const PartialSumModel& model, double z) {
  if (!(std::abs(z) < model.H_n())) throw OutOfRange("aggregate CGF needs |z| < H_n", model.H_n());
  return aggregate_unchecked(model, z);
}

Regime classify(const PartialSumModel& model, double x) {
  return std::abs(x) <= 3.0 * std::cbrt(model.scale()) ? Regime::cube_root_range : Regime::full_range;
}

TiltSolution solve_saddle(const PartialSumModel& model, double x, const TiltOptions& opts) {
  if (!(x >= 0.0)) throw InvalidArgument("solve_saddle needs x >= 0");
  return solve_saddle_signed(model, x, opts);
}

TiltSolution solve_saddle_signed(const PartialSumModel& model, double x, const TiltOptions& opts) {
  if (!std::isfinite(x)) throw InvalidArgument("threshold must be finite");
  const double B = model.B_n();
  const double sqrtB = std::sqrt(B);
  const double scale = model.scale();
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;

  TiltSolution s;
  s.x = x;
  s.t = x / scale;
  s.B_bar = B;

  if (model.innovation().gaussian()) {
    s.z = x / sqrtB;
    s.M_bar = x * sqrtB;
    s.exponent = 0.5 * x * x;
    return s;
  }

  if (!(std::abs(s.t) < opts.t_max))
    throw OutOfRange("|x|=" + std::to_string(ax) + " is outside the trust region t < " + std::to_string(opts.t_max) +
                         " (|x| < " + std::to_string(opts.t_max * scale) + ")",
                     opts.t_max * scale);
  if (x == 0.0) {
    s.lambda_t = beta0_closed_form(model);
    return s;
  }

  const double target = ax * sqrtB;  // solve sign * Mbar(sign * u) = target for u > 0
  const double H = model.H_n();
  const double umax = H * (1.0 - 1e-6);
  auto mbar = [&](double u) { return sign * aggregate_unchecked(model, sign * u).d1; };
  if (mbar(umax) < target)
    throw OutOfRange("threshold is beyond the reach of the tilt domain |z| < H_n", mbar(umax) / sqrtB);

  double lo = 0.0, hi = umax;
  double u = ax / sqrtB;
  if (u >= hi) u = 0.5 * hi;
  const double tol = 1e-13 * std::max(1.0, ax) * sqrtB;
  AggregateCgf g{};
  int iters = 0;
  for (; iters < 200; ++iters) {
    g = aggregate_unchecked(model, sign * u);
    const double f = sign * g.d1 - target;
    if (std::abs(f) <= tol) break;
    if (f < 0.0)
      lo = u;
    else
      hi = u;
    double step = f / g.d2;
    step = std::clamp(step, -0.4 * H, 0.4 * H);
    double next = u - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == u || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      u = next;
      g = aggregate_unchecked(model, sign * u);
      break;
    }
    u = next;
  }
  s.z = sign * u;
  s.M_bar = g.d1;
  s.B_bar = g.d2;
  s.newton_iters = iters;
  s.residual = std::abs(g.d1 / sqrtB - x);
  if (!(s.residual <= 1e-10 * std::max(1.0, ax))) throw NumericError("saddle point solver did not converge");
  // Legendre form: stationary in z, so the solver error enters only at second order.
  s.exponent = s.z * x * sqrtB - g.value;
  s.in_bracket = ax / (2.0 * sqrtB) <= u && u <= 2.0 * ax / sqrtB;
  if (std::abs(s.t) < opts.small_t) {
    s.lambda_t = lambda_coefficients(model, 2).evaluate(s.t);
  } else {
    s.lambda_t = (0.5 * x * x - s.exponent) * scale / (x * x * x);
  }
  return s;
}

TailEstimate tail_upper(const PartialSumModel& model, double x, TailForm form, const TiltOptions& opts) {
  if (!(x >= 0.0)) throw InvalidArgument("tail_upper needs x >= 0");
  return make_estimate(model, solve_saddle_signed(model, x, opts), form);
}

TailEstimate tail_lower(const PartialSumModel& model, double x, TailForm form, const TiltOptions& opts) {
  if (!(x >= 0.0)) throw InvalidArgument("tail_lower needs x >= 0");
  return make_estimate(model, solve_saddle_signed(model, -x, opts), form);
}

TailEstimate tail_leading_order(const PartialSumModel& model, double x) {
  if (!(x >= 0.0)) throw InvalidArgument("tail_leading_order needs x >= 0");
  const double B = model.B_n();
  TailEstimate e;
  e.x = x;
  e.t = x / model.scale();
  e.error_scale = (x + 1.0) / model.scale();
  e.additive_bound = std::exp(-0.5 * x * x) / model.scale();
  e.regime = classify(model, x);
  const double log_corr = x * x * x * model.aggregate_cumulant(3) / (6.0 * B * std::sqrt(B));
  e.correction_factor = std::exp(log_corr);
  e.lambda_t = beta0_closed_form(model);
  e.log_value = std::min(0.0, log_normal_tail(x) + log_corr);
  e.value = std::exp(e.log_value);
  return e;
}

double interval_ratio(const PartialSumModel& model, double x, double c, const TiltOptions& opts) {
  if (!(x > 0.0) || !(c > 0.0)) throw InvalidArgument("interval_ratio needs x > 0 and c > 0");
  const TailEstimate a = tail_upper(model, x, TailForm::theorem_form, opts);
  const TailEstimate b = tail_upper(model, x + c / x, TailForm::theorem_form, opts);
  return -std::expm1(b.log_value - a.log_value);
}

std::vector<ProofBoundPoint> proof_bound_audit(const PartialSumModel& model, int points) {
  if (points < 2) throw InvalidArgument("proof_bound_audit needs at least two points");
  const double H = model.H_n();
  const double B = model.B_n();
  const double k = model.C_n() / (H * H * H);
  std::vector<ProofBoundPoint> out;
  for (int i = 0; i < points; ++i) {
    const double z = -0.5 * H + (i + 0.5) * H / points;
    if (z == 0.0) continue;
    const AggregateCgf g = aggregate_cgf(model, z);
    ProofBoundPoint p;
    p.z = z;
    p.mean_gap = std::abs(g.d1 - z * B);
    p.mean_bound = 8.0 * z * z * k;
    p.var_gap = std::abs(g.d2 - B);
    p.var_bound = 28.0 * std::abs(z) * k;
    p.ok = p.mean_gap < p.mean_bound && p.var_gap < p.var_bound;
    out.push_back(p);
  }
  return out;
}

}  // namespace mdrf
