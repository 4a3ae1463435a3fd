// Randomized and exhaustive checks of the library invariants. Generators are
// seeded, so every run sees the same cases.
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "mdrf/error.hpp"
#include "mdrf/mc.hpp"
#include "mdrf/normal.hpp"
#include "mdrf/regress.hpp"
#include "mdrf/risk.hpp"
#include "mdrf/series.hpp"

using namespace mdrf;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  // Dyadic values keep window sums exact in floating point.
  double dyadic() { return integer(-64, 64) / 64.0; }

  TruncatedSeries series(int K, bool zero_constant) {
    TruncatedSeries s(K);
    for (int k = 0; k <= K; ++k) s[k] = uniform(-1, 1);
    if (zero_constant) s[0] = 0.0;
    if (std::abs(s[1]) < 0.1) s[1] = 0.5;
    return s;
  }

  CoefficientField explicit_field(int d) {
    const int m = integer(0, 4);
    std::map<Index, double> c;
    const int count = integer(1, 12);
    for (int k = 0; k < count; ++k) {
      Index i{integer(-m, m), d == 2 ? integer(-m, m) : 0, 0};
      c[i] = dyadic();
    }
    c[{0, 0, 0}] = 1.0 + integer(0, 8) / 8.0;
    double total = 0.0;
    for (const auto& [i, v] : c) total += v;
    // Fields with sum a_i = 0 are not short memory; shift the centre to keep them valid.
    if (std::abs(total) < 0.25) c[{0, 0, 0}] += 1.0;
    return CoefficientField::explicit_map(d, c);
  }

  InnovationModel innovation() {
    switch (integer(0, 4)) {
      case 0: return make_builtin("gaussian", {{"sigma", uniform(0.5, 2)}});
      case 1: return make_builtin("rademacher");
      case 2: return make_builtin("centered_bernoulli", {{"p", uniform(0.05, 0.95)}});
      case 3: return make_builtin("centered_uniform", {{"half_width", uniform(0.5, 2)}});
      default: return make_builtin("centered_poisson", {{"lambda", uniform(0.3, 4)}});
    }
  }
};

std::vector<InnovationModel> builtins() {
  return {make_builtin("gaussian"), make_builtin("rademacher"), make_builtin("centered_bernoulli", {{"p", 0.3}}),
          make_builtin("centered_uniform"), make_builtin("centered_poisson")};
}

std::vector<CoefficientField> shipped_fields() {
  LongMemorySpec lm;
  lm.alpha = 0.75;
  return {CoefficientField::iid(1), CoefficientField::short_memory(1), CoefficientField::farima({0.3, {}, {}}, 2000),
          CoefficientField::long_memory(1, lm, 2000)};
}

// Every builtin law under every shipped field at window n.
std::vector<PartialSumModel> shipped_models(int n) {
  std::vector<PartialSumModel> out;
  for (const auto& f : shipped_fields())
    for (const auto& e : builtins()) out.push_back(window_weights(f, e, n));
  return out;
}

std::map<Index, double> brute_weights(const CoefficientField& f, int n) {
  const int d = f.dimension();
  const int R = n + f.m_max();
  std::map<Index, double> out;
  const int jy = d == 2 ? R : 0, iy = d == 2 ? n : 0;
  for (int j0 = -R; j0 <= R; ++j0)
    for (int j1 = -jy; j1 <= jy; ++j1) {
      double s = 0.0;
      for (int i0 = -n; i0 <= n; ++i0)
        for (int i1 = -iy; i1 <= iy; ++i1) s += f.at({i0 - j0, i1 - j1, 0});
      if (s != 0.0) out[{j0, j1, 0}] = s;
    }
  return out;
}

}  // namespace

TEST_CASE("cumulant bound from the cramer constant") {
  for (const auto& m : builtins()) {
    CAPTURE(m.name());
    const double H = m.radius_H(), C = m.bound_C();
    for (int k = 2; k <= 8; ++k) CHECK(std::abs(m.cumulant(k)) <= std::tgamma(k + 1.0) * C / std::pow(H, k));
  }
}

TEST_CASE("cgf derivatives match finite differences") {
  for (const auto& m : builtins()) {
    CAPTURE(m.name());
    const double H = m.radius_H();
    for (int i = 0; i < 32; ++i) {
      const double z = -H / 2 + (i + 0.5) * H / 32;
      const double h = 1e-5 * std::max(1.0, std::abs(z));
      const double d1 = (m.cgf(z + h) - m.cgf(z - h)) / (2 * h);
      const double d2 = (m.cgf(z + h) - 2 * m.cgf(z) + m.cgf(z - h)) / (h * h);
      CHECK(m.cgf_d1(z) == doctest::Approx(d1).epsilon(1e-6).scale(1e-6));
      CHECK(m.cgf_d2(z) == doctest::Approx(d2).epsilon(1e-4));
      CHECK(m.cgf_d2(z) == doctest::Approx((m.cgf_d1(z + h) - m.cgf_d1(z - h)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("tilted draw moments") {
  std::uint64_t seed = 1;
  for (const auto& m : builtins()) {
    const double H = m.radius_H();
    for (double theta : {H / 4, -H / 4, 0.45 * H, -0.45 * H}) {
      CAPTURE(m.name());
      CAPTURE(theta);
      Rng rng(seed++);
      const int n = 1000000;
      long double s = 0, s2 = 0;
      for (int i = 0; i < n; ++i) {
        const double y = tilted_draw(m, theta, rng);
        s += y;
        s2 += y * y;
      }
      const double mean = static_cast<double>(s / n);
      const double var = static_cast<double>(s2 / n) - mean * mean;
      CHECK(std::abs(mean - m.cgf_d1(theta)) < 4 * std::sqrt(var / n));
      CHECK(var == doctest::Approx(m.cgf_d2(theta)).epsilon(0.05));
    }
  }
}

TEST_CASE("presets satisfy the cramer and moment conditions") {
  for (const auto& m : builtins()) {
    CAPTURE(m.name());
    CHECK(verify_cramer(m, 128).ok);
    CHECK(verify_moment_condition(m, 8));
  }
}

TEST_CASE("reversion is a two-sided inverse") {
  Gen g(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = g.integer(1, 10);
    const auto f = g.series(K, true);
    const auto r = revert(f);
    const auto left = compose(f, r);
    const auto right = compose(r, f);
    for (int k = 0; k <= K; ++k) {
      const double want = k == 1 ? 1.0 : 0.0;
      // Reverted coefficients grow like |1/f_1|^k, so scale the tolerance.
      const double tol = 1e-9 * std::pow(1.0 + 1.0 / std::abs(f[1]), 2 * k);
      CHECK(std::abs(left[k] - want) <= tol);
      CHECK(std::abs(right[k] - want) <= tol);
    }
  }
}

TEST_CASE("series identities on shipped models") {
  for (const auto& m : shipped_models(20)) {
    CAPTURE(m.innovation().name());
    const auto a = inversion_coefficients(m, 8);
    CHECK(a[1] == doctest::Approx(m.H_n()).epsilon(1e-12));
    const double g3 = m.aggregate_cumulant(3);
    CHECK(a[2] == doctest::Approx(-m.H_n() * m.H_n() / (2 * m.B_n()) * g3).epsilon(1e-10).scale(1e-300));
    const auto beta = lambda_coefficients(m, 8);
    for (double frac : {-0.1, -0.03, 0.01, 0.05, 0.1}) {
      const double t = frac * TiltOptions{}.t_max;
      const double x = t * m.scale();
      const auto s = solve_saddle_signed(m, x);
      CHECK(std::abs(s.lambda_t - beta.evaluate(t)) <= 1e-6);
    }
  }
}

TEST_CASE("window weights equal the brute force double sum") {
  Gen g(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = g.integer(1, 2);
    const auto f = g.explicit_field(d);
    const int n = g.integer(1, 6);
    const auto m = window_weights(f, make_builtin("gaussian"), n);
    std::map<Index, double> got;
    for (std::size_t k = 0; k < m.support_size(); ++k) got[m.sites()[k]] = m.weights()[k];
    CHECK(got == brute_weights(f, n));
  }
}

TEST_CASE("model scalars are consistent with the weight map") {
  Gen g(78);
  std::vector<PartialSumModel> models = shipped_models(15);
  for (int trial = 0; trial < 40; ++trial) models.push_back(window_weights(g.explicit_field(g.integer(1, 2)), g.innovation(), g.integer(1, 8)));
  for (const auto& m : models) {
    const auto& e = m.innovation();
    double B = 0, M = 0;
    for (double b : m.weights()) {
      B += b * b;
      M = std::max(M, std::abs(b));
    }
    B *= e.variance();
    CHECK(m.B_n() == doctest::Approx(B).epsilon(1e-12));
    CHECK(m.M_n() == doctest::Approx(M).epsilon(1e-12));
    const double H = e.radius_H();
    CHECK(m.C_n() == doctest::Approx(2 * e.bound_C() * B * m.H_n() * m.H_n() / (e.variance() * H * H)).epsilon(1e-12));
    CHECK(m.H_n() * m.M_n() <= H / 2 * (1 + 1e-15));
  }
}

TEST_CASE("long memory maxima sit inside the window") {
  LongMemorySpec s;
  for (auto [d, alpha] : {std::pair{1, 0.6}, {1, 0.75}, {1, 0.9}, {2, 1.2}, {2, 1.5}, {2, 1.8}}) {
    s.alpha = alpha;
    for (auto ang : {Angular::constant, Angular::first_cosine}) {
      s.b = ang;
      const auto f = CoefficientField::long_memory(d, s, d == 1 ? 3000 : 200);
      for (int n : {5, 20}) {
        const auto m = window_weights(f, make_builtin("gaussian"), n);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < m.support_size(); ++k)
          if (std::abs(m.weights()[k]) > std::abs(m.weights()[arg])) arg = k;
        for (int c = 0; c < d; ++c) CHECK(std::abs(m.sites()[arg][c]) <= n);
      }
    }
  }
}

TEST_CASE("saddle residual and bracket") {
  Gen g(5);
  int checked = 0, unreachable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = trial % 2 ? CoefficientField::short_memory(1) : g.explicit_field(g.integer(1, 2));
    const auto m = window_weights(f, g.innovation(), g.integer(1, 40));
    const double tmax = TiltOptions{}.t_max;
    const double x = g.uniform(0, 0.98 * tmax) * m.scale();
    TiltSolution s;
    try {
      s = solve_saddle(m, x);
    } catch (const OutOfRange&) {
      // Bounded laws cannot reach every x in the trust region; the tilt itself must then be near the radius.
      CHECK(aggregate_cgf(m, 0.999 * m.H_n()).d1 / std::sqrt(m.B_n()) < x);
      ++unreachable;
      continue;
    }
    CHECK(s.residual <= 1e-10 * std::max(1.0, x));
    CHECK(std::abs(aggregate_cgf(m, s.z).d1 / std::sqrt(m.B_n()) - x) <= 1e-10 * std::max(1.0, x));
    if (s.t <= 0.25 * tmax) CHECK(s.in_bracket);
    ++checked;
  }
  CHECK(checked + unreachable == 1000);
  CHECK(checked >= 500);
}

TEST_CASE("proof bounds on shipped models") {
  for (const auto& m : shipped_models(20)) {
    for (const auto& p : proof_bound_audit(m, 64)) {
      CHECK(p.mean_gap < p.mean_bound);
      CHECK(p.var_gap < p.var_bound);
    }
  }
}

TEST_CASE("lambda stays bounded in n") {
  for (const auto& e : builtins()) {
    for (const auto& f : {CoefficientField::iid(1), CoefficientField::short_memory(1)}) {
      double lo = INFINITY, hi = 0;
      for (int n : {100, 1000, 10000}) {
        const auto m = window_weights(f, e, n);
        double worst = 0;
        for (double frac = -0.1; frac <= 0.1001; frac += 0.02) {
          const double x = frac * TiltOptions{}.t_max * m.scale();
          worst = std::max(worst, std::abs(solve_saddle_signed(m, x).lambda_t));
        }
        lo = std::min(lo, worst);
        hi = std::max(hi, worst);
      }
      CAPTURE(e.name());
      if (hi > 0) CHECK(hi <= 2 * lo);
    }
  }
}

TEST_CASE("gaussian tails are exact for both forms") {
  for (const auto& f : shipped_fields()) {
    const auto m = window_weights(f, make_builtin("gaussian", {{"sigma", 1.3}}), 15);
    for (double x = 0; x <= 8.0001; x += 0.25) {
      CHECK(tail_upper(m, x, TailForm::theorem_form).value == doctest::Approx(normal_tail(x)).epsilon(1e-12));
      CHECK(tail_upper(m, x, TailForm::saddlepoint_form).value == doctest::Approx(normal_tail(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail forms agree for moderate x") {
  for (const auto& m : shipped_models(60)) {
    for (double frac : {0.01, 0.04, 0.07, 0.1}) {
      const double x = frac * m.scale();
      const auto a = tail_upper(m, x, TailForm::theorem_form);
      const auto b = tail_upper(m, x, TailForm::saddlepoint_form);
      const double r = a.value / b.value;
      CHECK(std::max(r, 1 / r) <= 1 + 5 * a.error_scale);
    }
  }
}

TEST_CASE("tail is decreasing") {
  for (const auto& m : shipped_models(30)) {
    const double top = 0.5 * TiltOptions{}.t_max * m.scale();
    double prev = 2.0;
    for (double x = 0; x <= top; x += top / 300) {
      const double v = tail_upper(m, x).value;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("quantile round trip") {
  for (const auto& m : shipped_models(200)) {
    for (double a : {0.1, 0.025, 0.01, 1e-4}) {
      CAPTURE(m.innovation().name());
      CAPTURE(a);
      const auto r = quantile(m, a);
      CHECK(tail_upper(m, r.x_alpha).value == doctest::Approx(a).epsilon(1e-10));
    }
  }
}

TEST_CASE("gaussian shortfall against a trapezoid oracle") {
  const auto m = window_weights(CoefficientField::short_memory(1), make_builtin("gaussian"), 40);
  for (double a : {0.2, 0.025, 1e-3}) {
    const auto r = expected_shortfall(m, a);
    // E[S | S > Q] / sqrt(B) = x_a + (1/a) int_{x_a}^inf (1 - Phi(u)) du, Simpson on [x_a, x_a + 40].
    const int nodes = 100000;
    const double lo = r.x_alpha, hi = r.x_alpha + 40.0, h = (hi - lo) / nodes;
    long double s = normal_tail(lo) + normal_tail(hi);
    for (int i = 1; i < nodes; ++i) s += (i % 2 ? 4 : 2) * static_cast<long double>(normal_tail(lo + i * h));
    const double want = r.x_alpha + static_cast<double>(s) * h / 3 / a;
    CHECK(r.es / std::sqrt(m.B_n()) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("risk measures are monotone in alpha") {
  for (const auto& m : shipped_models(500)) {
    const std::vector<double> alphas = {0.3, 0.1, 0.03, 0.01, 1e-3};
    double prev_x = -INFINITY, prev_es = -INFINITY;
    int evaluated = 0;
    for (double a : alphas) {
      RiskResult r;
      try {
        r = expected_shortfall(m, a);
      } catch (const Error&) {
        // Smaller alpha only moves further out, so the sweep ends at the trust region.
        break;
      }
      ++evaluated;
      CHECK(r.x_alpha > prev_x);
      CHECK(r.es > prev_es);
      CHECK(r.es >= r.Q);
      prev_x = r.x_alpha;
      prev_es = r.es;
    }
    CHECK(evaluated >= 3);
  }
}

TEST_CASE("regression weights sum to one and variance is continuous") {
  Gen g(31);
  for (Kernel k : {Kernel::epanechnikov, Kernel::gaussian}) {
    RegressionDesign d;
    d.n = 25;
    d.kernel = k;
    d.bandwidth = 0.15;
    d.field = CoefficientField::short_memory(1);
    d.innovation = make_builtin("centered_poisson");
    for (int i = 0; i < 100; ++i) {
      const auto w = weights_at(d, {g.uniform(0, 1)});
      long double s = 0;
      for (double v : w) s += v;
      CHECK(std::abs(static_cast<double>(s) - 1) < 1e-12);
    }
    if (k == Kernel::gaussian) {
      double prev = effective_model(d, {0.0}).B_n();
      double prev_step = -1;
      for (int i = 1; i <= 100; ++i) {
        const double B = effective_model(d, {i / 100.0}).B_n();
        CHECK(B > 0);
        const double step = std::abs(B - prev);
        if (prev_step > 0) CHECK(step <= 3 * prev_step + 1e-3 * B);
        prev_step = step;
        prev = B;
      }
    }
  }
}

TEST_CASE("effective models keep the tilt invariants") {
  RegressionDesign d;
  d.n = 60;
  d.bandwidth = 0.2;
  d.field = CoefficientField::farima({0.3, {}, {}}, 300);
  d.innovation = make_builtin("centered_poisson");
  for (double z : {0.2, 0.5, 0.8}) {
    const auto m = effective_model(d, {z});
    for (const auto& p : proof_bound_audit(m, 64)) CHECK(p.ok);
    for (double frac : {0.05, 0.2, 0.5}) {
      const double x = frac * TiltOptions{}.t_max * m.scale();
      const auto s = solve_saddle(m, x);
      CHECK(s.residual <= 1e-10 * std::max(1.0, x));
    }
  }
}

TEST_CASE("importance sampling agrees with plain monte carlo on common events") {
  for (const auto& e : builtins()) {
    const auto m = window_weights(CoefficientField::short_memory(1), e, 15);
    const double s = 1.2815515655446004 * std::sqrt(m.B_n());
    const auto a = tilted_is(m, s, McOptions{200000, 3, 1});
    const auto b = plain_mc(m, s, McOptions{200000, 4, 1});
    CAPTURE(e.name());
    CHECK(std::abs(a.p_hat - b.p_hat) < 4 * std::hypot(a.std_err, b.std_err));
  }
}

TEST_CASE("importance sampling keeps its relative error in the far tail") {
  const auto m = window_weights(CoefficientField::iid(1), make_builtin("centered_poisson"), 2000);
  const double sB = std::sqrt(m.B_n());
  const auto common = tilted_is(m, 2.326 * sB, McOptions{100000, 9, 1});
  const auto rare = tilted_is(m, 4.75 * sB, McOptions{100000, 9, 1});
  CHECK(common.p_hat == doctest::Approx(1e-2).epsilon(0.15));
  CHECK(rare.p_hat < 3e-6);
  CHECK(rare.rel_std_err() < 50 * common.rel_std_err());
}

TEST_CASE("monte carlo output is a pure function of its inputs") {
  Gen g(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = window_weights(g.explicit_field(1), g.innovation(), g.integer(2, 10));
    const double s = g.uniform(0, 0.5 * TiltOptions{}.t_max) * m.scale() * std::sqrt(m.B_n());
    const std::uint64_t n = static_cast<std::uint64_t>(g.integer(5000, 40000));
    const auto base = tilted_is(m, s, McOptions{n, 42, 1});
    for (int t : {2, 3, 8}) {
      const auto other = tilted_is(m, s, McOptions{n, 42, t});
      CHECK(other.p_hat == base.p_hat);
      CHECK(other.std_err == base.std_err);
    }
  }
}
