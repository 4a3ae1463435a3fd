#include <doctest.h>

#include <cmath>

#include "mdrf/error.hpp"
#include "mdrf/mc.hpp"
#include "mdrf/normal.hpp"
#include "mdrf/series.hpp"
#include "mdrf/tilt.hpp"

using namespace mdrf;

namespace {

PartialSumModel iid(const char* name, int n, std::map<std::string, double> params = {}, int d = 1) {
  return window_weights(CoefficientField::iid(d), make_builtin(name, params), n);
}

}  // namespace

TEST_SUITE("tilt") {
  TEST_CASE("aggregate cgf") {
    const auto g = window_weights(CoefficientField::short_memory(1), make_builtin("gaussian"), 7);
    for (double z : {-0.3, 0.0, 0.2}) {
      const auto a = aggregate_cgf(g, z);
      CHECK(a.value == doctest::Approx(g.B_n() * z * z / 2).epsilon(1e-13).scale(1e-300));
      CHECK(a.d1 == doctest::Approx(g.B_n() * z).epsilon(1e-13).scale(1e-300));
      CHECK(a.d2 == doctest::Approx(g.B_n()).epsilon(1e-13));
    }
    const auto p = window_weights(CoefficientField::short_memory(2), make_builtin("centered_bernoulli", {{"p", 0.2}}), 3);
    const auto a0 = aggregate_cgf(p, 0.0);
    CHECK(a0.value == 0.0);
    CHECK(a0.d1 == 0.0);
    CHECK(a0.d2 == doctest::Approx(p.B_n()).epsilon(1e-13));

    const auto q = iid("centered_poisson", 2, {{"lambda", 1.0}});
    for (double z : {-0.4, 0.3, 0.8}) CHECK(aggregate_cgf(q, z).value == doctest::Approx(5 * (std::expm1(z) - z)).epsilon(1e-14));
    CHECK_THROWS_AS(aggregate_cgf(q, 1.5 * q.H_n()), OutOfRange);
  }

  TEST_CASE("gaussian saddle is closed form") {
    const auto g = window_weights(CoefficientField::short_memory(2), make_builtin("gaussian", {{"sigma", 1.5}}), 4);
    for (double x : {0.0, 0.5, 2.0, 5.0}) {
      const auto s = solve_saddle(g, x);
      CHECK(s.z == doctest::Approx(x / std::sqrt(g.B_n())).epsilon(1e-14).scale(1e-300));
      CHECK(s.exponent == doctest::Approx(x * x / 2).epsilon(1e-14).scale(1e-300));
      CHECK(s.lambda_t == 0.0);
    }
  }

  TEST_CASE("saddle at zero") {
    const auto m = window_weights(CoefficientField::short_memory(1), make_builtin("centered_poisson"), 9);
    const auto s = solve_saddle(m, 0.0);
    CHECK(s.z == 0.0);
    CHECK(s.exponent == 0.0);
    CHECK(s.lambda_t == doctest::Approx(beta0_closed_form(m)).epsilon(1e-14));
  }

  TEST_CASE("rademacher saddle") {
    const auto m = iid("rademacher", 4);  // N = 9, sqrt(B_n) = 3
    const auto s = solve_saddle(m, 1.0);
    CHECK(s.z == doctest::Approx(0.34657359027997265).epsilon(1e-13));
    CHECK(s.residual <= 1e-10);
    CHECK(s.in_bracket);
  }

  TEST_CASE("lambda series matches pointwise value for small t") {
    const auto m = window_weights(CoefficientField::short_memory(1), make_builtin("centered_bernoulli", {{"p", 0.25}}), 40);
    const auto beta = lambda_coefficients(m, 10);
    for (double t : {0.002, 0.01, 0.02}) {
      const double x = t * m.scale();
      CHECK(std::abs(solve_saddle(m, x).lambda_t - beta.evaluate(t)) < 1e-6);
    }
  }

  TEST_CASE("trust region") {
    const auto m = iid("centered_poisson", 20);
    TiltOptions o;
    o.t_max = 0.3;
    const double limit = o.t_max * m.scale();
    CHECK_NOTHROW(solve_saddle(m, 0.99 * limit, o));
    try {
      solve_saddle(m, 1.01 * limit, o);
      FAIL("expected OutOfRange");
    } catch (const OutOfRange& e) {
      CHECK(e.boundary() == doctest::Approx(limit));
    }
    CHECK_THROWS_AS(solve_saddle(m, -1.0), InvalidArgument);
    CHECK_NOTHROW(solve_saddle(iid("gaussian", 3), 40.0));
  }

  TEST_CASE("gaussian tails are exact") {
    const auto g = window_weights(CoefficientField::short_memory(1), make_builtin("gaussian"), 20);
    for (double x : {0.0, 0.5, 1.0, 3.0, 7.5}) {
      for (auto form : {TailForm::theorem_form, TailForm::saddlepoint_form}) {
        CHECK(tail_upper(g, x, form).value == doctest::Approx(normal_tail(x)).epsilon(1e-13));
        CHECK(tail_lower(g, x, form).value == doctest::Approx(normal_cdf(-x)).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("tail at zero is one half") {
    for (const char* name : {"centered_poisson", "rademacher", "centered_bernoulli"}) {
      const auto m = iid(name, 30);
      CHECK(tail_upper(m, 0.0).value == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(tail_lower(m, 0.0).value == doctest::Approx(0.5).epsilon(1e-15));
    }
  }

  TEST_CASE("symmetry and skew") {
    for (const char* name : {"rademacher", "centered_uniform"}) {
      const auto m = window_weights(CoefficientField::short_memory(1), make_builtin(name), 25);
      for (double x : {0.5, 1.5, 2.5}) {
        CHECK(tail_lower(m, x).value == doctest::Approx(tail_upper(m, x).value).epsilon(1e-12));
        CHECK(tail_leading_order(m, x).value == doctest::Approx(normal_tail(x)).epsilon(1e-14));
      }
    }
    const auto p = iid("centered_poisson", 200);
    CHECK(tail_lower(p, 2.0).value < tail_upper(p, 2.0).value);
    McOptions mo{400000, 3, 1};
    const double s = 2.0 * std::sqrt(p.B_n());
    const auto up = tilted_is(p, s, mo, TailSide::upper);
    const auto lo = tilted_is(p, -s, mo, TailSide::lower);
    CHECK(lo.p_hat + 4 * lo.std_err < up.p_hat - 4 * up.std_err);
  }

  TEST_CASE("leading order exponent") {
    for (int N : {101, 1001}) {
      const auto m = iid("centered_poisson", (N - 1) / 2);
      for (double x : {0.5, 1.0, 2.0}) {
        const double want = normal_tail(x) * std::exp(x * x * x / (6 * std::sqrt(static_cast<double>(N))));
        CHECK(tail_leading_order(m, x).value == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("leading order converges to the full approximation") {
    double prev = 1.0;
    for (int N : {101, 401, 1601}) {
      const auto m = iid("centered_poisson", (N - 1) / 2);
      const double full = tail_upper(m, 2.0).value;
      const double gap = std::abs(tail_leading_order(m, 2.0).value - full) / full;
      CHECK(gap < prev);
      prev = gap;
    }
  }

  TEST_CASE("poisson tail against importance sampling") {
    const auto m = iid("centered_poisson", 5000);
    const double x = 2.0;
    const auto est = tail_upper(m, x);
    const auto o = tilted_is(m, x * std::sqrt(m.B_n()), McOptions{1000000, 7, 1});
    const double tol = 1.5 * est.error_scale + 3 * o.rel_std_err();
    CHECK(std::abs(est.value / o.p_hat - 1) <= tol);
  }

  TEST_CASE("regime classification") {
    const auto m = iid("centered_poisson", 500);
    const double edge = 3 * std::cbrt(m.scale());
    CHECK(classify(m, 0.9 * edge) == Regime::cube_root_range);
    CHECK(classify(m, 1.1 * edge) == Regime::full_range);
    CHECK(tail_upper(m, 1.0).regime == Regime::cube_root_range);
    const auto e = tail_upper(m, 2.0);
    CHECK(e.error_scale == doctest::Approx(3.0 / m.scale()));
    CHECK(e.additive_bound == doctest::Approx(std::exp(-2.0) / m.scale()));
    CHECK(e.correction_factor == doctest::Approx(std::exp(8 * e.lambda_t / m.scale())));
  }

  TEST_CASE("interval ratio") {
    const double T10 = normal_tail(10.0);
    for (double c : {0.5, 1.0, 2.0}) {
      const double exact = (T10 - normal_tail(10.0 + c / 10.0)) / T10;
      CHECK(std::abs(exact - (1 - std::exp(-c))) < 0.06);
      const auto g = iid("gaussian", 10);
      CHECK(interval_ratio(g, 10.0, c) == doctest::Approx(exact).epsilon(1e-10));
    }
    const auto p = iid("centered_poisson", 2000);
    CHECK(interval_ratio(p, 3.0, 1e-6) < 1e-5);
    for (double x : {4.0, 8.0, 12.0}) {
      const double Hn = make_builtin("centered_poisson").radius_H() / 2;
      const int half = static_cast<int>(std::ceil(std::pow(x / (0.05 * Hn), 2) / 2));
      const auto q = iid("centered_poisson", half);
      CHECK(x / q.scale() <= 0.05);
      CHECK(std::abs(interval_ratio(q, x, 1.0) - (1 - std::exp(-1.0))) < 0.05);
    }
  }

  TEST_CASE("proof bounds") {
    for (const char* name : {"rademacher", "centered_uniform", "centered_poisson", "centered_bernoulli", "gaussian"}) {
      const auto m = window_weights(CoefficientField::short_memory(1), make_builtin(name), 30);
      const auto pts = proof_bound_audit(m, 64);
      REQUIRE(pts.size() == 64);
      for (const auto& p : pts) {
        CHECK(std::abs(p.z) < m.H_n() / 2);
        CHECK(p.ok);
        CHECK(p.mean_gap < p.mean_bound);
        CHECK(p.var_gap < p.var_bound);
      }
    }
  }
}
