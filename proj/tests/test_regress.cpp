#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mdrf/error.hpp"
#include "mdrf/mc.hpp"
#include "mdrf/normal.hpp"
#include "mdrf/regress.hpp"

using namespace mdrf;

namespace {

RegressionDesign design(int n, Kernel k, double h, CoefficientField f, InnovationModel e) {
  RegressionDesign d;
  d.n = n;
  d.kernel = k;
  d.bandwidth = h;
  d.field = std::move(f);
  d.innovation = std::move(e);
  return d;
}

}  // namespace

TEST_SUITE("regress") {
  TEST_CASE("weights are normalized") {
    for (Kernel k : {Kernel::epanechnikov, Kernel::gaussian}) {
      const auto d = design(20, k, 0.1, CoefficientField::iid(1), make_builtin("gaussian"));
      const auto w = weights_at(d, {0.37});
      long double s = 0.0L;
      for (double v : w) s += v;
      CHECK(std::abs(static_cast<double>(s) - 1.0) < 1e-12);
      for (double v : w) CHECK(v >= 0.0);
    }
  }

  TEST_CASE("single design point") {
    auto d = design(0, Kernel::gaussian, 0.3, CoefficientField::iid(1), make_builtin("gaussian"));
    d.n = 1;
    d.points = {{0.9}, {0.1}, {0.5}};
    const auto w = weights_at(d, {0.5});
    CHECK(w.size() == 3);
    auto one = design(1, Kernel::epanechnikov, 0.05, CoefficientField::iid(1), make_builtin("gaussian"));
    const auto w1 = weights_at(one, one.point(1));
    CHECK(w1[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w1[0] == 0.0);
    CHECK(w1[2] == 0.0);
  }

  TEST_CASE("gaussian kernel weights are symmetric about the centre") {
    const auto d = design(10, Kernel::gaussian, 0.2, CoefficientField::iid(1), make_builtin("gaussian"));
    const auto w = weights_at(d, d.point(10));
    for (int k = 0; k < 10; ++k) CHECK(w[k] == doctest::Approx(w[20 - k]).epsilon(1e-13));
    const auto d2 = design(4, Kernel::gaussian, 0.3, CoefficientField::iid(2), make_builtin("gaussian"));
    const std::size_t N = d2.site_count();
    const auto w2 = weights_at(d2, d2.point((N - 1) / 2));
    for (std::size_t k = 0; k < N; ++k) CHECK(w2[k] == doctest::Approx(w2[N - 1 - k]).epsilon(1e-13));
  }

  TEST_CASE("effective weights") {
    auto one = design(3, Kernel::epanechnikov, 0.01, CoefficientField::iid(1), make_builtin("gaussian", {{"sigma", 2.0}}));
    const auto m = effective_model(one, one.point(2));
    REQUIRE(m.support_size() == 1);
    CHECK(m.weights()[0] == doctest::Approx(1.0));
    CHECK(m.B_n() == doctest::Approx(4.0));

    auto flat = design(5, Kernel::gaussian, 1e6, CoefficientField::iid(1), make_builtin("gaussian"));
    const auto mf = effective_model(flat, {0.5});
    CHECK(mf.B_n() == doctest::Approx(1.0 / 11).epsilon(1e-9));
  }

  TEST_CASE("effective weights match a direct double sum") {
    auto d = design(6, Kernel::epanechnikov, 0.35, CoefficientField::short_memory(1, 5), make_builtin("gaussian"));
    std::uint64_t state = 99;
    auto next = [&] {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    for (std::size_t k = 0; k < d.site_count(); ++k) d.points.push_back({next()});
    const std::vector<double> z = {0.45};
    const auto w = weights_at(d, z);
    const auto m = effective_model(d, z);
    std::map<int, double> want;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int ii = window_site(1, 6, i)[0];
      for (int j = -20; j <= 20; ++j) {
        const double a = d.field.at({ii - j, 0, 0});
        if (a != 0.0) want[j] += w[i] * a;
      }
    }
    REQUIRE(m.support_size() <= want.size());
    for (std::size_t k = 0; k < m.support_size(); ++k)
      CHECK(m.weights()[k] == doctest::Approx(want.at(m.sites()[k][0])).epsilon(1e-13));
  }

  TEST_CASE("regression tails") {
    const auto d = design(30, Kernel::epanechnikov, 0.2, CoefficientField::short_memory(1), make_builtin("gaussian"));
    for (double x : {0.5, 1.5, 3.0}) {
      const auto r = regression_tail(d, {0.5}, x);
      CHECK(r.upper.value == doctest::Approx(normal_tail(x)).epsilon(1e-10));
      CHECK(r.lower.value == doctest::Approx(normal_tail(x)).epsilon(1e-10));
      CHECK(r.two_sided == doctest::Approx(2 * normal_tail(x)).epsilon(1e-10));
    }

    // Equal weights with iid errors reduce to the standardized mean.
    const auto flat = design(200, Kernel::gaussian, 1e8, CoefficientField::iid(1), make_builtin("centered_poisson"));
    const auto mean_model = window_weights(CoefficientField::iid(1), make_builtin("centered_poisson"), 200);
    const auto r = regression_tail(flat, {0.5}, 2.0);
    CHECK(r.upper.value == doctest::Approx(tail_upper(mean_model, 2.0).value).epsilon(1e-8));
    CHECK(r.B_n == doctest::Approx(1.0 / 401).epsilon(1e-8));
  }

  TEST_CASE("poisson errors with a farima field") {
    const auto d = design(200, Kernel::epanechnikov, 0.25, CoefficientField::farima({0.3, {}, {}}, 400),
                          make_builtin("centered_poisson"));
    const std::vector<double> z = {0.5};
    const double x = 2.0;
    const auto r = regression_tail(d, z, x);
    CHECK_FALSE(r.low_variance);
    const auto m = effective_model(d, z);
    const auto o = tilted_is(m, x * std::sqrt(m.B_n()), McOptions{50000, 21, 1});
    const double tol = 1.5 * r.upper.error_scale + 3 * o.rel_std_err();
    CHECK(std::abs(r.upper.value / o.p_hat - 1) <= tol);
  }

  TEST_CASE("low variance flag and argument checks") {
    const auto d = design(3, Kernel::epanechnikov, 0.2, CoefficientField::iid(1), make_builtin("centered_poisson"));
    CHECK(regression_tail(d, {0.5}, 0.5).low_variance);
    CHECK_THROWS_AS(weights_at(d, {0.5, 0.5}), InvalidArgument);
    auto bad = d;
    bad.bandwidth = 0.0;
    CHECK_THROWS_AS(weights_at(bad, {0.5}), InvalidArgument);
    auto far = d;
    far.bandwidth = 0.01;
    CHECK_THROWS(weights_at(far, {5.0}));
  }
}
