#include "mdrf/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdrf/error.hpp"

namespace mdrf {

std::string to_string(Kernel k) { return k == Kernel::epanechnikov ? "epanechnikov" : "gaussian"; }

Index window_site(int d, int n, std::size_t k) {
  const std::size_t w = static_cast<std::size_t>(2 * n + 1);
  Index j{};
  for (int c = d - 1; c >= 0; --c) {
    j[c] = static_cast<int>(k % w) - n;
    k /= w;
  }
  return j;
}

std::size_t RegressionDesign::site_count() const {
  std::size_t count = 1;
  for (int c = 0; c < dimension(); ++c) count *= static_cast<std::size_t>(2 * n + 1);
  return count;
}

std::vector<double> RegressionDesign::point(std::size_t site) const {
  if (!points.empty()) return points.at(site);
  const Index j = window_site(dimension(), n, site);
  std::vector<double> p(static_cast<std::size_t>(dimension()));
  for (int c = 0; c < dimension(); ++c) p[c] = static_cast<double>(j[c] + n) / (2.0 * n + 1.0);
  return p;
}

double kernel_value(Kernel k, const std::vector<double>& u) {
  double v = 1.0;
  for (double x : u) {
    if (k == Kernel::epanechnikov) {
      if (std::abs(x) >= 1.0) return 0.0;
      v *= 0.75 * (1.0 - x * x);
    } else {
      v *= std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    }
  }
  return v;
}

std::vector<double> weights_at(const RegressionDesign& design, const std::vector<double>& z) {
  const int d = design.dimension();
  if (static_cast<int>(z.size()) != d) throw InvalidArgument("query point dimension differs from the design");
  if (!(design.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (design.n < 1) throw InvalidArgument("window size n must be >= 1");
  const std::size_t count = design.site_count();
  if (!design.points.empty() && design.points.size() != count)
    throw InvalidArgument("design must list one point per window site");
  std::vector<double> w(count);
  long double total = 0.0L;
  std::vector<double> u(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < count; ++k) {
    const std::vector<double> p = design.point(k);
    for (int c = 0; c < d; ++c) u[c] = (z[c] - p[c]) / design.bandwidth;
    w[k] = kernel_value(design.kernel, u);
    total += w[k];
  }
  if (!(total > 0.0L)) throw InvalidArgument("kernel weights vanish at the query point");
  for (double& v : w) v = static_cast<double>(v / total);
  return w;
}

PartialSumModel effective_model(const RegressionDesign& design, const std::vector<double>& z) {
  const std::vector<double> w = weights_at(design, z);
  const int d = design.dimension();
  const int n = design.n;
  const int m = design.field.m_max();
  const int R = n + m;
  const std::size_t W = static_cast<std::size_t>(2 * R + 1);
  const std::size_t aw = static_cast<std::size_t>(2 * m + 1);

  std::vector<std::pair<Index, double>> coeffs;
  const std::vector<double>& a = design.field.dense();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) continue;
    Index i{};
    std::size_t rem = k;
    for (int c = d - 1; c >= 0; --c) {
      i[c] = static_cast<int>(rem % aw) - m;
      rem /= aw;
    }
    coeffs.emplace_back(i, a[k]);
  }

  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= W;
  std::vector<double> b(total, 0.0);
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (w[s] == 0.0) continue;
    const Index i = window_site(d, n, s);
    for (const auto& [k, v] : coeffs) {
      // j = i - k
      std::size_t off = 0;
      for (int c = 0; c < d; ++c) off = off * W + static_cast<std::size_t>(i[c] - k[c] + R);
      b[off] += w[s] * v;
    }
  }
  std::vector<Index> sites;
  std::vector<double> vals;
  for (std::size_t off = 0; off < total; ++off) {
    if (b[off] == 0.0) continue;
    Index j{};
    std::size_t rem = off;
    for (int c = d - 1; c >= 0; --c) {
      j[c] = static_cast<int>(rem % W) - R;
      rem /= W;
    }
    sites.push_back(j);
    vals.push_back(b[off]);
  }
  return PartialSumModel(design.innovation, d, n, std::move(sites), std::move(vals));
}

RegressionTail regression_tail(const RegressionDesign& design, const std::vector<double>& z, double x, TailForm form,
                               const TiltOptions& opts) {
  const PartialSumModel model = effective_model(design, z);
  if (!(model.B_n() > 0.0)) throw InvalidArgument("degenerate variance B_n(z) = 0");
  RegressionTail r;
  r.B_n = model.B_n();
  r.M_n = model.M_n();
  r.H_n = model.H_n();
  r.low_variance = r.B_n * r.H_n * r.H_n < 25.0;
  r.upper = tail_upper(model, x, form, opts);
  r.lower = tail_lower(model, x, form, opts);
  r.two_sided = std::min(1.0, r.upper.value + r.lower.value);
  return r;
}

}  // namespace mdrf
