#include "mdrf/cgf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "mdrf/error.hpp"

namespace mdrf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTableOrder = 30;

// B_{2n} for n = 1..15.
constexpr std::array<double, 15> kBernoulliEven = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

constexpr std::array<double, 41> kFactorials = [] {
  std::array<double, 41> f{};
  f[0] = 1.0;
  for (int k = 1; k <= 40; ++k) f[k] = f[k - 1] * k;
  return f;
}();

double factorial(int k) {
  return k <= 40 ? kFactorials[static_cast<std::size_t>(k)] : std::tgamma(static_cast<double>(k) + 1.0);
}

double check_cumulant_order(int k) {
  if (k < 1) throw InvalidArgument("cumulant order must be >= 1");
  if (k > kTableOrder) throw InvalidArgument("cumulant order above " + std::to_string(kTableOrder) + " is not tabulated");
  return 0.0;
}

// Cumulants from the central moments of a finitely supported law, by the
// moment-cumulant recursion in extended precision.
std::array<double, kTableOrder + 1> cumulants_from_atoms(const std::vector<std::pair<double, double>>& atoms) {
  std::array<long double, kTableOrder + 1> mu{};
  for (int n = 0; n <= kTableOrder; ++n) {
    long double s = 0.0L;
    for (auto [v, p] : atoms) s += static_cast<long double>(p) * std::pow(static_cast<long double>(v), n);
    mu[n] = s;
  }
  std::array<long double, kTableOrder + 1> kappa{};
  std::array<std::array<long double, kTableOrder + 1>, kTableOrder + 1> binom{};
  for (int n = 0; n <= kTableOrder; ++n) {
    binom[n][0] = binom[n][n] = 1.0L;
    for (int k = 1; k < n; ++k) binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
  }
  for (int n = 1; n <= kTableOrder; ++n) {
    long double s = mu[n];
    for (int k = 1; k < n; ++k) s -= binom[n - 1][k - 1] * kappa[k] * mu[n - k];
    kappa[n] = s;
  }
  std::array<double, kTableOrder + 1> out{};
  for (int n = 1; n <= kTableOrder; ++n) out[n] = static_cast<double>(kappa[n]);
  out[1] = 0.0;
  return out;
}

// Taylor evaluation of L, L', L'' from a cumulant table; used near the origin
// where the closed forms cancel.
double taylor(const std::array<double, kTableOrder + 1>& kappa, double z, int derivative) {
  double sum = 0.0;
  double zpow = 1.0;  // z^(k - derivative)
  for (int k = derivative; k <= kTableOrder; ++k) {
    if (k >= 2) sum += kappa[k] * zpow / factorial(k - derivative);
    zpow *= z;
  }
  return sum;
}

class Gaussian final : public InnovationLaw {
 public:
  explicit Gaussian(double sigma) : sigma_(sigma), var_(sigma * sigma) {}
  std::string name() const override { return "gaussian"; }
  std::map<std::string, double> params() const override { return {{"sigma", sigma_}}; }
  double cgf(double z) const override { return 0.5 * var_ * z * z; }
  double cgf_d1(double z) const override { return var_ * z; }
  double cgf_d2(double) const override { return var_; }
  std::complex<double> mgf(std::complex<double> z) const override { return std::exp(0.5 * var_ * z * z); }
  bool cgf_entire() const override { return true; }
  std::complex<double> cgf_complex(std::complex<double> z) const override { return 0.5 * var_ * z * z; }
  double cumulant(int k) const override {
    check_cumulant_order(k);
    return k == 2 ? var_ : 0.0;
  }
  double analytic_radius() const override { return std::numeric_limits<double>::infinity(); }
  double default_radius() const override { return 2.0; }
  int polynomial_degree() const override { return 2; }
  double tilted_draw(Rng& rng, double theta) const override {
    std::normal_distribution<double> n(var_ * theta, sigma_);
    return n(rng);
  }
  double tilted_sum(Rng& rng, double theta, std::uint64_t count) const override {
    const double c = static_cast<double>(count);
    std::normal_distribution<double> n(c * var_ * theta, sigma_ * std::sqrt(c));
    return n(rng);
  }

 private:
  double sigma_;
  double var_;
};

class CenteredPoisson final : public InnovationLaw {
 public:
  explicit CenteredPoisson(double lambda) : lambda_(lambda) {
    kappa_.fill(lambda);
    kappa_[0] = kappa_[1] = 0.0;
  }
  std::string name() const override { return "centered_poisson"; }
  std::map<std::string, double> params() const override { return {{"lambda", lambda_}}; }
  double cgf(double z) const override {
    if (std::abs(z) < 0.5) return taylor(kappa_, z, 0);
    return lambda_ * (std::expm1(z) - z);
  }
  double cgf_d1(double z) const override {
    if (std::abs(z) < 0.5) return taylor(kappa_, z, 1);
    return lambda_ * std::expm1(z);
  }
  double cgf_d2(double z) const override { return lambda_ * std::exp(z); }
  std::complex<double> mgf(std::complex<double> z) const override { return std::exp(cgf_complex(z)); }
  bool cgf_entire() const override { return true; }
  std::complex<double> cgf_complex(std::complex<double> z) const override {
    return lambda_ * (std::exp(z) - 1.0 - z);
  }
  double cumulant(int k) const override {
    check_cumulant_order(k);
    return k >= 2 ? lambda_ : 0.0;
  }
  double analytic_radius() const override { return std::numeric_limits<double>::infinity(); }
  double default_radius() const override { return 2.0; }
  double tilted_draw(Rng& rng, double theta) const override { return tilted_sum(rng, theta, 1); }
  double tilted_sum(Rng& rng, double theta, std::uint64_t count) const override {
    const double c = static_cast<double>(count);
    std::poisson_distribution<std::int64_t> p(c * lambda_ * std::exp(theta));
    return static_cast<double>(p(rng)) - c * lambda_;
  }
  double lattice_span() const override { return 1.0; }
  double lattice_origin() const override { return -lambda_; }

 private:
  double lambda_;
  std::array<double, kTableOrder + 1> kappa_{};
};

class Rademacher final : public InnovationLaw {
 public:
  std::string name() const override { return "rademacher"; }
  std::map<std::string, double> params() const override { return {}; }
  double cgf(double z) const override {
    const double a = std::abs(z);
    if (a < 1.0) {
      const double s = std::sinh(0.5 * a);
      return std::log1p(2.0 * s * s);
    }
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
  }
  double cgf_d1(double z) const override { return std::tanh(z); }
  double cgf_d2(double z) const override {
    const double c = std::cosh(z);
    return 1.0 / (c * c);
  }
  std::complex<double> mgf(std::complex<double> z) const override { return std::cosh(z); }
  double cumulant(int k) const override {
    check_cumulant_order(k);
    if (k % 2 == 1) return 0.0;
    const int n = k / 2;
    const double p = std::ldexp(1.0, k);
    return p * (p - 1.0) * kBernoulliEven[n - 1] / k;
  }
  double analytic_radius() const override { return kPi / 2.0; }
  double default_radius() const override { return 1.0; }
  double tilted_draw(Rng& rng, double theta) const override {
    const double up = 1.0 / (1.0 + std::exp(-2.0 * theta));
    return unit_uniform(rng) < up ? 1.0 : -1.0;
  }
  double tilted_sum(Rng& rng, double theta, std::uint64_t count) const override {
    if (count == 1) return tilted_draw(rng, theta);
    const double up = 1.0 / (1.0 + std::exp(-2.0 * theta));
    std::binomial_distribution<std::int64_t> b(static_cast<std::int64_t>(count), up);
    return 2.0 * static_cast<double>(b(rng)) - static_cast<double>(count);
  }
  double lattice_span() const override { return 2.0; }
  double lattice_origin() const override { return -1.0; }
  std::vector<std::pair<double, double>> atoms() const override { return {{-1.0, 0.5}, {1.0, 0.5}}; }
};

class CenteredBernoulli final : public InnovationLaw {
 public:
  explicit CenteredBernoulli(double p) : p_(p) { kappa_ = cumulants_from_atoms(atoms()); }
  std::string name() const override { return "centered_bernoulli"; }
  std::map<std::string, double> params() const override { return {{"p", p_}}; }
  double cgf(double z) const override {
    if (std::abs(z) < 0.5) return taylor(kappa_, z, 0);
    // log(1 - p + p e^z) - p z, arranged to avoid overflow for large |z|.
    if (z > 0) return (1.0 - p_) * z + std::log(p_ + (1.0 - p_) * std::exp(-z));
    return std::log1p(p_ * std::expm1(z)) - p_ * z;
  }
  double cgf_d1(double z) const override {
    if (std::abs(z) < 0.5) return taylor(kappa_, z, 1);
    return tilted_p(z) - p_;
  }
  double cgf_d2(double z) const override {
    if (std::abs(z) < 0.5) return taylor(kappa_, z, 2);
    const double q = tilted_p(z);
    return q * (1.0 - q);
  }
  std::complex<double> mgf(std::complex<double> z) const override {
    return (1.0 - p_ + p_ * std::exp(z)) * std::exp(-p_ * z);
  }
  double cumulant(int k) const override {
    check_cumulant_order(k);
    return kappa_[k];
  }
  double analytic_radius() const override {
    const double s = std::log((1.0 - p_) / p_);
    return std::sqrt(s * s + kPi * kPi);
  }
  double default_radius() const override { return std::min(2.0, 0.9 * analytic_radius()); }
  double tilted_draw(Rng& rng, double theta) const override {
    return (unit_uniform(rng) < tilted_p(theta) ? 1.0 : 0.0) - p_;
  }
  double tilted_sum(Rng& rng, double theta, std::uint64_t count) const override {
    if (count == 1) return tilted_draw(rng, theta);
    std::binomial_distribution<std::int64_t> b(static_cast<std::int64_t>(count), tilted_p(theta));
    return static_cast<double>(b(rng)) - static_cast<double>(count) * p_;
  }
  double lattice_span() const override { return 1.0; }
  double lattice_origin() const override { return -p_; }
  std::vector<std::pair<double, double>> atoms() const override { return {{-p_, 1.0 - p_}, {1.0 - p_, p_}}; }

 private:
  double tilted_p(double theta) const { return 1.0 / (1.0 + (1.0 - p_) / p_ * std::exp(-theta)); }

  double p_;
  std::array<double, kTableOrder + 1> kappa_{};
};

class CenteredUniform final : public InnovationLaw {
 public:
  explicit CenteredUniform(double half_width) : h_(half_width) {}
  std::string name() const override { return "centered_uniform"; }
  std::map<std::string, double> params() const override { return {{"half_width", h_}}; }

  double cgf(double z) const override {
    const double u = std::abs(h_ * z);
    if (u < 0.5) return series(u, 0);
    return u + std::log1p(-std::exp(-2.0 * u)) - std::numbers::ln2 - std::log(u);
  }
  double cgf_d1(double z) const override {
    const double u = h_ * z;
    const double a = std::abs(u);
    const double s = a < 0.5 ? series(a, 1) : 1.0 / std::tanh(a) - 1.0 / a;
    return h_ * std::copysign(s, u);
  }
  double cgf_d2(double z) const override {
    const double a = std::abs(h_ * z);
    if (a < 0.5) return h_ * h_ * series(a, 2);
    const double sh = std::sinh(a);
    return h_ * h_ * (1.0 / (a * a) - 1.0 / (sh * sh));
  }
  std::complex<double> mgf(std::complex<double> z) const override {
    const std::complex<double> u = h_ * z;
    if (std::abs(u) < 1e-4) return 1.0 + u * u / 6.0 + u * u * u * u / 120.0;
    return std::sinh(u) / u;
  }
  double cumulant(int k) const override {
    check_cumulant_order(k);
    if (k % 2 == 1) return 0.0;
    const int n = k / 2;
    return std::ldexp(1.0, k) * kBernoulliEven[n - 1] * std::pow(h_, k) / k;
  }
  double analytic_radius() const override { return kPi / h_; }
  double default_radius() const override { return std::min(2.0, 0.9 * kPi / h_); }
  double tilted_draw(Rng& rng, double theta) const override {
    const double u = unit_uniform(rng);
    const double a = std::abs(theta) * h_;
    if (a < 1e-300) return h_ * (2.0 * u - 1.0);
    // Inverse CDF of the density proportional to e^{|theta| y} on [-h, h].
    const double y = h_ + std::log1p((1.0 - u) * std::expm1(-2.0 * a)) / std::abs(theta);
    return theta >= 0 ? y : -y;
  }
  double tilted_sum(Rng& rng, double theta, std::uint64_t count) const override {
    const double a = std::abs(theta) * h_;
    double s = 0.0;
    if (a < 1e-300) {
      for (std::uint64_t i = 0; i < count; ++i) s += h_ * (2.0 * unit_uniform(rng) - 1.0);
      return s;
    }
    // Each draw is h + log(e2 + u (1 - e2)) / |theta| with the factor in
    // [e^{-2a}, 1]; blocks of factors share one log without underflow.
    const double e2 = std::exp(-2.0 * a);
    const double w = -std::expm1(-2.0 * a);
    const std::uint64_t block = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(600.0 / (2.0 * a)), 1, 16);
    double logs = 0.0;
    std::uint64_t i = 0;
    for (; i + block <= count; i += block) {
      double p = 1.0;
      for (std::uint64_t k = 0; k < block; ++k) p *= e2 + unit_uniform(rng) * w;
      logs += std::log(p);
    }
    double p = 1.0;
    for (; i < count; ++i) p *= e2 + unit_uniform(rng) * w;
    logs += std::log(p);
    s = static_cast<double>(count) * h_ + logs / std::abs(theta);
    return theta >= 0 ? s : -s;
  }

 private:
  // Series in u = h|z| < 0.5 for log(sinh u / u) and its first two
  // derivatives with respect to u, from the Bernoulli-number expansion.
  static double series(double u, int derivative) {
    double sum = 0.0;
    const double u2 = u * u;
    double upow = derivative == 0 ? u2 : derivative == 1 ? u : 1.0;  // u^(k - derivative)
    for (int n = 1; n <= static_cast<int>(kBernoulliEven.size()); ++n, upow *= u2) {
      const int k = 2 * n;
      const double c = std::ldexp(1.0, k) * kBernoulliEven[n - 1] / (k * factorial(k));
      double d = c;
      for (int j = 0; j < derivative; ++j) d *= (k - j);
      sum += d * upow;
    }
    return sum;
  }

  double h_;
};

double winding_number(const InnovationLaw& law, double radius, int points) {
  double total = 0.0;
  double prev = std::arg(law.mgf(std::complex<double>(radius, 0.0)));
  for (int i = 1; i <= points; ++i) {
    const double phi = 2.0 * kPi * i / points;
    const double a = std::arg(law.mgf(std::polar(radius, phi)));
    double d = a - prev;
    while (d > kPi) d -= 2.0 * kPi;
    while (d <= -kPi) d += 2.0 * kPi;
    total += d;
    prev = a;
  }
  return total / (2.0 * kPi);
}

}  // namespace

double InnovationLaw::tilted_sum(Rng& rng, double theta, std::uint64_t count) const {
  double s = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) s += tilted_draw(rng, theta);
  return s;
}

InnovationModel::InnovationModel(std::shared_ptr<const InnovationLaw> law, double radius_H, double bound_C)
    : law_(std::move(law)), radius_H_(radius_H), bound_C_(bound_C) {
  if (!law_) throw InvalidArgument("innovation law is null");
  if (!(radius_H > 0.0) || !std::isfinite(radius_H)) throw InvalidArgument("radius H must be positive and finite");
  if (!(bound_C > 0.0) || !std::isfinite(bound_C)) throw InvalidArgument("bound C must be positive and finite");
  variance_ = law_->cumulant(2);
  if (!(variance_ > 0.0)) throw InvalidArgument("innovation variance must be positive");
}

CumulantSeries InnovationModel::cumulants(int K) const {
  if (K < 1) throw InvalidArgument("cumulant series order must be >= 1");
  CumulantSeries s;
  s.coeffs.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) s.coeffs.push_back(cumulant(k));
  return s;
}

double InnovationModel::raw_moment(int m) const {
  if (m < 0 || m > 12) throw InvalidArgument("raw moments are available for orders 0..12");
  std::array<double, 13> mom{};
  mom[0] = 1.0;
  for (int n = 1; n <= m; ++n) {
    double s = 0.0;
    double binom = 1.0;  // C(n-1, k-1)
    for (int k = 1; k <= n; ++k) {
      s += binom * cumulant(k) * mom[n - k];
      binom = binom * (n - k) / k;
    }
    mom[n] = s;
  }
  return mom[m];
}

bool InnovationModel::symmetric() const {
  for (int k = 3; k <= 9; k += 2)
    if (cumulant(k) != 0.0) return false;
  return true;
}

CramerReport verify_cramer(const InnovationLaw& law, double radius_H, double bound_C, int grid_size) {
  if (grid_size < 64) throw InvalidArgument("verify_cramer needs grid_size >= 64");
  CramerReport rep;
  const double rmax = (1.0 - 1e-3) * radius_H;
  if (!law.cgf_entire()) {
    const double w = winding_number(law, rmax, 16 * grid_size);
    if (!std::isfinite(w)) {
      rep.evaluation_failed = true;
    } else {
      rep.zeros_inside = static_cast<int>(std::lround(w));
    }
  }
  for (int a = 0; a < grid_size && !rep.evaluation_failed; ++a) {
    const double phi = 2.0 * kPi * a / grid_size;
    double prev_arg = 0.0;
    for (int r = 1; r <= grid_size; ++r) {
      const std::complex<double> z = std::polar(rmax * r / grid_size, phi);
      std::complex<double> L;
      if (law.cgf_entire()) {
        L = law.cgf_complex(z);
      } else {
        const std::complex<double> m = law.mgf(z);
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag()) || std::abs(m) < 1e-300) {
          rep.evaluation_failed = true;
          break;
        }
        double d = std::arg(m) - prev_arg;
        d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
        prev_arg += d;
        L = {std::log(std::abs(m)), prev_arg};
      }
      const double v = std::abs(L);
      if (!std::isfinite(v)) {
        rep.evaluation_failed = true;
        break;
      }
      rep.max_abs_L = std::max(rep.max_abs_L, v);
    }
  }
  rep.ok = !rep.evaluation_failed && rep.zeros_inside == 0 && rep.max_abs_L <= bound_C;
  return rep;
}

CramerReport verify_cramer(const InnovationModel& model, int grid_size) {
  return verify_cramer(model.law(), model.radius_H(), model.bound_C(), grid_size);
}

bool verify_moment_condition(const InnovationModel& model, int max_order) {
  if (max_order < 2) throw InvalidArgument("verify_moment_condition needs max_order >= 2");
  if (max_order > 12) throw InvalidArgument("raw moments above order 12 are not supported");
  const double var = model.variance();
  const double H = model.radius_H();
  for (int m = 2; m <= max_order; ++m) {
    const double bound = factorial(m) / 2.0 * var * std::pow(H, 2 - m);
    if (std::abs(model.raw_moment(m)) > bound) return false;
  }
  return true;
}

double tilted_draw(const InnovationModel& model, double theta, Rng& rng) {
  if (!(std::abs(theta) < model.radius_H()))
    throw OutOfRange("tilt parameter must satisfy |theta| < H", model.radius_H());
  return model.law().tilted_draw(rng, theta);
}

namespace {

// Largest radius <= cap for which |E e^m| <= (m!/2) var H^(2-m) holds up to order 8.
double moment_radius(const InnovationLaw& law, double cap) {
  const InnovationModel probe(std::shared_ptr<const InnovationLaw>(&law, [](const InnovationLaw*) {}), cap, 1.0);
  double H = cap;
  for (int m = 3; m <= 8; ++m) {
    const double mu = std::abs(probe.raw_moment(m));
    if (mu == 0.0) continue;
    const double limit = std::pow(factorial(m) / 2.0 * probe.variance() / mu, 1.0 / (m - 2));
    if (limit < H) H = limit * (1.0 - 1e-9);
  }
  return H;
}

}  // namespace

InnovationModel make_builtin(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      bool known = k == "H" || k == "C";
      for (const char* a : keys) known = known || k == a;
      if (!known) throw InvalidArgument("unknown parameter '" + k + "' for innovation " + name);
    }
  };

  std::shared_ptr<const InnovationLaw> law;
  if (name == "gaussian") {
    allow({"sigma"});
    const double sigma = get("sigma", 1.0);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian sigma must be positive");
    law = std::make_shared<Gaussian>(sigma);
  } else if (name == "rademacher") {
    allow({});
    law = std::make_shared<Rademacher>();
  } else if (name == "centered_bernoulli") {
    allow({"p"});
    const double p = get("p", 0.5);
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("centered_bernoulli p must lie in (0, 1)");
    law = std::make_shared<CenteredBernoulli>(p);
  } else if (name == "centered_uniform") {
    allow({"half_width"});
    const double h = get("half_width", 1.0);
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("centered_uniform half_width must be positive");
    law = std::make_shared<CenteredUniform>(h);
  } else if (name == "centered_poisson") {
    allow({"lambda"});
    const double lambda = get("lambda", 1.0);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("centered_poisson lambda must be positive");
    law = std::make_shared<CenteredPoisson>(lambda);
  } else {
    throw InvalidArgument("unknown innovation law '" + name + "'");
  }

  const double H = get("H", moment_radius(*law, law->default_radius()));
  if (!(H > 0.0) || !std::isfinite(H)) throw InvalidArgument("radius H must be positive and finite");
  double C = get("C", 0.0);
  if (params.count("C") == 0) {
    const CramerReport rep = verify_cramer(*law, H, std::numeric_limits<double>::infinity(), 128);
    if (!rep.ok)
      throw InvalidArgument("radius H=" + std::to_string(H) + " reaches a singularity of the " + name +
                            " cumulant generating function");
    C = 1.05 * rep.max_abs_L;
  }
  return InnovationModel(std::move(law), H, C);
}

}  // namespace mdrf
