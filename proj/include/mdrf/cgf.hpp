#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace mdrf {

/// Engine used for every draw. Parallel callers derive one engine per chunk
/// from a seed, so results never depend on scheduling.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine output.
inline double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// A centred innovation law with an analytic cumulant generating function
/// L(z) = log E exp(z e). Implementations provide closed forms for L and its
/// first two derivatives, the cumulants, and an exact sampler for the
/// exponentially tilted law dV_theta(y) = exp(theta y - L(theta)) dV(y).
class InnovationLaw {
 public:
  virtual ~InnovationLaw() = default;

  virtual std::string name() const = 0;
  virtual std::map<std::string, double> params() const = 0;

  virtual double cgf(double z) const = 0;
  virtual double cgf_d1(double z) const = 0;
  virtual double cgf_d2(double z) const = 0;

  /// Moment generating function on the complex plane. Entire for every
  /// builtin; the CGF is analytic wherever this has no zeros.
  virtual std::complex<double> mgf(std::complex<double> z) const = 0;

  /// True when L itself has an entire closed form (no zeros of the MGF).
  virtual bool cgf_entire() const { return false; }
  /// Closed-form complex CGF; only meaningful when cgf_entire().
  virtual std::complex<double> cgf_complex(std::complex<double> z) const { return std::log(mgf(z)); }

  /// Cumulant of order k >= 1.
  virtual double cumulant(int k) const = 0;

  /// Distance from the origin to the nearest singularity of L (infinity for
  /// entire CGFs).
  virtual double analytic_radius() const = 0;
  virtual double default_radius() const = 0;

  /// Degree of L when it is a polynomial, else 0.
  virtual int polynomial_degree() const { return 0; }

  virtual double tilted_draw(Rng& rng, double theta) const = 0;
  /// Sum of `count` independent tilted draws. Laws closed under convolution
  /// override this with a single draw from the sum's law.
  virtual double tilted_sum(Rng& rng, double theta, std::uint64_t count) const;

  /// Gap between support points for lattice laws, 0 for continuous ones.
  virtual double lattice_span() const { return 0.0; }
  /// One support point of a lattice law; the others sit at multiples of the span.
  virtual double lattice_origin() const { return 0.0; }
  /// (value, probability) pairs for finitely supported laws, else empty.
  virtual std::vector<std::pair<double, double>> atoms() const { return {}; }
};

/// Leading cumulants (gamma_1, ..., gamma_K) of a law.
struct CumulantSeries {
  std::vector<double> coeffs;  // coeffs[k-1] = gamma_k
  int order() const { return static_cast<int>(coeffs.size()); }
  double operator[](int k) const { return coeffs.at(static_cast<std::size_t>(k - 1)); }
};

/// An innovation law together with the working radius H and the bound C with
/// |L(z)| <= C on |z| < H. Immutable once built.
class InnovationModel {
 public:
  InnovationModel(std::shared_ptr<const InnovationLaw> law, double radius_H, double bound_C);

  const InnovationLaw& law() const { return *law_; }
  std::string name() const { return law_->name(); }
  std::map<std::string, double> params() const { return law_->params(); }

  double cgf(double z) const { return law_->cgf(z); }
  double cgf_d1(double z) const { return law_->cgf_d1(z); }
  double cgf_d2(double z) const { return law_->cgf_d2(z); }
  /// Principal-branch complex CGF. Use verify_cramer for values far from 0.
  std::complex<double> cgf(std::complex<double> z) const { return law_->cgf_complex(z); }

  double cumulant(int k) const { return law_->cumulant(k); }
  CumulantSeries cumulants(int K) const;
  /// Raw moment E e^m from cumulants (complete Bell polynomials), m <= 12.
  double raw_moment(int m) const;

  double radius_H() const { return radius_H_; }
  double bound_C() const { return bound_C_; }
  double variance() const { return variance_; }

  bool gaussian() const { return law_->polynomial_degree() == 2; }
  bool cgf_entire() const { return law_->cgf_entire(); }
  /// All odd cumulants vanish up to order 9.
  bool symmetric() const;
  double lattice_span() const { return law_->lattice_span(); }
  double lattice_origin() const { return law_->lattice_origin(); }
  std::vector<std::pair<double, double>> atoms() const { return law_->atoms(); }

  double draw(Rng& rng) const { return law_->tilted_draw(rng, 0.0); }

 private:
  std::shared_ptr<const InnovationLaw> law_;
  double radius_H_;
  double bound_C_;
  double variance_;
};

/// Builds one of the shipped laws: gaussian(sigma), rademacher,
/// centered_bernoulli(p), centered_uniform(half_width), centered_poisson(lambda).
/// Optional "H" and "C" entries override the working radius and bound; when
/// C is absent it is 1.05 times the grid maximum of |L| found by verify_cramer.
InnovationModel make_builtin(const std::string& name, const std::map<std::string, double>& params = {});

struct CramerReport {
  double max_abs_L = 0.0;
  bool ok = false;
  int zeros_inside = 0;  // winding number of the MGF around the disc boundary
  bool evaluation_failed = false;
};

/// Evaluates |L| on a polar grid of |z| <= 0.999 H. The logarithm follows
/// each ray continuously from L(0) = 0. Zeros of the MGF inside the disc or a
/// non-finite value count as a violation.
CramerReport verify_cramer(const InnovationModel& model, int grid_size);
CramerReport verify_cramer(const InnovationLaw& law, double radius_H, double bound_C, int grid_size);

/// |E e^m| <= (m!/2) sigma^2 H^(2-m) for 2 <= m <= max_order.
bool verify_moment_condition(const InnovationModel& model, int max_order);

/// Draw from the tilted law. Requires |theta| < H.
double tilted_draw(const InnovationModel& model, double theta, Rng& rng);

}  // namespace mdrf
