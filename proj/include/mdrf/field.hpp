#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mdrf/cgf.hpp"

namespace mdrf {

/// Lattice index in Z^d, d <= 3. Unused trailing coordinates are zero.
using Index = std::array<int, 3>;

enum class FieldFamily { iid, explicit_map, short_memory, long_memory, farima };

std::string to_string(FieldFamily f);

enum class SlowlyVarying { constant, log };  // l(r) = 1 or log(1 + r)
enum class Angular { constant, first_cosine };  // b(u) = c or 1 + cos(pi u_1) / 2

struct LongMemorySpec {
  double alpha = 0.75;
  SlowlyVarying l = SlowlyVarying::constant;
  Angular b = Angular::constant;
  double b_value = 1.0;  // the constant for Angular::constant
  double a0 = 1.0;
};

struct FarimaSpec {
  double beta = 0.0;
  std::vector<double> phi;    // AR part: phi(z) = 1 - phi_1 z - ... - phi_p z^p
  std::vector<double> theta;  // MA part: theta(z) = 1 + theta_1 z + ... + theta_q z^q
};

/// Deterministic coefficients a_i of X_j = sum_i a_i e_{j-i}, stored densely
/// on the box |i|_inf <= m_max. Coefficients outside the box are zero.
class CoefficientField {
 public:
  static CoefficientField iid(int d);
  static CoefficientField explicit_map(int d, const std::map<Index, double>& coeffs);
  /// a_i = 2^{-|i|_1}.
  static CoefficientField short_memory(int d, int m_max = -1);
  /// a_i = l(|i|) b(i/|i|) |i|^{-alpha} with the Euclidean norm, a_0 from the spec.
  static CoefficientField long_memory(int d, const LongMemorySpec& spec, int m_max = -1);
  static CoefficientField farima(const FarimaSpec& spec, int m_max = -1);

  int dimension() const { return d_; }
  int m_max() const { return m_; }
  FieldFamily family() const { return family_; }
  std::map<std::string, double> params() const { return params_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double at(const Index& i) const;
  /// Row-major values on [-m_max, m_max]^d, last coordinate fastest.
  const std::vector<double>& dense() const { return a_; }
  double sum() const;
  double abs_sum() const;

 private:
  CoefficientField(int d, int m, FieldFamily family);
  std::size_t offset(const Index& i) const;
  void validate_nonzero();

  int d_;
  int m_;
  FieldFamily family_;
  std::vector<double> a_;
  std::map<std::string, double> params_;
  std::vector<std::string> warnings_;
};

/// Support caps used when m_max is chosen automatically for slowly decaying
/// families, indexed by dimension.
constexpr std::array<int, 4> kSupportCap = {0, 65536, 1024, 64};

/// Weighted sum S = sum_j b_j e_j over a finite support, with the scalars of
/// the moderate-deviation normalisation.
class PartialSumModel {
 public:
  static constexpr int kMaxPowerOrder = 20;

  PartialSumModel(InnovationModel innovation, int d, int n, std::vector<Index> sites, std::vector<double> b);

  const InnovationModel& innovation() const { return innovation_; }
  int dimension() const { return d_; }
  int window() const { return n_; }
  const std::vector<Index>& sites() const { return sites_; }
  const std::vector<double>& weights() const { return b_; }
  std::size_t support_size() const { return b_.size(); }

  double B_n() const { return B_; }
  double M_n() const { return M_; }
  double H_n() const { return H_; }
  double C_n() const { return C_; }
  /// H_n sqrt(B_n), the scale of t = x / (H_n sqrt(B_n)).
  double scale() const { return H_ * std::sqrt(B_); }

  /// sum_j b_j^k for 1 <= k <= kMaxPowerOrder.
  double power_sum(int k) const;
  /// Gamma_k = gamma_k sum_j b_j^k.
  double aggregate_cumulant(int k) const;

  /// Distinct weight values with multiplicities, sorted by value.
  const std::vector<std::pair<double, std::uint64_t>>& groups() const { return groups_; }

 private:
  InnovationModel innovation_;
  int d_;
  int n_;
  std::vector<Index> sites_;
  std::vector<double> b_;
  double B_ = 0.0;
  double M_ = 0.0;
  double H_ = 0.0;
  double C_ = 0.0;
  std::array<double, kMaxPowerOrder + 1> power_{};
  std::vector<std::pair<double, std::uint64_t>> groups_;
};

/// b_j = sum_{i in [-n, n]^d} a_{i-j}.
PartialSumModel window_weights(const CoefficientField& field, const InnovationModel& innovation, int n);
/// Same with a_i set to zero for |i|_inf > m.
PartialSumModel truncated_weights(const CoefficientField& field, const InnovationModel& innovation, int n, int m);

/// Raw window weights without an innovation attached: (sites, b) with zero
/// weights dropped. `m` < 0 means no truncation.
std::pair<std::vector<Index>, std::vector<double>> window_weight_map(const CoefficientField& field, int n, int m = -1);

/// sum_j b_j^2 for the window of size n.
double window_sum_squares(const CoefficientField& field, int n);

/// Least-squares slope of log B_n against log n.
double scaling_exponent(const CoefficientField& field, const std::vector<int>& n_list);

/// a_0, ..., a_{count-1} of (1 - B)^{-beta} theta(B) / phi(B).
std::vector<double> farima_coefficients(double beta, const std::vector<double>& phi, const std::vector<double>& theta,
                                        std::size_t count);
/// True when every zero of phi(z) = 1 - sum phi_k z^k lies outside the closed unit disc.
bool ar_stable(const std::vector<double>& phi);

CoefficientField long_memory_coefficients(int d, const LongMemorySpec& spec, int m_max);

}  // namespace mdrf
