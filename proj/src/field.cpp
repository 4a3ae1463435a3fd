#include "mdrf/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mdrf/error.hpp"

namespace mdrf {

namespace {

constexpr double kTailFraction = 1e-10;

void check_dimension(int d) {
  if (d < 1 || d > 3) throw InvalidArgument("field dimension must be 1, 2 or 3");
}

// Dense box filter: for a on [-m, m]^d returns c on [-(m+n), m+n]^d with
// c_k = sum_{|i-k|_inf <= n} a_i, applied one axis at a time. Each line is
// prefix-summed in extended precision.
std::vector<double> box_filter(const std::vector<double>& a, int d, int m, int n) {
  std::vector<std::size_t> ext(static_cast<std::size_t>(d), static_cast<std::size_t>(2 * m + 1));
  std::vector<double> cur = a;
  const std::size_t out_len = static_cast<std::size_t>(2 * (m + n) + 1);
  std::vector<long double> prefix(static_cast<std::size_t>(2 * m + 2));
  for (int axis = 0; axis < d; ++axis) {
    std::size_t stride = 1;
    for (int k = axis + 1; k < d; ++k) stride *= ext[k];
    std::size_t outer = 1;
    for (int k = 0; k < axis; ++k) outer *= ext[k];
    const std::size_t in_len = ext[axis];
    std::vector<double> next(outer * out_len * stride, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t r = 0; r < stride; ++r) {
        const std::size_t in_base = o * in_len * stride + r;
        const std::size_t out_base = o * out_len * stride + r;
        prefix[0] = 0.0L;
        bool any = false;
        for (std::size_t i = 0; i < in_len; ++i) {
          const double v = cur[in_base + i * stride];
          any = any || v != 0.0;
          prefix[i + 1] = prefix[i] + v;
        }
        if (!any) continue;
        for (std::size_t c = 0; c < out_len; ++c) {
          // output coordinate k = c - (m + n); input coordinate i = idx - m
          const long long k = static_cast<long long>(c) - (m + n);
          const long long lo = std::max<long long>(k - n, -m);
          const long long hi = std::min<long long>(k + n, m);
          if (lo > hi) continue;
          next[out_base + c * stride] = static_cast<double>(prefix[hi + m + 1] - prefix[lo + m]);
        }
      }
    }
    ext[axis] = out_len;
    cur.swap(next);
  }
  return cur;
}

// Sub-box |i|_inf <= m of a field stored on [-M, M]^d.
std::vector<double> sub_box(const std::vector<double>& a, int d, int M, int m) {
  if (m >= M) return a;
  const std::size_t W = static_cast<std::size_t>(2 * M + 1);
  const std::size_t w = static_cast<std::size_t>(2 * m + 1);
  std::size_t count = 1;
  for (int k = 0; k < d; ++k) count *= w;
  std::vector<double> out(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx, src = 0, mul = 1;
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t c = rem % w;
      rem /= w;
      src += (c + static_cast<std::size_t>(M - m)) * mul;
      mul *= W;
    }
    out[idx] = a[src];
  }
  return out;
}

int effective_m(const CoefficientField& field, int m) {
  if (m < -1) throw InvalidArgument("truncation order must be >= 0");
  return m < 0 ? field.m_max() : std::min(m, field.m_max());
}

std::vector<double> filtered(const CoefficientField& field, int n, int m) {
  if (n < 1) throw InvalidArgument("window size n must be >= 1");
  const int me = effective_m(field, m);
  return box_filter(sub_box(field.dense(), field.dimension(), field.m_max(), me), field.dimension(), me, n);
}

}  // namespace

std::string to_string(FieldFamily f) {
  switch (f) {
    case FieldFamily::iid: return "iid";
    case FieldFamily::explicit_map: return "explicit";
    case FieldFamily::short_memory: return "short_memory";
    case FieldFamily::long_memory: return "long_memory";
    case FieldFamily::farima: return "farima";
  }
  return "unknown";
}

CoefficientField::CoefficientField(int d, int m, FieldFamily family) : d_(d), m_(m), family_(family) {
  check_dimension(d);
  if (m < 0) throw InvalidArgument("support cutoff must be >= 0");
  std::size_t count = 1;
  for (int k = 0; k < d; ++k) count *= static_cast<std::size_t>(2 * m + 1);
  a_.assign(count, 0.0);
}

std::size_t CoefficientField::offset(const Index& i) const {
  std::size_t off = 0;
  for (int k = 0; k < d_; ++k) off = off * static_cast<std::size_t>(2 * m_ + 1) + static_cast<std::size_t>(i[k] + m_);
  return off;
}

double CoefficientField::at(const Index& i) const {
  for (int k = 0; k < 3; ++k) {
    if (k >= d_ && i[k] != 0) return 0.0;
    if (k < d_ && std::abs(i[k]) > m_) return 0.0;
  }
  return a_[offset(i)];
}

double CoefficientField::sum() const {
  long double s = 0.0L;
  for (double v : a_) s += v;
  return static_cast<double>(s);
}

double CoefficientField::abs_sum() const {
  long double s = 0.0L;
  for (double v : a_) s += std::abs(v);
  return static_cast<double>(s);
}

void CoefficientField::validate_nonzero() {
  for (double v : a_)
    if (!std::isfinite(v)) throw InvalidArgument("field coefficients must be finite");
  if (std::all_of(a_.begin(), a_.end(), [](double v) { return v == 0.0; }))
    throw InvalidArgument("degenerate field: every coefficient is zero");
}

CoefficientField CoefficientField::iid(int d) {
  CoefficientField f(d, 0, FieldFamily::iid);
  f.a_[0] = 1.0;
  return f;
}

CoefficientField CoefficientField::explicit_map(int d, const std::map<Index, double>& coeffs) {
  check_dimension(d);
  int m = 0;
  for (const auto& [i, v] : coeffs) {
    for (int k = 0; k < 3; ++k) {
      if (k >= d && i[k] != 0) throw InvalidArgument("explicit coefficient index has more coordinates than d");
      if (k < d) m = std::max(m, std::abs(i[k]));
    }
  }
  CoefficientField f(d, m, FieldFamily::explicit_map);
  for (const auto& [i, v] : coeffs) f.a_[f.offset(i)] += v;
  f.validate_nonzero();
  if (std::abs(f.sum()) <= 1e-12 * f.abs_sum())
    throw InvalidArgument("explicit field needs sum a_i != 0 for the short-memory regime");
  return f;
}

CoefficientField CoefficientField::short_memory(int d, int m_max) {
  check_dimension(d);
  if (m_max < 0) {
    // Neglected share of sum a_i^2 is at most d (2/5) 4^{-m}.
    m_max = 0;
    while (d * 0.4 * std::pow(4.0, -m_max) >= kTailFraction) ++m_max;
  }
  CoefficientField f(d, m_max, FieldFamily::short_memory);
  const std::size_t w = static_cast<std::size_t>(2 * m_max + 1);
  for (std::size_t idx = 0; idx < f.a_.size(); ++idx) {
    std::size_t rem = idx;
    int l1 = 0;
    for (int k = 0; k < d; ++k) {
      l1 += std::abs(static_cast<int>(rem % w) - m_max);
      rem /= w;
    }
    f.a_[idx] = std::ldexp(1.0, -l1);
  }
  f.params_ = {{"d", d}, {"m_max", m_max}};
  return f;
}

CoefficientField long_memory_coefficients(int d, const LongMemorySpec& spec, int m_max) {
  return CoefficientField::long_memory(d, spec, m_max);
}

CoefficientField CoefficientField::long_memory(int d, const LongMemorySpec& spec, int m_max) {
  check_dimension(d);
  const double lo = 0.5 * d;
  const double hi = d;
  if (!(spec.alpha > lo && spec.alpha < hi))
    throw InvalidArgument("long-memory alpha=" + std::to_string(spec.alpha) + " must lie in (d/2, d) = (" +
                          std::to_string(lo) + ", " + std::to_string(hi) + ") for d=" + std::to_string(d));
  if (!std::isfinite(spec.a0) || !std::isfinite(spec.b_value)) throw InvalidArgument("long-memory parameters must be finite");

  std::vector<std::string> warnings;
  if (m_max < 0) {
    // sum_{|i| > m} |i|^{-2 alpha} <= S_d m^{d - 2 alpha} / (2 alpha - d).
    const double surface = d == 1 ? 2.0 : (d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
    const double decay = 2.0 * spec.alpha - d;
    const double need = std::pow(surface / (decay * kTailFraction), 1.0 / decay);
    const int cap = kSupportCap[static_cast<std::size_t>(d)];
    if (need > cap) {
      m_max = cap;
      warnings.push_back("support cutoff capped at m_max=" + std::to_string(cap) +
                         "; the neglected share of sum a_i^2 exceeds 1e-10");
    } else {
      m_max = static_cast<int>(std::ceil(need));
    }
  }
  CoefficientField f(d, m_max, FieldFamily::long_memory);
  f.warnings_ = std::move(warnings);
  const std::size_t w = static_cast<std::size_t>(2 * m_max + 1);
  for (std::size_t idx = 0; idx < f.a_.size(); ++idx) {
    std::size_t rem = idx;
    std::array<int, 3> c{};
    for (int k = d - 1; k >= 0; --k) {
      c[k] = static_cast<int>(rem % w) - m_max;
      rem /= w;
    }
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) r2 += static_cast<double>(c[k]) * c[k];
    if (r2 == 0.0) {
      f.a_[idx] = spec.a0;
      continue;
    }
    const double r = std::sqrt(r2);
    const double l = spec.l == SlowlyVarying::constant ? 1.0 : std::log1p(r);
    const double b = spec.b == Angular::constant ? spec.b_value : 1.0 + 0.5 * std::cos(std::numbers::pi * c[0] / r);
    f.a_[idx] = l * b * std::pow(r, -spec.alpha);
  }
  f.params_ = {{"d", d},
               {"alpha", spec.alpha},
               {"a0", spec.a0},
               {"b_value", spec.b_value},
               {"log_l", spec.l == SlowlyVarying::log ? 1.0 : 0.0},
               {"first_cosine", spec.b == Angular::first_cosine ? 1.0 : 0.0},
               {"m_max", m_max}};
  f.validate_nonzero();
  return f;
}

bool ar_stable(const std::vector<double>& phi) {
  // Step-down recursion: the AR operator is stable iff every partial
  // autocorrelation has modulus below one.
  std::vector<double> a = phi;
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  for (std::size_t j = a.size(); j >= 1; --j) {
    const double k = a[j - 1];
    if (!(std::abs(k) < 1.0)) return false;
    std::vector<double> next(j - 1);
    for (std::size_t i = 0; i + 1 < j; ++i) next[i] = (a[i] + k * a[j - 2 - i]) / (1.0 - k * k);
    a.swap(next);
  }
  return true;
}

std::vector<double> farima_coefficients(double beta, const std::vector<double>& phi, const std::vector<double>& theta,
                                        std::size_t count) {
  if (!(beta > -0.5 && beta < 0.5)) throw InvalidArgument("farima beta must lie in (-1/2, 1/2)");
  if (!ar_stable(phi)) throw InvalidArgument("farima AR polynomial has a zero inside the closed unit disc");
  std::vector<double> psi(count);
  if (count == 0) return psi;
  psi[0] = 1.0;
  for (std::size_t i = 1; i < count; ++i) psi[i] = psi[i - 1] * (static_cast<double>(i) - 1.0 + beta) / static_cast<double>(i);
  std::vector<double> a(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = psi[i];
    for (std::size_t k = 1; k <= theta.size() && k <= i; ++k) u += theta[k - 1] * psi[i - k];
    for (std::size_t k = 1; k <= phi.size() && k <= i; ++k) u += phi[k - 1] * a[i - k];
    a[i] = u;
  }
  return a;
}

CoefficientField CoefficientField::farima(const FarimaSpec& spec, int m_max) {
  std::vector<std::string> warnings;
  std::vector<double> c;
  if (m_max < 0) {
    const int cap = kSupportCap[1];
    c = farima_coefficients(spec.beta, spec.phi, spec.theta, static_cast<std::size_t>(cap) + 1);
    double beyond = 0.0;
    if (spec.beta != 0.0) {
      double th = 1.0, ph = 1.0;
      for (double v : spec.theta) th += v;
      for (double v : spec.phi) ph -= v;
      const double k = th / ph / std::tgamma(spec.beta);
      beyond = k * k * std::pow(static_cast<double>(cap), 2.0 * spec.beta - 1.0) / (1.0 - 2.0 * spec.beta);
    }
    std::vector<long double> suffix(c.size() + 1, 0.0L);
    for (std::size_t i = c.size(); i-- > 0;) suffix[i] = suffix[i + 1] + static_cast<long double>(c[i]) * c[i];
    const long double total = suffix[0] + beyond;
    m_max = cap;
    for (std::size_t m = 0; m < c.size(); ++m) {
      if (suffix[m + 1] + beyond < kTailFraction * total) {
        m_max = static_cast<int>(m);
        break;
      }
    }
    if (suffix[static_cast<std::size_t>(m_max) + 1] + beyond >= kTailFraction * total)
      warnings.push_back("support cutoff capped at m_max=" + std::to_string(cap) +
                         "; the neglected share of sum a_i^2 exceeds 1e-10");
    c.resize(static_cast<std::size_t>(m_max) + 1);
  } else {
    c = farima_coefficients(spec.beta, spec.phi, spec.theta, static_cast<std::size_t>(m_max) + 1);
  }
  CoefficientField f(1, m_max, FieldFamily::farima);
  for (int i = 0; i <= m_max; ++i) f.a_[static_cast<std::size_t>(i + m_max)] = c[static_cast<std::size_t>(i)];
  f.warnings_ = std::move(warnings);
  f.params_ = {{"beta", spec.beta},
               {"p", static_cast<double>(spec.phi.size())},
               {"q", static_cast<double>(spec.theta.size())},
               {"m_max", m_max}};
  f.validate_nonzero();
  return f;
}

PartialSumModel::PartialSumModel(InnovationModel innovation, int d, int n, std::vector<Index> sites, std::vector<double> b)
    : innovation_(std::move(innovation)), d_(d), n_(n) {
  if (sites.size() != b.size()) throw InvalidArgument("sites and weights differ in length");
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!std::isfinite(b[j])) throw NumericError("non-finite weight");
    if (b[j] == 0.0) continue;
    sites_.push_back(sites[j]);
    b_.push_back(b[j]);
  }
  if (b_.empty()) throw InvalidArgument("empty weight support");

  std::array<long double, kMaxPowerOrder + 1> p{};
  for (double v : b_) {
    long double pw = 1.0L;
    for (int k = 1; k <= kMaxPowerOrder; ++k) {
      pw *= v;
      p[k] += pw;
    }
    M_ = std::max(M_, std::abs(v));
  }
  for (int k = 1; k <= kMaxPowerOrder; ++k) power_[k] = static_cast<double>(p[k]);
  const double var = innovation_.variance();
  B_ = var * power_[2];
  if (!std::isfinite(B_)) throw NumericError("sum of squared weights overflows");
  const double H = innovation_.radius_H();
  H_ = H / (2.0 * M_);
  C_ = 2.0 * innovation_.bound_C() * B_ * H_ * H_ / (var * H * H);

  std::vector<double> sorted = b_;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted) {
    if (!groups_.empty() && groups_.back().first == v)
      ++groups_.back().second;
    else
      groups_.emplace_back(v, 1);
  }
}

double PartialSumModel::power_sum(int k) const {
  if (k < 1 || k > kMaxPowerOrder) throw InvalidArgument("power sum order out of range");
  return power_[k];
}

double PartialSumModel::aggregate_cumulant(int k) const {
  if (k == 1) return 0.0;
  return innovation_.cumulant(k) * power_sum(k);
}

std::pair<std::vector<Index>, std::vector<double>> window_weight_map(const CoefficientField& field, int n, int m) {
  const int d = field.dimension();
  const int me = effective_m(field, m);
  const std::vector<double> c = filtered(field, n, m);
  const int R = me + n;
  const std::size_t w = static_cast<std::size_t>(2 * R + 1);
  std::vector<Index> sites;
  std::vector<double> b;
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    if (c[idx] == 0.0) continue;
    Index j{};
    std::size_t rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      j[k] = -(static_cast<int>(rem % w) - R);
      rem /= w;
    }
    sites.push_back(j);
    b.push_back(c[idx]);
  }
  return {std::move(sites), std::move(b)};
}

PartialSumModel window_weights(const CoefficientField& field, const InnovationModel& innovation, int n) {
  auto [sites, b] = window_weight_map(field, n, -1);
  return PartialSumModel(innovation, field.dimension(), n, std::move(sites), std::move(b));
}

PartialSumModel truncated_weights(const CoefficientField& field, const InnovationModel& innovation, int n, int m) {
  if (m < 0) throw InvalidArgument("truncation order must be >= 0");
  auto [sites, b] = window_weight_map(field, n, m);
  return PartialSumModel(innovation, field.dimension(), n, std::move(sites), std::move(b));
}

double window_sum_squares(const CoefficientField& field, int n) {
  const std::vector<double> c = filtered(field, n, -1);
  long double s = 0.0L;
  for (double v : c) s += static_cast<long double>(v) * v;
  return static_cast<double>(s);
}

double scaling_exponent(const CoefficientField& field, const std::vector<int>& n_list) {
  if (n_list.size() < 3) throw InvalidArgument("scaling_exponent needs at least three window sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw InvalidArgument("window sizes must be strictly increasing");
  std::vector<double> lx, ly;
  for (int n : n_list) {
    const double B = window_sum_squares(field, n);
    if (!(B > 0.0)) throw InvalidArgument("degenerate field: B_n = 0");
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(B));
  }
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace mdrf
