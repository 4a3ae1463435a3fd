#include "mdrf/mc.hpp"

#include <algorithm>
#include <atomic>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "mdrf/error.hpp"

namespace mdrf {

namespace {

struct ChunkMoments {
  long double sum = 0.0L;
  long double sumsq = 0.0L;
};

ChunkMoments run_chunk(const PartialSumModel& model, double threshold, double z, double log_norm, TailSide side,
                       std::uint64_t seed, std::uint64_t chunk, std::uint64_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  Rng rng(seq);
  const InnovationLaw& law = model.innovation().law();
  const auto& groups = model.groups();
  ChunkMoments m;
  for (std::uint64_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (const auto& [b, c] : groups) s += b * law.tilted_sum(rng, z * b, c);
    const bool hit = side == TailSide::upper ? s > threshold : s < threshold;
    if (!hit) continue;
    const long double w = z == 0.0 ? 1.0L : std::exp(static_cast<long double>(-z * s + log_norm));
    m.sum += w;
    m.sumsq += w * w;
  }
  return m;
}

OracleEstimate simulate(const PartialSumModel& model, double threshold, double z, const McOptions& opts,
                        TailSide side, OracleMethod method) {
  if (opts.n_samples < 1000) throw InvalidArgument("Monte Carlo needs at least 1000 samples");
  if (!std::isfinite(threshold)) throw InvalidArgument("threshold must be finite");
  double log_norm = 0.0;
  if (z != 0.0) {
    if (model.innovation().gaussian())
      log_norm = 0.5 * model.B_n() * z * z;
    else
      log_norm = aggregate_cgf(model, z).value;
  }
  const std::uint64_t chunks = (opts.n_samples + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkMoments> parts(chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t count = std::min(kChunkSize, opts.n_samples - c * kChunkSize);
      parts[c] = run_chunk(model, threshold, z, log_norm, side, opts.seed, c, count);
    }
  };
  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(chunks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  long double sum = 0.0L, sumsq = 0.0L;
  for (const auto& p : parts) {
    sum += p.sum;
    sumsq += p.sumsq;
  }
  const long double n = static_cast<long double>(opts.n_samples);
  const long double p = sum / n;
  const long double var = std::max(0.0L, sumsq / n - p * p);
  OracleEstimate e;
  e.p_hat = static_cast<double>(p);
  e.std_err = static_cast<double>(std::sqrt(var / n));
  e.n_samples = opts.n_samples;
  e.method = method;
  if (method == OracleMethod::tilted_is) e.tilt_z = z;
  return e;
}

}  // namespace

std::string to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::exact_enum: return "exact_enum";
    case OracleMethod::irwin_hall: return "irwin_hall";
    case OracleMethod::plain_mc: return "plain_mc";
    case OracleMethod::tilted_is: return "tilted_is";
  }
  return "unknown";
}

OracleEstimate exact_tail_enum(const PartialSumModel& model, double threshold) {
  const auto atoms = model.innovation().atoms();
  if (atoms.size() != 2) throw InvalidArgument("exact enumeration needs a two-point innovation law");
  const auto& groups = model.groups();
  const auto [v0, p0] = atoms[0];
  const auto [v1, p1] = atoms[1];
  long double total = 0.0L;
  if (groups.size() == 1) {
    const double b = groups[0].first;
    const std::uint64_t N = groups[0].second;
    const long double lp0 = std::log(static_cast<long double>(p0));
    const long double lp1 = std::log(static_cast<long double>(p1));
    const long double lgN = std::lgamma(static_cast<long double>(N) + 1.0L);
    for (std::uint64_t k = 0; k <= N; ++k) {
      const double s = b * (static_cast<double>(k) * v1 + static_cast<double>(N - k) * v0);
      if (!(s > threshold)) continue;
      const long double kk = static_cast<long double>(k);
      const long double lc = lgN - std::lgamma(kk + 1.0L) - std::lgamma(static_cast<long double>(N - k) + 1.0L);
      total += std::exp(lc + kk * lp1 + (static_cast<long double>(N) - kk) * lp0);
    }
  } else {
    const auto& b = model.weights();
    const std::size_t N = b.size();
    if (N > 25) throw InvalidArgument("exact enumeration supports at most 25 nonzero weights");
    for (std::uint64_t mask = 0; mask < (1ULL << N); ++mask) {
      double s = 0.0;
      long double p = 1.0L;
      for (std::size_t j = 0; j < N; ++j) {
        const bool up = (mask >> j) & 1ULL;
        s += b[j] * (up ? v1 : v0);
        p *= up ? p1 : p0;
      }
      if (s > threshold) total += p;
    }
  }
  OracleEstimate e;
  e.p_hat = static_cast<double>(std::min(1.0L, total));
  e.method = OracleMethod::exact_enum;
  return e;
}

OracleEstimate irwin_hall_tail(int N, double threshold) {
  if (N < 1 || N > 60) throw InvalidArgument("Irwin-Hall oracle supports 1 <= N <= 60");
  using Big = boost::multiprecision::cpp_bin_float_100;
  OracleEstimate e;
  e.method = OracleMethod::irwin_hall;
  // S = 2Y - N with Y the Irwin-Hall sum of N uniforms on [0, 1].
  const Big y = (Big(threshold) + N) / 2;
  if (y <= 0) {
    e.p_hat = 1.0;
    return e;
  }
  if (y >= N) {
    e.p_hat = 0.0;
    return e;
  }
  auto cdf = [N](const Big& x) {
    Big sum = 0;
    Big binom = 1;
    const int top = static_cast<int>(floor(x));
    for (int k = 0; k <= top && k <= N; ++k) {
      const Big term = binom * pow(x - k, N);
      sum += (k % 2 == 0) ? term : Big(-term);
      binom = binom * (N - k) / (k + 1);
    }
    Big fact = 1;
    for (int k = 2; k <= N; ++k) fact *= k;
    return sum / fact;
  };
  const Big tail = 2 * y > N ? cdf(Big(N) - y) : Big(1 - cdf(y));
  e.p_hat = static_cast<double>(tail);
  return e;
}

OracleEstimate plain_mc(const PartialSumModel& model, double threshold, const McOptions& opts, TailSide side) {
  return simulate(model, threshold, 0.0, opts, side, OracleMethod::plain_mc);
}

OracleEstimate tilted_is_at(const PartialSumModel& model, double threshold, double z, const McOptions& opts,
                            TailSide side) {
  if (!std::isfinite(z)) throw InvalidArgument("tilt must be finite");
  if (!model.innovation().gaussian() && !(std::abs(z) < model.H_n()))
    throw OutOfRange("importance-sampling tilt needs |z| < H_n", model.H_n());
  return simulate(model, threshold, z, opts, side, OracleMethod::tilted_is);
}

OracleEstimate tilted_is(const PartialSumModel& model, double threshold, const McOptions& opts, TailSide side,
                         const TiltOptions& tilt) {
  const double x = threshold / std::sqrt(model.B_n());
  double z = 0.0;
  if (side == TailSide::upper && x > 0.0) z = solve_saddle_signed(model, x, tilt).z;
  if (side == TailSide::lower && x < 0.0) z = solve_saddle_signed(model, x, tilt).z;
  return tilted_is_at(model, threshold, z, opts, side);
}

double mid_lattice_threshold(const PartialSumModel& model, double s) {
  const double span = model.innovation().lattice_span();
  if (span <= 0.0 || model.groups().size() != 1) return s;
  const double b = model.groups()[0].first;
  const double N = static_cast<double>(model.groups()[0].second);
  const double step = std::abs(b) * span;
  const double base = N * b * model.innovation().lattice_origin();
  return base + step * (std::floor((s - base) / step) + 0.5);
}

}  // namespace mdrf
