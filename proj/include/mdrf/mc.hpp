#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mdrf/tilt.hpp"

namespace mdrf {

enum class OracleMethod { exact_enum, irwin_hall, plain_mc, tilted_is };
enum class TailSide { upper, lower };  // P(S > s) or P(S < s)

std::string to_string(OracleMethod m);

struct OracleEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t n_samples = 0;
  OracleMethod method = OracleMethod::exact_enum;
  std::optional<double> tilt_z;

  double rel_std_err() const { return p_hat > 0.0 ? std_err / p_hat : 0.0; }
};

/// Samples are processed in fixed chunks of kChunkSize, each with its own
/// engine seeded from (seed, chunk index), so the thread count never changes
/// the result.
struct McOptions {
  std::uint64_t n_samples = 1000000;
  std::uint64_t seed = 1;
  int threads = 1;
};

constexpr std::uint64_t kChunkSize = 4096;

/// Exact P(S > s) for finitely supported innovations by enumeration, or by
/// the binomial law when every weight is equal.
OracleEstimate exact_tail_enum(const PartialSumModel& model, double threshold);

/// Exact P(U_1 + ... + U_N > s) for U_i uniform on [-1, 1], N <= 60.
OracleEstimate irwin_hall_tail(int N, double threshold);

OracleEstimate plain_mc(const PartialSumModel& model, double threshold, const McOptions& opts,
                        TailSide side = TailSide::upper);

/// Importance sampling under the tilt at the saddle point of the threshold.
OracleEstimate tilted_is(const PartialSumModel& model, double threshold, const McOptions& opts,
                         TailSide side = TailSide::upper, const TiltOptions& tilt = {});

/// Importance sampling under an explicit tilt z; z = 0 is plain Monte Carlo.
OracleEstimate tilted_is_at(const PartialSumModel& model, double threshold, double z, const McOptions& opts,
                            TailSide side = TailSide::upper);

/// For a lattice sum with equal weights, the midpoint of the lattice cell
/// containing s; otherwise s itself.
double mid_lattice_threshold(const PartialSumModel& model, double s);

}  // namespace mdrf
