#include "mdrf/runner.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>

#include "mdrf/error.hpp"
#include "mdrf/mc.hpp"
#include "mdrf/normal.hpp"
#include "mdrf/regress.hpp"
#include "mdrf/risk.hpp"
#include "mdrf/series.hpp"

namespace mdrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::size_t failed = 0;
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

std::string status_of(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::out_of_range: return "out_of_range";
      case ErrorCode::numeric: return "numeric_error";
      default: return "invalid_argument";
    }
  }
  return "error";
}

// Evaluates `fill` for one row; on failure the numeric cells become nan and
// the status cell names the failure.
void guarded_row(Table& t, const Row& keys, const std::function<Row()>& fill, std::size_t value_cols,
                 const std::string& failure_regime = "") {
  Row row = keys;
  try {
    Row vals = fill();
    row.insert(row.end(), vals.begin(), vals.end());
    row.push_back("ok");
  } catch (const std::exception& e) {
    for (std::size_t i = 0; i < value_cols; ++i) row.push_back("nan");
    if (!failure_regime.empty()) row.back() = failure_regime;
    row.push_back(status_of(e));
    ++t.failed;
  }
  t.rows.push_back(std::move(row));
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

std::string to_csv(const Table& t) {
  std::string s;
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += r[i];
    }
    s += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return s;
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t row) { return seed + 0x9E3779B97F4A7C15ULL * (row + 1); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(0, what);
}

struct Context {
  const RunConfig& cfg;
  const RunOptions& opts;
  InnovationModel innovation;
  CoefficientField field;
  std::uint64_t seed;
  nlohmann::ordered_json report = nlohmann::ordered_json::object();
};

// tail ---------------------------------------------------------------------

Table run_tail(Context& c) {
  require(!c.cfg.x.empty(), "subcommand 'tail' needs grid.x");
  Table t;
  t.header = {"n", "x", "t", "z", "tail_upper", "tail_lower", "normal_tail", "ratio", "lambda_t", "correction_factor",
              "leading_order", "error_scale", "additive_bound", "regime", "status"};
  double worst = 0.0;
  for (int n : c.cfg.n) {
    const PartialSumModel model = window_weights(c.field, c.innovation, n);
    for (double x : c.cfg.x) {
      guarded_row(
          t, {fmt(n), fmt(x)},
          [&] {
            if (x < 0.0) throw InvalidArgument("x must be >= 0");
            const TailEstimate up = tail_upper(model, x, c.cfg.form, c.cfg.tilt);
            const TailEstimate lo = tail_lower(model, x, c.cfg.form, c.cfg.tilt);
            const TailEstimate lead = tail_leading_order(model, x);
            const double nt = normal_tail(x);
            const double ratio = std::exp(up.log_value - log_normal_tail(x));
            worst = std::max(worst, std::abs(ratio - 1.0));
            return Row{fmt(up.t), fmt(up.z), fmt(up.value), fmt(lo.value), fmt(nt), fmt(ratio), fmt(up.lambda_t),
                       fmt(up.correction_factor), fmt(lead.value), fmt(up.error_scale), fmt(up.additive_bound),
                       to_string(up.regime)};
          },
          12, "out_of_range");
    }
  }
  c.report["max_abs_ratio_minus_1"] = worst;
  return t;
}

// cdf-diff -----------------------------------------------------------------

Table run_cdf_diff(Context& c) {
  require(!c.cfg.x.empty(), "subcommand 'cdf-diff' needs grid.x");
  Table t;
  t.header = {"n", "x", "F_approx", "Phi", "diff", "bound", "scaled_diff", "error_scale", "regime", "status"};
  double worst = 0.0;
  for (int n : c.cfg.n) {
    const PartialSumModel model = window_weights(c.field, c.innovation, n);
    for (double x : c.cfg.x) {
      guarded_row(
          t, {fmt(n), fmt(x)},
          [&] {
            const TailEstimate e = x >= 0.0 ? tail_upper(model, x, c.cfg.form, c.cfg.tilt)
                                            : tail_lower(model, -x, c.cfg.form, c.cfg.tilt);
            const double F = x >= 0.0 ? 1.0 - e.value : e.value;
            // F - Phi computed from the tails to avoid cancellation.
            const double diff = x >= 0.0 ? normal_tail(x) - e.value : e.value - normal_cdf(x);
            const double bound = e.additive_bound;
            worst = std::max(worst, std::abs(diff / bound));
            return Row{fmt(F), fmt(normal_cdf(x)), fmt(diff), fmt(bound), fmt(diff / bound), fmt(e.error_scale),
                       to_string(e.regime)};
          },
          7, "out_of_range");
    }
  }
  c.report["max_abs_scaled_diff"] = worst;
  return t;
}

// quantile / es ------------------------------------------------------------

Table run_quantile(Context& c, bool with_es) {
  require(!c.cfg.alpha.empty(), std::string("subcommand '") + (with_es ? "es" : "quantile") + "' needs grid.alpha");
  Table t;
  if (with_es)
    t.header = {"n", "alpha", "x_alpha", "Q", "es", "quadrature_error", "error_scale", "regime", "status"};
  else
    t.header = {"n", "alpha", "x_alpha", "Q", "error_scale", "regime", "status"};
  for (int n : c.cfg.n) {
    const PartialSumModel model = window_weights(c.field, c.innovation, n);
    for (double a : c.cfg.alpha) {
      guarded_row(
          t, {fmt(n), fmt(a)},
          [&] {
            if (with_es) {
              const RiskResult r = expected_shortfall(model, a, c.cfg.tilt);
              return Row{fmt(r.x_alpha), fmt(r.Q), fmt(r.es), fmt(r.quadrature_error), fmt(r.error_scale),
                         to_string(r.regime)};
            }
            const RiskResult r = quantile(model, a, c.cfg.tilt);
            return Row{fmt(r.x_alpha), fmt(r.Q), fmt(r.error_scale), to_string(r.regime)};
          },
          with_es ? 6 : 4, "out_of_range");
    }
  }
  return t;
}

// compare-truncation -------------------------------------------------------

Table run_truncation(Context& c) {
  require(!c.cfg.truncation_m.empty(), "subcommand 'compare-truncation' needs truncation.m");
  require(!c.cfg.x.empty(), "subcommand 'compare-truncation' needs grid.x");
  Table t;
  t.header = {"n",  "m",      "x",        "ratio",  "dominant", "beta0_full", "beta0_truncated",
              "B_n", "B_n_m", "M_n_m", "status"};
  for (int n : c.cfg.n) {
    const PartialSumModel full = window_weights(c.field, c.innovation, n);
    for (int m : c.cfg.truncation_m) {
      const PartialSumModel trunc = truncated_weights(c.field, c.innovation, n, m);
      for (double x : c.cfg.x) {
        guarded_row(
            t, {fmt(n), fmt(m), fmt(x)},
            [&] {
              const TruncationComparison r = truncation_ratio(full, trunc, x, c.cfg.tilt);
              return Row{fmt(r.ratio), fmt(r.dominant), fmt(r.beta0_full), fmt(r.beta0_truncated), fmt(full.B_n()),
                         fmt(trunc.B_n()), fmt(trunc.M_n())};
            },
            7);
      }
    }
  }
  return t;
}

// regress ------------------------------------------------------------------

Table run_regress(Context& c) {
  require(!c.cfg.regression.z.empty(), "subcommand 'regress' needs regression.z");
  require(!c.cfg.x.empty(), "subcommand 'regress' needs grid.x");
  const int d = c.cfg.field.d;
  Table t;
  t.header = {"n"};
  for (int k = 1; k <= d; ++k) t.header.push_back("z" + std::to_string(k));
  for (const char* h : {"x", "B_n", "M_n", "H_n", "weight_sum", "tail_upper", "tail_lower", "two_sided",
                        "error_scale", "low_variance", "regime", "status"})
    t.header.push_back(h);
  for (int n : c.cfg.n) {
    RegressionDesign design;
    design.n = n;
    design.kernel = c.cfg.regression.kernel;
    design.bandwidth = c.cfg.regression.bandwidth;
    design.field = c.field;
    design.innovation = c.innovation;
    for (const auto& z : c.cfg.regression.z) {
      for (double x : c.cfg.x) {
        Row keys = {fmt(n)};
        for (double v : z) keys.push_back(fmt(v));
        keys.push_back(fmt(x));
        guarded_row(
            t, keys,
            [&] {
              const std::vector<double> w = weights_at(design, z);
              long double ws = 0.0L;
              for (double v : w) ws += v;
              const RegressionTail r = regression_tail(design, z, x, c.cfg.form, c.cfg.tilt);
              return Row{fmt(r.B_n),        fmt(r.M_n),         fmt(r.H_n),
                         fmt(static_cast<double>(ws)), fmt(r.upper.value), fmt(r.lower.value),
                         fmt(r.two_sided),  fmt(r.upper.error_scale), fmt(r.low_variance),
                         to_string(r.upper.regime)};
            },
            10, "out_of_range");
      }
    }
  }
  return t;
}

// verify -------------------------------------------------------------------

OracleMethod pick_oracle(const Context& c, const PartialSumModel& model) {
  const std::string& m = c.cfg.oracle.method;
  if (m == "tilted_is") return OracleMethod::tilted_is;
  if (m == "plain_mc") return OracleMethod::plain_mc;
  if (m == "exact_enum") return OracleMethod::exact_enum;
  if (m == "irwin_hall") return OracleMethod::irwin_hall;
  const bool two_point = model.innovation().atoms().size() == 2;
  if (two_point && (model.groups().size() == 1 || model.support_size() <= 25)) return OracleMethod::exact_enum;
  const auto params = model.innovation().params();
  if (model.innovation().name() == "centered_uniform" && params.at("half_width") == 1.0 && model.groups().size() == 1 &&
      model.groups()[0].first == 1.0 && model.groups()[0].second <= 60)
    return OracleMethod::irwin_hall;
  return OracleMethod::tilted_is;
}

Table run_verify(Context& c) {
  require(!c.cfg.x.empty(), "subcommand 'verify' needs grid.x");
  Table t;
  t.header = {"n",   "x",         "threshold", "approx", "oracle",      "std_err", "ratio", "rel_err",
              "tolerance", "within", "error_scale", "method", "regime", "status"};
  double worst = 0.0;
  std::size_t within = 0, evaluated = 0;
  std::size_t row = 0;
  for (int n : c.cfg.n) {
    const PartialSumModel model = window_weights(c.field, c.innovation, n);
    const double sqrtB = std::sqrt(model.B_n());
    const OracleMethod method = pick_oracle(c, model);
    const bool lattice = model.innovation().lattice_span() > 0.0;
    for (double x : c.cfg.x) {
      const std::uint64_t seed = row_seed(c.seed, row++);
      double threshold = x * sqrtB;
      if (c.cfg.oracle.mid_lattice) threshold = mid_lattice_threshold(model, threshold);
      const double xe = threshold / sqrtB;
      guarded_row(
          t, {fmt(n), fmt(xe), fmt(threshold)},
          [&] {
            const TailEstimate e = xe >= 0.0 ? tail_upper(model, xe, c.cfg.form, c.cfg.tilt)
                                             : tail_lower(model, -xe, c.cfg.form, c.cfg.tilt);
            const double approx = xe >= 0.0 ? e.value : 1.0 - e.value;
            McOptions mo{c.cfg.oracle.n_samples, seed, c.opts.threads};
            OracleEstimate o;
            switch (method) {
              case OracleMethod::exact_enum: o = exact_tail_enum(model, threshold); break;
              case OracleMethod::irwin_hall: {
                if (model.groups().size() != 1 || model.groups()[0].first != 1.0 ||
                    model.innovation().name() != "centered_uniform" ||
                    model.innovation().params().at("half_width") != 1.0)
                  throw InvalidArgument("the Irwin-Hall oracle needs unit-weight centered_uniform(1) sums");
                o = irwin_hall_tail(static_cast<int>(model.groups()[0].second), threshold);
                break;
              }
              case OracleMethod::plain_mc: o = plain_mc(model, threshold, mo); break;
              case OracleMethod::tilted_is: o = tilted_is(model, threshold, mo, TailSide::upper, c.cfg.tilt); break;
            }
            const double ratio = approx / o.p_hat;
            const double rel = std::abs(ratio - 1.0);
            double tol = c.cfg.oracle.tolerance_k * e.error_scale + 3.0 * o.rel_std_err();
            if (lattice && method == OracleMethod::exact_enum) tol += 0.10;
            const bool ok = rel <= tol;
            worst = std::max(worst, rel);
            within += ok ? 1 : 0;
            ++evaluated;
            return Row{fmt(approx), fmt(o.p_hat), fmt(o.std_err), fmt(ratio), fmt(rel), fmt(tol), fmt(ok),
                       fmt(e.error_scale), to_string(method), to_string(e.regime)};
          },
          11, "out_of_range");
    }
  }
  c.report["max_rel_err"] = worst;
  c.report["rows_within_tolerance"] = within;
  c.report["rows_evaluated"] = evaluated;
  c.report["all_within"] = evaluated > 0 && within == evaluated;
  return t;
}

// cumulants ----------------------------------------------------------------

Table run_cumulants(Context& c) {
  Table t;
  t.header = {"n", "k", "gamma_k", "Gamma_k", "a_k", "beta_k", "H_n", "B_n", "M_n", "C_n", "status"};
  const int K = c.cfg.series_order;
  for (int n : c.cfg.n) {
    const PartialSumModel model = window_weights(c.field, c.innovation, n);
    std::optional<TruncatedSeries> a, beta;
    std::string status = "ok";
    try {
      a = inversion_coefficients(model, K);
      beta = lambda_coefficients(model, K);
    } catch (const std::exception& e) {
      status = status_of(e);
      ++t.failed;
    }
    for (int k = 0; k <= K; ++k) {
      Row r = {fmt(n), fmt(k)};
      r.push_back(k >= 1 ? fmt(model.innovation().cumulant(k)) : "nan");
      r.push_back(k >= 1 ? fmt(model.aggregate_cumulant(k)) : "nan");
      r.push_back(a && k >= 1 ? fmt((*a)[k]) : "nan");
      r.push_back(beta ? fmt((*beta)[k]) : "nan");
      for (double v : {model.H_n(), model.B_n(), model.M_n(), model.C_n()}) r.push_back(fmt(v));
      r.push_back(status);
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

// scaling ------------------------------------------------------------------

Table run_scaling(Context& c) {
  Table t;
  t.header = {"n", "B_n", "log_n", "log_B_n", "status"};
  const double var = c.innovation.variance();
  for (int n : c.cfg.scaling_n) {
    guarded_row(
        t, {fmt(n)},
        [&] {
          const double B = var * window_sum_squares(c.field, n);
          return Row{fmt(B), fmt(std::log(static_cast<double>(n))), fmt(std::log(B))};
        },
        3);
  }
  try {
    c.report["slope"] = scaling_exponent(c.field, c.cfg.scaling_n);
  } catch (const std::exception& e) {
    c.report["slope"] = nullptr;
    c.report["slope_error"] = e.what();
  }
  const int d = c.cfg.field.d;
  switch (c.cfg.field.family) {
    case FieldFamily::long_memory: c.report["expected_slope"] = 3.0 * d - 2.0 * c.cfg.field.long_memory.alpha; break;
    case FieldFamily::farima: c.report["expected_slope"] = 1.0 + 2.0 * c.cfg.field.farima.beta; break;
    default: c.report["expected_slope"] = d; break;
  }
  return t;
}

std::string weights_csv(const Context& c) {
  std::string s = "n";
  const int d = c.cfg.field.d;
  for (int k = 1; k <= d; ++k) s += ",j" + std::to_string(k);
  s += ",b\n";
  for (int n : c.cfg.n) {
    const auto [sites, b] = window_weight_map(c.field, n);
    for (std::size_t i = 0; i < b.size(); ++i) {
      s += std::to_string(n);
      for (int k = 0; k < d; ++k) s += "," + std::to_string(sites[i][k]);
      s += "," + fmt(b[i]) + "\n";
    }
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"tail",    "cdf-diff", "quantile",  "es",     "compare-truncation",
                                                 "regress", "verify",   "cumulants", "scaling"};
  return names;
}

void run_config(const std::string& subcommand, RunConfig cfg, const RunOptions& opts) {
  bool known = false;
  for (const auto& s : subcommands()) known = known || s == subcommand;
  if (!known) throw ConfigError(0, "unknown subcommand '" + subcommand + "'");
  if (opts.threads < 1) throw ConfigError(0, "--threads must be >= 1");
  if (opts.seed) cfg.oracle.seed = *opts.seed;

  Context c{cfg, opts, build_innovation(cfg.innovation), build_field(cfg.field), cfg.oracle.seed};
  Table t;
  if (subcommand == "tail")
    t = run_tail(c);
  else if (subcommand == "cdf-diff")
    t = run_cdf_diff(c);
  else if (subcommand == "quantile")
    t = run_quantile(c, false);
  else if (subcommand == "es")
    t = run_quantile(c, true);
  else if (subcommand == "compare-truncation")
    t = run_truncation(c);
  else if (subcommand == "regress")
    t = run_regress(c);
  else if (subcommand == "verify")
    t = run_verify(c);
  else if (subcommand == "cumulants")
    t = run_cumulants(c);
  else
    t = run_scaling(c);

  nlohmann::ordered_json report;
  report["subcommand"] = subcommand;
  report["rows"] = t.rows.size();
  report["failed_rows"] = t.failed;
  report["field_warnings"] = c.field.warnings();
  for (auto it = c.report.begin(); it != c.report.end(); ++it) report[it.key()] = it.value();

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + opts.out_dir + "': " + ec.message());
  const std::filesystem::path dir(opts.out_dir);
  write_text(dir / "results.csv", to_csv(t));
  write_text(dir / "resolved-config.json", resolved_json(cfg));
  write_text(dir / "report.json", report.dump(2) + "\n");
  if (cfg.weights_csv) write_text(dir / "weights.csv", weights_csv(c));
}

int run(const std::string& subcommand, const std::string& config_path, const RunOptions& opts, std::string& error) {
  try {
    run_config(subcommand, load_config(config_path), opts);
    return 0;
  } catch (const ConfigError& e) {
    error = e.what();
    return 2;
  } catch (const std::exception& e) {
    error = e.what();
    return 1;
  }
}

}  // namespace mdrf
