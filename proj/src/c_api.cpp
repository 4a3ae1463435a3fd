#include "mdrf/mdrf.h"

#include <exception>
#include <functional>
#include <map>
#include <vector>
#include <string>

#include "mdrf/error.hpp"
#include "mdrf/mc.hpp"
#include "mdrf/risk.hpp"
#include "mdrf/runner.hpp"

struct mdrf_innovation {
  mdrf::InnovationModel model;
};
struct mdrf_field {
  mdrf::CoefficientField field;
};
struct mdrf_model {
  mdrf::PartialSumModel model;
};

namespace {

thread_local std::string g_last_error;

mdrf_status code_of(mdrf::ErrorCode c) {
  switch (c) {
    case mdrf::ErrorCode::invalid_argument: return MDRF_INVALID_ARGUMENT;
    case mdrf::ErrorCode::out_of_range: return MDRF_OUT_OF_RANGE;
    case mdrf::ErrorCode::numeric: return MDRF_NUMERIC;
    case mdrf::ErrorCode::config: return MDRF_CONFIG;
    case mdrf::ErrorCode::io: return MDRF_IO;
  }
  return MDRF_INTERNAL;
}

template <class F>
mdrf_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return MDRF_OK;
  } catch (const mdrf::Error& e) {
    g_last_error = e.what();
    return code_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MDRF_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return MDRF_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw mdrf::InvalidArgument(std::string(what) + " must not be null");
}

mdrf::TiltOptions tilt_opts(double t_max) {
  mdrf::TiltOptions o;
  if (t_max > 0.0) o.t_max = t_max;
  return o;
}

void fill(const mdrf::TailEstimate& e, mdrf_tail* out) {
  *out = {e.value, e.log_value, e.correction_factor, e.error_scale, e.additive_bound,
          e.x,     e.t,         e.z,                 e.lambda_t,    static_cast<int>(e.regime)};
}

void fill(const mdrf::RiskResult& r, mdrf_risk* out) {
  *out = {r.x_alpha, r.Q, r.es, r.quadrature_error, r.error_scale, static_cast<int>(r.regime)};
}

void fill(const mdrf::OracleEstimate& o, mdrf_oracle* out) {
  *out = {o.p_hat, o.std_err, o.tilt_z.value_or(0.0), o.n_samples};
}

mdrf_status make_field(mdrf_field** out, const std::function<mdrf::CoefficientField()>& build) {
  return guarded([&] {
    need(out, "out");
    *out = new mdrf_field{build()};
  });
}

}  // namespace

extern "C" {

const char* mdrf_last_error(void) { return g_last_error.c_str(); }

const char* mdrf_version(void) { return "0.1.0"; }

mdrf_status mdrf_innovation_create(const char* name, const char* const* keys, const double* values, size_t n_params,
                                   mdrf_innovation** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    if (n_params > 0) {
      need(keys, "keys");
      need(values, "values");
    }
    std::map<std::string, double> params;
    for (size_t i = 0; i < n_params; ++i) {
      need(keys[i], "parameter name");
      params[keys[i]] = values[i];
    }
    *out = new mdrf_innovation{mdrf::make_builtin(name, params)};
  });
}

void mdrf_innovation_destroy(mdrf_innovation* h) { delete h; }

mdrf_status mdrf_innovation_info(const mdrf_innovation* h, double* H, double* C, double* variance) {
  return guarded([&] {
    need(h, "innovation");
    if (H) *H = h->model.radius_H();
    if (C) *C = h->model.bound_C();
    if (variance) *variance = h->model.variance();
  });
}

mdrf_status mdrf_innovation_cumulant(const mdrf_innovation* h, int k, double* out) {
  return guarded([&] {
    need(h, "innovation");
    need(out, "out");
    if (k < 1) throw mdrf::InvalidArgument("cumulant order must be >= 1");
    *out = h->model.cumulant(k);
  });
}

mdrf_status mdrf_field_iid(int d, mdrf_field** out) {
  return make_field(out, [&] { return mdrf::CoefficientField::iid(d); });
}

mdrf_status mdrf_field_short_memory(int d, int m_max, mdrf_field** out) {
  return make_field(out, [&] { return mdrf::CoefficientField::short_memory(d, m_max); });
}

mdrf_status mdrf_field_long_memory(int d, double alpha, int slowly_varying, int angular, double b_value, int m_max,
                                   mdrf_field** out) {
  return make_field(out, [&] {
    mdrf::LongMemorySpec s;
    s.alpha = alpha;
    s.l = slowly_varying ? mdrf::SlowlyVarying::log : mdrf::SlowlyVarying::constant;
    s.b = angular ? mdrf::Angular::first_cosine : mdrf::Angular::constant;
    s.b_value = b_value;
    return mdrf::CoefficientField::long_memory(d, s, m_max);
  });
}

mdrf_status mdrf_field_farima(double beta, const double* phi, size_t p, const double* theta, size_t q, int m_max,
                              mdrf_field** out) {
  return make_field(out, [&] {
    if (p > 0) need(phi, "phi");
    if (q > 0) need(theta, "theta");
    mdrf::FarimaSpec s;
    s.beta = beta;
    s.phi.assign(phi, phi + p);
    s.theta.assign(theta, theta + q);
    return mdrf::CoefficientField::farima(s, m_max);
  });
}

mdrf_status mdrf_field_explicit(int d, const int* indices, const double* coeffs, size_t count, mdrf_field** out) {
  return make_field(out, [&] {
    if (d < 1 || d > 3) throw mdrf::InvalidArgument("dimension must be 1, 2 or 3");
    if (count > 0) {
      need(indices, "indices");
      need(coeffs, "coeffs");
    }
    std::map<mdrf::Index, double> m;
    for (size_t i = 0; i < count; ++i) {
      mdrf::Index idx{0, 0, 0};
      for (int k = 0; k < d; ++k) idx[k] = indices[i * d + k];
      m[idx] = coeffs[i];
    }
    return mdrf::CoefficientField::explicit_map(d, m);
  });
}

void mdrf_field_destroy(mdrf_field* h) { delete h; }

mdrf_status mdrf_field_m_max(const mdrf_field* h, int* out) {
  return guarded([&] {
    need(h, "field");
    need(out, "out");
    *out = h->field.m_max();
  });
}

mdrf_status mdrf_model_window(const mdrf_field* field, const mdrf_innovation* innovation, int n, mdrf_model** out) {
  return guarded([&] {
    need(field, "field");
    need(innovation, "innovation");
    need(out, "out");
    *out = new mdrf_model{mdrf::window_weights(field->field, innovation->model, n)};
  });
}

mdrf_status mdrf_model_weights(const mdrf_innovation* innovation, int d, const int* sites, const double* b,
                               size_t count, mdrf_model** out) {
  return guarded([&] {
    need(innovation, "innovation");
    need(out, "out");
    if (d < 1 || d > 3) throw mdrf::InvalidArgument("dimension must be 1, 2 or 3");
    need(sites, "sites");
    need(b, "b");
    std::vector<mdrf::Index> idx(count, mdrf::Index{0, 0, 0});
    for (size_t i = 0; i < count; ++i)
      for (int k = 0; k < d; ++k) idx[i][k] = sites[i * d + k];
    *out = new mdrf_model{mdrf::PartialSumModel(innovation->model, d, 0, idx, std::vector<double>(b, b + count))};
  });
}

void mdrf_model_destroy(mdrf_model* h) { delete h; }

mdrf_status mdrf_model_info(const mdrf_model* h, double* B_n, double* M_n, double* H_n, double* C_n) {
  return guarded([&] {
    need(h, "model");
    if (B_n) *B_n = h->model.B_n();
    if (M_n) *M_n = h->model.M_n();
    if (H_n) *H_n = h->model.H_n();
    if (C_n) *C_n = h->model.C_n();
  });
}

mdrf_status mdrf_solve_saddle(const mdrf_model* h, double x, double t_max, mdrf_saddle_point* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    const mdrf::TiltSolution s = mdrf::solve_saddle_signed(h->model, x, tilt_opts(t_max));
    *out = {s.t, s.z, s.M_bar, s.B_bar, s.exponent, s.lambda_t, s.newton_iters};
  });
}

mdrf_status mdrf_tail_upper(const mdrf_model* h, double x, mdrf_tail_form form, double t_max, mdrf_tail* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::tail_upper(h->model, x, static_cast<mdrf::TailForm>(form), tilt_opts(t_max)), out);
  });
}

mdrf_status mdrf_tail_lower(const mdrf_model* h, double x, mdrf_tail_form form, double t_max, mdrf_tail* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::tail_lower(h->model, x, static_cast<mdrf::TailForm>(form), tilt_opts(t_max)), out);
  });
}

mdrf_status mdrf_quantile(const mdrf_model* h, double alpha, double t_max, mdrf_risk* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::quantile(h->model, alpha, tilt_opts(t_max)), out);
  });
}

mdrf_status mdrf_expected_shortfall(const mdrf_model* h, double alpha, double t_max, mdrf_risk* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::expected_shortfall(h->model, alpha, tilt_opts(t_max)), out);
  });
}

mdrf_status mdrf_tilted_is(const mdrf_model* h, double threshold, uint64_t n_samples, uint64_t seed, int threads,
                           mdrf_oracle* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::tilted_is(h->model, threshold, mdrf::McOptions{n_samples, seed, threads}), out);
  });
}

mdrf_status mdrf_plain_mc(const mdrf_model* h, double threshold, uint64_t n_samples, uint64_t seed, int threads,
                          mdrf_oracle* out) {
  return guarded([&] {
    need(h, "model");
    need(out, "out");
    fill(mdrf::plain_mc(h->model, threshold, mdrf::McOptions{n_samples, seed, threads}), out);
  });
}

int mdrf_run(const char* subcommand, const char* config_path, const char* out_dir, int has_seed, uint64_t seed,
             int threads) {
  g_last_error.clear();
  if (!subcommand || !config_path) {
    g_last_error = "subcommand and config path are required";
    return 2;
  }
  try {
    mdrf::RunOptions opts;
    if (out_dir) opts.out_dir = out_dir;
    if (has_seed) opts.seed = seed;
    opts.threads = threads;
    return mdrf::run(subcommand, config_path, opts, g_last_error);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 1;
  }
}

const char* const* mdrf_subcommands(void) {
  static const std::vector<const char*> names = [] {
    std::vector<const char*> v;
    for (const auto& s : mdrf::subcommands()) v.push_back(s.c_str());
    v.push_back(nullptr);
    return v;
  }();
  return names.data();
}

}  // extern "C"
