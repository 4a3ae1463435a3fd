#include "mdrf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "mdrf/error.hpp"

namespace mdrf {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ConfigError(line_of(n), msg); }

void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
  for (auto it = map.begin(); it != map.end(); ++it) {
    const std::string key = it->first.as<std::string>();
    if (!allowed.count(key)) fail(it->first, "unknown key '" + key + "' in '" + section + "'");
  }
}

double as_double(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be a number, got '" + n.Scalar() + "'");
  }
}

long long as_int(const YAML::Node& n, const std::string& what) {
  const double v = as_double(n, what);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(n, what + " must be an integer");
  return static_cast<long long>(v);
}

std::uint64_t as_u64(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a non-negative integer");
  try {
    return n.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be a non-negative integer, got '" + n.Scalar() + "'");
  }
}

bool as_bool(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be true or false");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be true or false");
  }
}

std::string as_string(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a string");
  return n.Scalar();
}

std::vector<double> as_doubles(const YAML::Node& n, const std::string& what) {
  std::vector<double> out;
  if (n.IsScalar()) {
    out.push_back(as_double(n, what));
  } else if (n.IsSequence()) {
    for (const auto& v : n) out.push_back(as_double(v, what));
  } else if (n.IsMap()) {
    check_keys(n, what, {"from", "to", "step"});
    if (!n["from"] || !n["to"] || !n["step"]) fail(n, what + " range needs from, to and step");
    const double from = as_double(n["from"], what + ".from");
    const double to = as_double(n["to"], what + ".to");
    const double step = as_double(n["step"], what + ".step");
    if (!(step > 0.0)) fail(n["step"], what + ".step must be positive");
    if (to < from) fail(n["to"], what + ".to must not be below from");
    const long long count = static_cast<long long>(std::floor((to - from) / step + 1e-9));
    if (count > 1000000) fail(n, what + " range is too long");
    for (long long k = 0; k <= count; ++k) out.push_back(from + static_cast<double>(k) * step);
  } else {
    fail(n, what + " must be a number, a list or a range");
  }
  return out;
}

std::vector<int> as_ints(const YAML::Node& n, const std::string& what, int min_value) {
  std::vector<int> out;
  auto one = [&](const YAML::Node& v) {
    const long long k = as_int(v, what);
    if (k < min_value || k > 100000000) fail(v, what + " must be an integer >= " + std::to_string(min_value));
    out.push_back(static_cast<int>(k));
  };
  if (n.IsScalar())
    one(n);
  else if (n.IsSequence())
    for (const auto& v : n) one(v);
  else
    fail(n, what + " must be an integer or a list of integers");
  return out;
}

void parse_innovation(const YAML::Node& node, InnovationSpec& spec) {
  check_keys(node, "innovation", {"name", "params", "H", "C"});
  if (!node["name"]) fail(node, "innovation.name is required");
  spec.name = as_string(node["name"], "innovation.name");
  if (node["params"]) {
    const YAML::Node p = node["params"];
    if (!p.IsMap()) fail(p, "innovation.params must be a mapping");
    for (auto it = p.begin(); it != p.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      spec.params[key] = as_double(it->second, "innovation.params." + key);
    }
  }
  if (node["H"]) spec.H = as_double(node["H"], "innovation.H");
  if (node["C"]) spec.C = as_double(node["C"], "innovation.C");
  try {
    build_innovation(spec);
  } catch (const InvalidArgument& e) {
    fail(node, e.what());
  }
}

void parse_field(const YAML::Node& node, FieldSpec& spec) {
  check_keys(node, "field", {"family", "d", "m_max", "alpha", "slowly_varying", "angular", "angular_value", "a0",
                             "beta", "phi", "theta", "coefficients"});
  if (node["family"]) {
    const std::string f = as_string(node["family"], "field.family");
    if (f == "iid")
      spec.family = FieldFamily::iid;
    else if (f == "explicit")
      spec.family = FieldFamily::explicit_map;
    else if (f == "short_memory")
      spec.family = FieldFamily::short_memory;
    else if (f == "long_memory")
      spec.family = FieldFamily::long_memory;
    else if (f == "farima")
      spec.family = FieldFamily::farima;
    else
      fail(node["family"], "field.family must be one of iid, explicit, short_memory, long_memory, farima");
  }
  if (node["d"]) {
    const long long d = as_int(node["d"], "field.d");
    if (d < 1 || d > 3) fail(node["d"], "field.d must be 1, 2 or 3");
    spec.d = static_cast<int>(d);
  }
  if (spec.family == FieldFamily::farima && spec.d != 1) fail(node, "farima fields are one-dimensional (d = 1)");
  if (node["m_max"]) {
    const YAML::Node m = node["m_max"];
    if (m.IsScalar() && m.Scalar() == "auto") {
      spec.m_max = -1;
    } else {
      const long long v = as_int(m, "field.m_max");
      if (v < 0) fail(m, "field.m_max must be >= 0 or 'auto'");
      spec.m_max = static_cast<int>(v);
    }
  }
  if (node["alpha"]) {
    spec.long_memory.alpha = as_double(node["alpha"], "field.alpha");
    if (spec.family == FieldFamily::long_memory) {
      const double a = spec.long_memory.alpha;
      if (!(a > 0.5 * spec.d && a < spec.d))
        fail(node["alpha"], "field.alpha=" + node["alpha"].Scalar() + " violates the long-memory constraint alpha in (d/2, d) = (" +
                                (spec.d % 2 ? std::to_string(spec.d / 2) + ".5" : std::to_string(spec.d / 2)) + ", " +
                                std::to_string(spec.d) + ")");
    }
  }
  if (node["slowly_varying"]) {
    const std::string v = as_string(node["slowly_varying"], "field.slowly_varying");
    if (v == "constant")
      spec.long_memory.l = SlowlyVarying::constant;
    else if (v == "log")
      spec.long_memory.l = SlowlyVarying::log;
    else
      fail(node["slowly_varying"], "field.slowly_varying must be 'constant' or 'log'");
  }
  if (node["angular"]) {
    const std::string v = as_string(node["angular"], "field.angular");
    if (v == "constant")
      spec.long_memory.b = Angular::constant;
    else if (v == "first_cosine")
      spec.long_memory.b = Angular::first_cosine;
    else
      fail(node["angular"], "field.angular must be 'constant' or 'first_cosine'");
  }
  if (node["angular_value"]) spec.long_memory.b_value = as_double(node["angular_value"], "field.angular_value");
  if (node["a0"]) spec.long_memory.a0 = as_double(node["a0"], "field.a0");
  if (node["beta"]) {
    spec.farima.beta = as_double(node["beta"], "field.beta");
    if (!(spec.farima.beta > -0.5 && spec.farima.beta < 0.5))
      fail(node["beta"], "field.beta must lie in (-1/2, 1/2)");
  }
  if (node["phi"]) spec.farima.phi = as_doubles(node["phi"], "field.phi");
  if (node["theta"]) spec.farima.theta = as_doubles(node["theta"], "field.theta");
  if (node["coefficients"]) {
    const YAML::Node list = node["coefficients"];
    if (!list.IsSequence()) fail(list, "field.coefficients must be a list of {index, value}");
    for (const auto& item : list) {
      check_keys(item, "field.coefficients", {"index", "value"});
      if (!item["index"] || !item["value"]) fail(item, "each coefficient needs index and value");
      const std::vector<double> idx = as_doubles(item["index"], "field.coefficients.index");
      if (static_cast<int>(idx.size()) != spec.d) fail(item["index"], "coefficient index must have d coordinates");
      Index i{};
      for (int k = 0; k < spec.d; ++k) {
        if (idx[k] != std::floor(idx[k])) fail(item["index"], "coefficient index must be integral");
        i[k] = static_cast<int>(idx[k]);
      }
      spec.coefficients[i] += as_double(item["value"], "field.coefficients.value");
    }
  }
  if (spec.family == FieldFamily::explicit_map && spec.coefficients.empty())
    fail(node, "explicit fields need a non-empty coefficients list");
  try {
    build_field(spec);
  } catch (const InvalidArgument& e) {
    fail(node, e.what());
  }
}

TiltOptions parse_tilt(const YAML::Node& node, RunConfig& cfg) {
  check_keys(node, "tilt", {"t_max", "form", "series_order", "small_t"});
  TiltOptions t = cfg.tilt;
  if (node["t_max"]) {
    t.t_max = as_double(node["t_max"], "tilt.t_max");
    if (!(t.t_max > 0.0 && t.t_max < 1.0)) fail(node["t_max"], "tilt.t_max must lie in (0, 1)");
  }
  if (node["small_t"]) {
    t.small_t = as_double(node["small_t"], "tilt.small_t");
    if (!(t.small_t >= 0.0)) fail(node["small_t"], "tilt.small_t must be >= 0");
  }
  if (node["form"]) {
    const std::string f = as_string(node["form"], "tilt.form");
    if (f == "theorem")
      cfg.form = TailForm::theorem_form;
    else if (f == "saddlepoint")
      cfg.form = TailForm::saddlepoint_form;
    else
      fail(node["form"], "tilt.form must be 'theorem' or 'saddlepoint'");
  }
  if (node["series_order"]) {
    const long long k = as_int(node["series_order"], "tilt.series_order");
    if (k < 2 || k > 16) fail(node["series_order"], "tilt.series_order must lie in [2, 16]");
    cfg.series_order = static_cast<int>(k);
  }
  return t;
}

void parse_oracle(const YAML::Node& node, OracleSpec& o) {
  check_keys(node, "oracle", {"method", "n_samples", "seed", "mid_lattice", "tolerance_k"});
  if (node["method"]) {
    o.method = as_string(node["method"], "oracle.method");
    static const std::set<std::string> methods = {"auto", "tilted_is", "plain_mc", "exact_enum", "irwin_hall"};
    if (!methods.count(o.method))
      fail(node["method"], "oracle.method must be one of auto, tilted_is, plain_mc, exact_enum, irwin_hall");
  }
  if (node["n_samples"]) {
    o.n_samples = as_u64(node["n_samples"], "oracle.n_samples");
    if (o.n_samples < 1000) fail(node["n_samples"], "oracle.n_samples must be >= 1000");
  }
  if (node["seed"]) o.seed = as_u64(node["seed"], "oracle.seed");
  if (node["mid_lattice"]) o.mid_lattice = as_bool(node["mid_lattice"], "oracle.mid_lattice");
  if (node["tolerance_k"]) {
    o.tolerance_k = as_double(node["tolerance_k"], "oracle.tolerance_k");
    if (!(o.tolerance_k > 0.0)) fail(node["tolerance_k"], "oracle.tolerance_k must be positive");
  }
}

void parse_regression(const YAML::Node& node, RegressionSpec& r, int d) {
  check_keys(node, "regression", {"kernel", "bandwidth", "z"});
  if (node["kernel"]) {
    const std::string k = as_string(node["kernel"], "regression.kernel");
    if (k == "epanechnikov")
      r.kernel = Kernel::epanechnikov;
    else if (k == "gaussian")
      r.kernel = Kernel::gaussian;
    else
      fail(node["kernel"], "regression.kernel must be 'epanechnikov' or 'gaussian'");
  }
  if (node["bandwidth"]) {
    r.bandwidth = as_double(node["bandwidth"], "regression.bandwidth");
    if (!(r.bandwidth > 0.0)) fail(node["bandwidth"], "regression.bandwidth must be positive");
  }
  if (node["z"]) {
    const YAML::Node z = node["z"];
    if (!z.IsSequence()) fail(z, "regression.z must be a list of points");
    for (const auto& p : z) {
      std::vector<double> pt = as_doubles(p, "regression.z");
      if (static_cast<int>(pt.size()) != d) fail(p, "regression.z points must have d coordinates");
      r.z.push_back(std::move(pt));
    }
  }
}

}  // namespace

InnovationModel build_innovation(const InnovationSpec& spec) {
  std::map<std::string, double> params = spec.params;
  if (spec.H) params["H"] = *spec.H;
  if (spec.C) params["C"] = *spec.C;
  return make_builtin(spec.name, params);
}

CoefficientField build_field(const FieldSpec& spec) {
  switch (spec.family) {
    case FieldFamily::iid: return CoefficientField::iid(spec.d);
    case FieldFamily::explicit_map: return CoefficientField::explicit_map(spec.d, spec.coefficients);
    case FieldFamily::short_memory: return CoefficientField::short_memory(spec.d, spec.m_max);
    case FieldFamily::long_memory: return CoefficientField::long_memory(spec.d, spec.long_memory, spec.m_max);
    case FieldFamily::farima: return CoefficientField::farima(spec.farima, spec.m_max);
  }
  throw InvalidArgument("unknown field family");
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  RunConfig cfg;
  if (!root || root.IsNull()) throw ConfigError(0, "configuration is empty");
  check_keys(root, "config",
             {"innovation", "field", "window", "grid", "tilt", "oracle", "truncation", "regression", "scaling", "output"});
  if (!root["innovation"]) throw ConfigError(1, "'innovation' section is required");
  parse_innovation(root["innovation"], cfg.innovation);
  if (root["field"]) parse_field(root["field"], cfg.field);
  if (root["window"]) {
    const YAML::Node w = root["window"];
    check_keys(w, "window", {"n"});
    if (!w["n"]) fail(w, "window.n is required");
    cfg.n = as_ints(w["n"], "window.n", 1);
    if (cfg.n.empty()) fail(w["n"], "window.n must not be empty");
  }
  if (root["grid"]) {
    const YAML::Node g = root["grid"];
    check_keys(g, "grid", {"x", "alpha"});
    if (g["x"]) {
      cfg.x = as_doubles(g["x"], "grid.x");
      for (double v : cfg.x)
        if (!std::isfinite(v)) fail(g["x"], "grid.x values must be finite");
    }
    if (g["alpha"]) {
      cfg.alpha = as_doubles(g["alpha"], "grid.alpha");
      for (double a : cfg.alpha)
        if (!(a > 1e-12 && a < 1.0)) fail(g["alpha"], "grid.alpha values must lie in (1e-12, 1)");
    }
  }
  if (root["tilt"]) cfg.tilt = parse_tilt(root["tilt"], cfg);
  if (root["oracle"]) parse_oracle(root["oracle"], cfg.oracle);
  if (root["truncation"]) {
    const YAML::Node t = root["truncation"];
    check_keys(t, "truncation", {"m"});
    if (t["m"]) cfg.truncation_m = as_ints(t["m"], "truncation.m", 0);
  }
  if (root["regression"]) parse_regression(root["regression"], cfg.regression, cfg.field.d);
  if (root["scaling"]) {
    const YAML::Node s = root["scaling"];
    check_keys(s, "scaling", {"n"});
    if (s["n"]) cfg.scaling_n = as_ints(s["n"], "scaling.n", 1);
  }
  if (root["output"]) {
    const YAML::Node o = root["output"];
    check_keys(o, "output", {"weights_csv"});
    if (o["weights_csv"]) cfg.weights_csv = as_bool(o["weights_csv"], "output.weights_csv");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string resolved_json(const RunConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json j;
  const InnovationModel inn = build_innovation(cfg.innovation);
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : inn.params()) params[k] = v;
  j["innovation"] = {{"name", inn.name()}, {"params", params}, {"H", inn.radius_H()}, {"C", inn.bound_C()}};

  const CoefficientField field = build_field(cfg.field);
  ordered_json f;
  f["family"] = to_string(cfg.field.family);
  f["d"] = cfg.field.d;
  f["m_max"] = field.m_max();
  if (cfg.field.family == FieldFamily::long_memory) {
    f["alpha"] = cfg.field.long_memory.alpha;
    f["slowly_varying"] = cfg.field.long_memory.l == SlowlyVarying::log ? "log" : "constant";
    f["angular"] = cfg.field.long_memory.b == Angular::first_cosine ? "first_cosine" : "constant";
    f["angular_value"] = cfg.field.long_memory.b_value;
    f["a0"] = cfg.field.long_memory.a0;
  }
  if (cfg.field.family == FieldFamily::farima) {
    f["beta"] = cfg.field.farima.beta;
    f["phi"] = cfg.field.farima.phi;
    f["theta"] = cfg.field.farima.theta;
  }
  if (cfg.field.family == FieldFamily::explicit_map) {
    ordered_json list = ordered_json::array();
    for (const auto& [i, v] : cfg.field.coefficients)
      list.push_back({{"index", std::vector<int>(i.begin(), i.begin() + cfg.field.d)}, {"value", v}});
    f["coefficients"] = list;
  }
  f["warnings"] = field.warnings();
  j["field"] = f;
  j["window"] = {{"n", cfg.n}};
  j["grid"] = {{"x", cfg.x}, {"alpha", cfg.alpha}};
  j["tilt"] = {{"t_max", cfg.tilt.t_max},
               {"small_t", cfg.tilt.small_t},
               {"form", cfg.form == TailForm::theorem_form ? "theorem" : "saddlepoint"},
               {"series_order", cfg.series_order}};
  j["oracle"] = {{"method", cfg.oracle.method},
                 {"n_samples", cfg.oracle.n_samples},
                 {"seed", cfg.oracle.seed},
                 {"mid_lattice", cfg.oracle.mid_lattice},
                 {"tolerance_k", cfg.oracle.tolerance_k}};
  j["truncation"] = {{"m", cfg.truncation_m}};
  j["regression"] = {{"kernel", to_string(cfg.regression.kernel)},
                     {"bandwidth", cfg.regression.bandwidth},
                     {"z", cfg.regression.z}};
  j["scaling"] = {{"n", cfg.scaling_n}};
  j["output"] = {{"weights_csv", cfg.weights_csv}};
  return j.dump(2) + "\n";
}

}  // namespace mdrf
