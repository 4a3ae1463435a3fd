#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdrf/field.hpp"
#include "mdrf/regress.hpp"
#include "mdrf/tilt.hpp"

namespace mdrf {

struct InnovationSpec {
  std::string name = "gaussian";
  std::map<std::string, double> params;
  std::optional<double> H;
  std::optional<double> C;
};

struct FieldSpec {
  FieldFamily family = FieldFamily::iid;
  int d = 1;
  int m_max = -1;  // automatic
  LongMemorySpec long_memory;
  FarimaSpec farima;
  std::map<Index, double> coefficients;
};

struct OracleSpec {
  std::string method = "auto";  // auto, tilted_is, plain_mc, exact_enum, irwin_hall
  std::uint64_t n_samples = 1000000;
  std::uint64_t seed = 1;
  bool mid_lattice = true;
  double tolerance_k = 1.5;
};

struct RegressionSpec {
  Kernel kernel = Kernel::epanechnikov;
  double bandwidth = 0.1;
  std::vector<std::vector<double>> z;
};

/// Fully resolved run configuration: every field holds a value, defaults
/// included.
struct RunConfig {
  InnovationSpec innovation;
  FieldSpec field;
  std::vector<int> n = {100};
  std::vector<double> x;
  std::vector<double> alpha;
  TiltOptions tilt;
  TailForm form = TailForm::theorem_form;
  int series_order = 8;
  OracleSpec oracle;
  std::vector<int> truncation_m;
  RegressionSpec regression;
  std::vector<int> scaling_n = {50, 100, 200, 400};
  bool weights_csv = false;
};

/// Parses and validates a YAML run configuration. Throws ConfigError with the
/// offending line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The resolved configuration as pretty-printed JSON.
std::string resolved_json(const RunConfig& cfg);

InnovationModel build_innovation(const InnovationSpec& spec);
CoefficientField build_field(const FieldSpec& spec);

}  // namespace mdrf
