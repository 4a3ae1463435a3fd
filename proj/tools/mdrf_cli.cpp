#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <string>

#include "mdrf/mdrf.h"

int main(int argc, char** argv) {
  std::string names;
  for (const char* const* s = mdrf_subcommands(); *s; ++s) names += std::string(names.empty() ? "" : ", ") + *s;

  CLI::App app{"Moderate-deviation tail approximations for linear random fields"};
  app.set_version_flag("--version", std::string(mdrf_version()));
  std::string subcommand, config, out = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("subcommand", subcommand, "One of: " + names)->required();
  app.add_option("--config", config, "YAML run configuration")->required();
  app.add_option("--out", out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Overrides oracle.seed");
  app.add_option("--threads", threads, "Monte Carlo worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const int rc = mdrf_run(subcommand.c_str(), config.c_str(), out.c_str(), seed_opt->count() > 0, seed, threads);
  if (rc != 0) std::fprintf(stderr, "mdrf %s: %s\n", subcommand.c_str(), mdrf_last_error());
  return rc;
}
