#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgm/pipeline.hpp"

namespace CLI {
class App;
}

namespace rgm {

/// Flag/config-file bindings for RunConfig. Every flag `--key` is also
/// accepted as `key = value` in the file given by `--config`.
struct ConfigBinding {
  RunConfig cfg;
  std::string strategy = "zero-out";
  std::string mode = "oracle-seed";
  std::string pi_mode = "uniform-random";
  std::string config_path;

  /// Resolves the string-valued keys into cfg.
  void finalize();
};

void add_run_options(CLI::App& app, ConfigBinding& b);

/// Fills options of `app` still unset on the command line from a flat
/// `key = value` file. Throws ParameterError on unknown keys or bad values.
void apply_config_file(CLI::App& app, const std::string& path);

struct SweepBinding {
  std::vector<double> rho;
  std::vector<double> epsilon;
  std::vector<Index> n;
  std::vector<std::string> strategy;

  /// Empty lists fall back to the single base value.
  SweepGrid grid(const RunConfig& base) const;
};

void add_sweep_options(CLI::App& app, SweepBinding& b);

/// Worker count from RGM_WORKERS, if set. Throws ParameterError on garbage.
std::optional<int> workers_from_env();

}  // namespace rgm
