#include "rgm/config.hpp"

#include <cstdlib>

#include <CLI11.hpp>

#include "rgm/errors.hpp"
#include "rgm/record.hpp"

namespace rgm {

void ConfigBinding::finalize() {
  cfg.strategy = parse_strategy(strategy);
  cfg.mode = parse_seed_mode(mode);
  cfg.pi_mode = parse_pi_mode(pi_mode);
}

void add_run_options(CLI::App& app, ConfigBinding& b) {
  RunConfig& c = b.cfg;
  app.add_option("--config", b.config_path, "flat key = value config file; flags override");
  app.add_option("--n", c.n, "vertex count")->capture_default_str();
  app.add_option("--rho", c.rho, "correlation in [0,1]")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "corruption fraction")->capture_default_str();
  app.add_option("--strategy", b.strategy, "planted-clique-weight | rank1-spike | zero-out | adaptive-sign-flip")
      ->capture_default_str();
  app.add_option("--k0", c.k0, "initial seed-set size K0")->capture_default_str();
  app.add_option("--gamma", c.gamma, "K_{t+1} = gamma K_t^2 (<= 0: 4/K0)")->capture_default_str();
  app.add_option("--divisor", c.divisor, "columns per round = K_t / divisor")->capture_default_str();
  app.add_option("--min_rounds", c.min_rounds, "run at least this many AMP rounds")->capture_default_str();
  app.add_option("--denoiser_b", c.denoiser_b, "cosine frequency b of the denoiser")->capture_default_str();
  app.add_option("--threshold_mult", c.threshold_mult, "cleaning threshold multiple of sqrt(n)")->capture_default_str();
  app.add_option("--clique_weight", c.clique_weight, "planted-clique-weight magnitude")->capture_default_str();
  app.add_option("--spike_lambda", c.spike_lambda, "rank1-spike strength (<= 0: 20 sqrt(n))")->capture_default_str();
  app.add_option("--max_resamples", c.max_resamples, "beta resample cap")->capture_default_str();
  app.add_option("--max_swaps", c.max_swaps, "refinement swap cap (<= 0: 10 n)")->capture_default_str();
  app.add_option("--pi_mode", b.pi_mode, "identity | uniform-random")->capture_default_str();
  app.add_option("--mode", b.mode, "oracle-seed | tiny-enumeration")->capture_default_str();
  app.add_option("--trials", c.trials, "independent trials")->capture_default_str();
  app.add_option("--bad_pairs", c.bad_pairs, "negative-control seed pairs per trial")->capture_default_str();
  app.add_option("--replay_clean", c.replay_clean, "also run the uncorrupted pair and report the h gap")
      ->capture_default_str();
  app.add_option("--telemetry", c.telemetry, "record AMP concentration gaps")->capture_default_str();
  app.add_option("--seed", c.seed, "master seed")->capture_default_str();
  app.add_option("--seed_instance", c.stream_overrides.instance, "instance stream override (0: derived)");
  app.add_option("--seed_noise", c.stream_overrides.noise, "noise stream override (0: derived)");
  app.add_option("--seed_beta", c.stream_overrides.beta, "beta stream override (0: derived)");
  app.add_option("--seed_corruption", c.stream_overrides.corruption, "corruption stream override (0: derived)");
  app.add_option("--seed_control", c.stream_overrides.control, "negative-control stream override (0: derived)");
  app.add_option("--manifest", c.manifest_path, "JSON manifest output path");
  app.add_option("--csv", c.csv_path, "CSV output path");
  app.add_option("--dump_dir", c.dump_dir, "directory for binary/CSV matrix dumps");
  app.add_option("--trace", c.trace_path, "JSON-lines cleaning trace path");
}

void apply_config_file(CLI::App& app, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw ParameterError("cannot read config " + path + ": " + e.what());
  }
  for (const CLI::ConfigItem& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    if (!it.parents.empty()) throw ParameterError("config sections are not supported: " + it.fullname());
    CLI::Option* opt = app.get_option_no_throw("--" + it.name);
    if (!opt || it.name == "config") throw ParameterError("unknown config key '" + it.name + "'");
    if (opt->count() > 0) continue;
    try {
      for (const std::string& v : it.inputs) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ParameterError("config key '" + it.name + "': " + e.what());
    }
  }
}

SweepGrid SweepBinding::grid(const RunConfig& base) const {
  SweepGrid g;
  g.rho = rho.empty() ? std::vector<double>{base.rho} : rho;
  g.epsilon = epsilon.empty() ? std::vector<double>{base.epsilon} : epsilon;
  g.n = n.empty() ? std::vector<Index>{base.n} : n;
  if (strategy.empty()) {
    g.strategy = {base.strategy};
  } else {
    for (const std::string& s : strategy) g.strategy.push_back(parse_strategy(s));
  }
  return g;
}

void add_sweep_options(CLI::App& app, SweepBinding& b) {
  app.add_option("--rho_list", b.rho, "comma-separated rho grid")->delimiter(',');
  app.add_option("--epsilon_list", b.epsilon, "comma-separated epsilon grid")->delimiter(',');
  app.add_option("--n_list", b.n, "comma-separated n grid")->delimiter(',');
  app.add_option("--strategy_list", b.strategy, "comma-separated strategy grid")->delimiter(',');
}

std::optional<int> workers_from_env() {
  const char* s = std::getenv("RGM_WORKERS");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw ParameterError(std::string("RGM_WORKERS must be a positive integer, got '") + s + "'");
  return static_cast<int>(v);
}

}  // namespace rgm
