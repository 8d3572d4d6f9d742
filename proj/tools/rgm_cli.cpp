#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rgm/config.hpp"
#include "rgm/errors.hpp"
#include "rgm/kernels.hpp"
#include "rgm/record.hpp"
#include "rgm/selftest.hpp"

namespace {

void print_trial(const rgm::TrialRecord& t) {
  std::cerr << "trial " << t.trial << ": ";
  if (!t.ok) {
    std::cerr << "FAILED at " << t.failed_stage << " (" << t.error_kind << "): " << t.error_message << '\n';
    return;
  }
  std::cerr << "post-LAP " << t.post_lap_overlap.value_or(-1) << ", post-refine " << t.post_refine_overlap.value_or(-1)
            << ", final " << t.final_overlap.value_or(-1) << ", |S|=" << t.s_size << " |T|=" << t.t_size
            << ", swaps=" << t.swaps << '\n';
}

int finish(const rgm::RunRecord& r, bool quiet) {
  if (!quiet) {
    for (const auto& t : r.trials) print_trial(t);
  }
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust matching of corrupted correlated Gaussian matrices"};
  app.require_subcommand(1);

  rgm::ConfigBinding run_b;
  auto* run = app.add_subcommand("run", "run the pipeline and write a JSON manifest");
  rgm::add_run_options(*run, run_b);
  bool quiet = false;
  run->add_flag("--quiet", quiet, "no per-trial summary on stderr");

  rgm::ConfigBinding sweep_b;
  rgm::SweepBinding grid_b;
  auto* sw = app.add_subcommand("sweep", "cartesian grid of runs; CSV plus JSON summary");
  rgm::add_run_options(*sw, sweep_b);
  rgm::add_sweep_options(*sw, grid_b);
  std::string summary_path;
  sw->add_option("--summary", summary_path, "JSON summary output path");

  auto* st = app.add_subcommand("selftest", "run the fast property suites");

  double c_rho = 0.8, c_b = 1.0;
  rgm::Index c_n = 1000, c_k0 = 24;
  auto* cs = app.add_subcommand("constants", "print reference constants as JSON");
  cs->add_option("--rho", c_rho)->capture_default_str();
  cs->add_option("--denoiser_b", c_b)->capture_default_str();
  cs->add_option("--n", c_n)->capture_default_str();
  cs->add_option("--k0", c_k0)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (auto w = rgm::workers_from_env()) rgm::set_worker_count(*w);

    if (*run) {
      rgm::apply_config_file(*run, run_b.config_path);
      run_b.finalize();
      const rgm::RunRecord r = rgm::run_pipeline(run_b.cfg);
      if (!run_b.cfg.manifest_path.empty()) {
        rgm::write_manifest(run_b.cfg.manifest_path, r);
      } else {
        std::cout << rgm::to_json(r).dump(2) << '\n';
      }
      if (!run_b.cfg.csv_path.empty()) {
        std::ofstream os(run_b.cfg.csv_path);
        rgm::write_sweep_csv(os, {rgm::SweepCell{0, run_b.cfg, r}});
      }
      return finish(r, quiet);
    }
    if (*sw) {
      rgm::apply_config_file(*sw, sweep_b.config_path);
      sweep_b.finalize();
      const auto grid = grid_b.grid(sweep_b.cfg);
      const auto cells = rgm::sweep(sweep_b.cfg, grid);
      if (!sweep_b.cfg.csv_path.empty()) {
        std::ofstream os(sweep_b.cfg.csv_path);
        if (!os) throw rgm::ParameterError("cannot open " + sweep_b.cfg.csv_path);
        rgm::write_sweep_csv(os, cells);
      } else {
        rgm::write_sweep_csv(std::cout, cells);
      }
      const auto summary = rgm::sweep_summary(cells);
      if (!summary_path.empty()) {
        std::ofstream os(summary_path);
        os << summary.dump(2) << '\n';
      }
      if (!sweep_b.cfg.manifest_path.empty()) {
        rgm::Json all = rgm::Json::array();
        for (const auto& c : cells) all.push_back(rgm::to_json(c.record));
        std::ofstream os(sweep_b.cfg.manifest_path);
        os << all.dump(2) << '\n';
      }
      return 0;
    }
    if (*st) {
      bool all = true;
      for (const auto& a : rgm::run_selftest()) {
        std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << "  " << a.detail << '\n';
        all = all && a.pass;
      }
      return all ? 0 : 3;
    }
    if (*cs) {
      std::cout << rgm::constants_json(c_rho, c_b, c_n, c_k0).dump(2) << '\n';
      return 0;
    }
  } catch (const rgm::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
