#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgm/amp.hpp"
#include "rgm/assign.hpp"
#include "rgm/model.hpp"
#include "rgm/preprocess.hpp"
#include "rgm/refine.hpp"
#include "rgm/spectral.hpp"

namespace rgm {

enum class SeedMode { oracle, tiny_enumeration };

struct StreamSeeds {
  std::uint64_t instance = 0;
  std::uint64_t noise = 0;
  std::uint64_t beta = 0;
  std::uint64_t corruption = 0;
  std::uint64_t control = 0;
};

struct RunConfig {
  Index n = 1000;
  double rho = 0.8;
  double epsilon = 0.0;
  Strategy strategy = Strategy::zero_out;
  Index k0 = 24;
  double gamma = 0.0;  ///< <= 0: 4 / k0
  Index divisor = 12;
  int min_rounds = 2;
  double denoiser_b = 1.0;
  double threshold_mult = 10.0;
  double clique_weight = 5.0;
  double spike_lambda = 0.0;  ///< <= 0: 20 sqrt(n)
  int max_resamples = 64;
  Index max_swaps = 0;        ///< <= 0: 10 n
  PiMode pi_mode = PiMode::uniform;
  SeedMode mode = SeedMode::oracle;
  int trials = 1;
  /// Negative-control seed pairs (v random, v != pi*(u)) per trial.
  int bad_pairs = 0;
  /// Also run the uncorrupted pair with shared G, H, beta and report the h gap.
  bool replay_clean = false;
  bool telemetry = true;
  std::uint64_t seed = 1;
  /// Per-stream overrides; 0 derives the stream from `seed`.
  StreamSeeds stream_overrides;

  std::string manifest_path;
  std::string csv_path;
  std::string dump_dir;
  std::string trace_path;
};

/// Throws ParameterError on the first violated precondition.
void validate(const RunConfig& cfg);

/// Stream seeds for one trial: derive_seed(derive_seed(seed, trial), stream),
/// or derive_seed(override, trial) when an override is set.
StreamSeeds trial_seeds(const RunConfig& cfg, int trial);

struct Assertion {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct TrialRecord {
  int trial = 0;
  bool ok = false;
  std::string failed_stage;
  std::string error_kind;
  std::string error_message;
  int exit_code = 0;
  StreamSeeds seeds;

  Index q_size = 0;
  Index s_size = 0;
  Index t_size = 0;
  int iters_a = 0;
  int iters_b = 0;

  std::vector<Index> ks;
  std::vector<double> eps_prior;
  int t_star = 0;
  int rounds = 0;
  std::vector<RoundTelemetry> spectral;
  std::vector<Concentration> concentration;

  std::optional<double> post_lap_overlap;
  std::optional<double> post_refine_overlap;
  std::optional<double> final_overlap;
  std::vector<double> bad_post_lap_overlaps;
  std::vector<double> bad_post_refine_overlaps;
  Index swaps = 0;
  bool swaps_truncated = false;
  std::vector<SwapRecord> swap_trace;
  std::size_t selected = 0;
  std::vector<std::int64_t> select_scores;
  std::optional<std::int64_t> pi_star_score;
  std::optional<double> stability_gap;
  /// tiny-enumeration: number of (U, V) pairs tried and whether a good one existed.
  Index enumerated_pairs = 0;
  std::optional<bool> good_pair_present;

  std::map<std::string, double> seconds;
  std::vector<Assertion> assertions;

  bool assertions_pass() const;
};

/// Large intermediate results, filled on request.
struct TrialArtifacts {
  CorrelatedInstance instance;
  ObservedPair observed;
  CorruptionPlan corruption;
  CleanedPair cleaned;
  std::optional<Permutation> pi_lap;
  std::optional<Permutation> pi_refined;
  std::optional<Mat> h_final;
  std::optional<Mat> score;
};

struct RunRecord {
  RunConfig config;
  std::vector<TrialRecord> trials;
  double seconds = 0.0;
  /// Worst exit code across trials (0 when every trial succeeded).
  int exit_code() const;
};

/// Oracle good seeds: the K0 smallest u with u outside Q u S and pi*(u)
/// outside R u T, paired with v = pi*(u).
SeedPair oracle_good_seeds(const Permutation& pi_star, const CorruptionPlan& plan, const CleanedPair& cp, Index k0);
/// Same u, v drawn uniformly among distinct indices with v != pi*(u).
SeedPair bad_seeds(const SeedPair& good, const Permutation& pi_star, Rng& rng);

struct SeedRun {
  Permutation pi_lap;
  RefineResult refined;
  AmpRun amp;
  AssignmentProblem problem;
};

/// AMP -> scores -> LAP -> assemble -> refine for one seed pair. With `truth`,
/// the f^T g concentration telemetry pairs rows through it.
SeedRun run_seed_pair(const CleanedPair& cp, const ObservedPair& obs, const SeedPair& seeds, const SpectralPlan& plan,
                      const Denoiser& d, const RefineParams& rp, bool telemetry, const Permutation* truth = nullptr);

/// ||h_corrupt - h_clean||_F / ||h_clean||_F
double relative_gap(const Mat& h_corrupt, const Mat& h_clean);

TrialRecord run_trial(const RunConfig& cfg, int trial, TrialArtifacts* artifacts = nullptr);
RunRecord run_pipeline(const RunConfig& cfg);

struct SweepGrid {
  std::vector<double> rho;
  std::vector<double> epsilon;
  std::vector<Index> n;
  std::vector<Strategy> strategy;
  std::size_t cells() const { return rho.size() * epsilon.size() * n.size() * strategy.size(); }
};

struct SweepCell {
  std::size_t index = 0;
  RunConfig config;
  RunRecord record;
};

/// Cell c uses seed `base.seed` for c = 0 and derive_seed(base.seed, c) otherwise.
std::vector<RunConfig> sweep_configs(const RunConfig& base, const SweepGrid& grid);
std::vector<SweepCell> sweep(const RunConfig& base, const SweepGrid& grid);

}  // namespace rgm
