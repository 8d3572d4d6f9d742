#include "rgm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "rgm/denoiser.hpp"
#include "rgm/errors.hpp"
#include "rgm/io.hpp"

namespace rgm {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Tracks the current stage name and accumulates wall-clock per stage.
class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>* seconds) : seconds_(seconds) {}
  template <class F>
  auto operator()(const char* name, F&& fn) {
    stage = name;
    const auto t0 = Clock::now();
    struct Guard {
      StageTimer* self;
      const char* name;
      Clock::time_point t0;
      ~Guard() {
        if (self->seconds_) (*self->seconds_)[name] += since(t0);
      }
    } guard{this, name, t0};
    return fn();
  }
  std::string stage;

 private:
  std::map<std::string, double>* seconds_;
};

void add_assertion(TrialRecord& rec, std::string name, bool pass, std::string detail = {}) {
  rec.assertions.push_back({std::move(name), pass, std::move(detail)});
}

bool zeroed_rows_vanish(const Mat& m, const std::vector<Index>& idx) {
  for (Index i : idx) {
    if (m.row(i).cwiseAbs().maxCoeff() != 0.0 || m.col(i).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

void enumerate_tuples(Index n, Index k, std::vector<std::vector<Index>>& out) {
  std::vector<Index> cur;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<Index>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      used[static_cast<std::size_t>(i)] = 1;
      cur.push_back(i);
      self(self);
      cur.pop_back();
      used[static_cast<std::size_t>(i)] = 0;
    }
  };
  rec(rec);
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.n < 2) throw ParameterError("n must be >= 2");
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw ParameterError("rho must lie in [0,1]");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0)) throw ParameterError("epsilon must lie in [0,1)");
  if (cfg.k0 < 1 || cfg.k0 >= cfg.n) throw ParameterError("k0 must lie in [1, n)");
  if (cfg.divisor < 1) throw ParameterError("divisor must be >= 1");
  if (cfg.min_rounds < 0) throw ParameterError("min_rounds must be >= 0");
  if (!(cfg.denoiser_b > 0.0)) throw ParameterError("denoiser_b must be positive");
  if (!(cfg.threshold_mult > 0.0)) throw ParameterError("threshold_mult must be positive");
  if (cfg.max_resamples < 0) throw ParameterError("max_resamples must be >= 0");
  if (cfg.trials < 1) throw ParameterError("trials must be >= 1");
  if (cfg.bad_pairs < 0) throw ParameterError("bad_pairs must be >= 0");
  if (cfg.mode == SeedMode::tiny_enumeration && (cfg.n > 12 || cfg.k0 > 2)) {
    throw ParameterError("tiny-enumeration requires n <= 12 and k0 <= 2");
  }
  if (corrupted_count(cfg.epsilon, cfg.n) + cfg.k0 > cfg.n) {
    throw ParameterError("ceil(epsilon n) + k0 exceeds n; no room for uncorrupted seeds");
  }
}

StreamSeeds trial_seeds(const RunConfig& cfg, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const std::uint64_t base = derive_seed(cfg.seed, t);
  auto pick = [&](std::uint64_t over, Stream s) { return over ? derive_seed(over, t) : derive_seed(base, s); };
  StreamSeeds s;
  s.instance = pick(cfg.stream_overrides.instance, Stream::instance);
  s.noise = pick(cfg.stream_overrides.noise, Stream::noise);
  s.beta = pick(cfg.stream_overrides.beta, Stream::beta);
  s.corruption = pick(cfg.stream_overrides.corruption, Stream::corruption);
  s.control = pick(cfg.stream_overrides.control, Stream::control);
  return s;
}

bool TrialRecord::assertions_pass() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

int RunRecord::exit_code() const {
  int code = 0;
  for (const TrialRecord& t : trials) code = std::max(code, t.exit_code);
  return code;
}

SeedPair oracle_good_seeds(const Permutation& pi_star, const CorruptionPlan& plan, const CleanedPair& cp, Index k0) {
  const Index n = pi_star.size();
  std::vector<char> bad_a(static_cast<std::size_t>(n), 0), bad_b(static_cast<std::size_t>(n), 0);
  for (Index i : plan.q) bad_a[static_cast<std::size_t>(i)] = 1;
  for (Index i : cp.s) bad_a[static_cast<std::size_t>(i)] = 1;
  for (Index i : plan.r) bad_b[static_cast<std::size_t>(i)] = 1;
  for (Index i : cp.t) bad_b[static_cast<std::size_t>(i)] = 1;
  SeedPair sp;
  for (Index u = 0; u < n && static_cast<Index>(sp.u.size()) < k0; ++u) {
    if (bad_a[static_cast<std::size_t>(u)] || bad_b[static_cast<std::size_t>(pi_star(u))]) continue;
    sp.u.push_back(u);
    sp.v.push_back(pi_star(u));
  }
  if (static_cast<Index>(sp.u.size()) < k0) {
    throw ParameterError("oracle_good_seeds: fewer than k0 vertices outside the corrupted and cleaned sets");
  }
  sp.good = true;
  return sp;
}

SeedPair bad_seeds(const SeedPair& good, const Permutation& pi_star, Rng& rng) {
  const Index n = pi_star.size();
  SeedPair sp;
  sp.u = good.u;
  std::set<Index> used;
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (Index u : good.u) {
    Index v;
    do {
      v = pick(rng);
    } while (v == pi_star(u) || used.count(v));
    used.insert(v);
    sp.v.push_back(v);
  }
  sp.good = false;
  return sp;
}

double relative_gap(const Mat& h_corrupt, const Mat& h_clean) {
  if (h_corrupt.rows() != h_clean.rows() || h_corrupt.cols() != h_clean.cols()) {
    throw ParameterError("relative_gap: shape mismatch");
  }
  const double den = h_clean.norm();
  return den > 0.0 ? (h_corrupt - h_clean).norm() / den : std::numeric_limits<double>::infinity();
}

namespace {

SeedRun seed_run_timed(const CleanedPair& cp, const ObservedPair& obs, const SeedPair& seeds, const SpectralPlan& plan,
                       const Denoiser& d, const RefineParams& rp, bool telemetry, StageTimer& timer,
                       const Permutation* truth) {
  SeedRun r;
  const AmpContext ctx = timer("amp", [&] { return make_context(cp, seeds, d); });
  const std::vector<Index> align = telemetry && truth ? align_rows(ctx, *truth) : std::vector<Index>{};
  r.amp = timer("amp", [&] { return run_amp(ctx, plan, d, telemetry, align); });
  r.problem = timer("assign", [&] { return build_scores(r.amp.final, ctx); });
  const auto sigma = timer("assign", [&] { return solve_lap(r.problem); });
  r.pi_lap = timer("assign", [&] { return assemble_pi(seeds, r.problem, sigma); });
  r.refined = timer("refine", [&] { return seeded_refine(obs, r.pi_lap, rp); });
  return r;
}

}  // namespace

SeedRun run_seed_pair(const CleanedPair& cp, const ObservedPair& obs, const SeedPair& seeds, const SpectralPlan& plan,
                      const Denoiser& d, const RefineParams& rp, bool telemetry, const Permutation* truth) {
  StageTimer timer(nullptr);
  return seed_run_timed(cp, obs, seeds, plan, d, rp, telemetry, timer, truth);
}

TrialRecord run_trial(const RunConfig& cfg, int trial, TrialArtifacts* artifacts) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seeds = trial_seeds(cfg, trial);
  StageTimer timer(&rec.seconds);
  try {
    timer("config", [&] { validate(cfg); });
    const Denoiser d = timer("config", [&] { return make_denoiser(cfg.denoiser_b); });

    ScheduleOptions so;
    so.gamma = cfg.gamma;
    so.divisor = cfg.divisor;
    so.min_rounds = cfg.min_rounds;
    const Schedule sched =
        timer("schedule", [&] { return build_schedule(cfg.rho, cfg.n, cfg.k0, ScheduleMode::practical, d, so); });
    rec.ks = sched.ks;
    rec.eps_prior = sched.epss;
    rec.t_star = sched.t_star;
    rec.rounds = sched.rounds;

    CorrelatedInstance inst =
        timer("generate", [&] { return generate(cfg.n, cfg.rho, cfg.pi_mode, rec.seeds.instance); });
    CorruptionOptions co;
    co.clique_weight = cfg.clique_weight;
    co.spike_lambda = cfg.spike_lambda;
    auto corrupted =
        timer("corrupt", [&] { return corrupt(inst, cfg.epsilon, cfg.strategy, rec.seeds.corruption, co); });
    const ObservedPair& obs = corrupted.first;
    const CorruptionPlan& plan = corrupted.second;
    rec.q_size = static_cast<Index>(plan.q.size());

    CleanOptions clo;
    clo.threshold_mult = cfg.threshold_mult;
    const CleanedPair cp = timer("clean", [&] { return clean_pair(obs, rec.seeds.noise, clo); });
    rec.s_size = static_cast<Index>(cp.s.size());
    rec.t_size = static_cast<Index>(cp.t.size());
    rec.iters_a = cp.iters_a;
    rec.iters_b = cp.iters_b;
    const double tau = cfg.threshold_mult * std::sqrt(static_cast<double>(cfg.n));
    add_assertion(rec, "zeroed_rows_vanish", zeroed_rows_vanish(cp.a_clean, cp.s) && zeroed_rows_vanish(cp.b_clean, cp.t));
    if (artifacts) {
      artifacts->instance = inst;
      artifacts->observed = obs;
      artifacts->corruption = plan;
      artifacts->cleaned = cp;
    }
    {
      // Re-check the norm guard on the returned matrices.
      PowerOptions po;
      po.stop_below = tau;
      const SingularPair sa = leading_singular(cp.a_clean, derive_seed(rec.seeds.noise, 0xa55e7a), po);
      const SingularPair sb = leading_singular(cp.b_clean, derive_seed(rec.seeds.noise, 0xa55e7b), po);
      const bool ok_a = sa.certified_below || (sa.converged && sa.sigma < tau);
      const bool ok_b = sb.certified_below || (sb.converged && sb.sigma < tau);
      add_assertion(rec, "clean_norm_bound", ok_a && ok_b);
    }

    const RefineParams rp = timer("refine", [&] { return make_refine_params(cfg.rho, cfg.n, cfg.max_swaps); });

    PlanOptions popts;
    popts.max_resamples = cfg.max_resamples;
    const SpectralPlan splan = timer("spectral", [&] {
      return build_plan(sched.ks, cfg.divisor, sched.eps0, sched.rounds, d, cfg.rho, rec.seeds.beta, popts,
                        &rec.spectral);
    });
    rec.spectral = splan.telemetry;
    {
      bool orth = true, diag = true, ritz = true, window = true, growth = true;
      for (const RoundTelemetry& t : rec.spectral) {
        orth = orth && t.phi_orth_err <= 1e-8;
        diag = diag && t.psi_offdiag <= 1e-8;
        ritz = ritz && t.ritz_in_window;
        window = window && t.counts.ok() && (t.t == splan.last_round() || t.counts_next.ok());
        growth = growth && (t.t == splan.last_round() || t.growth_ok);
      }
      add_assertion(rec, "xi_phi_orthonormal", orth);
      add_assertion(rec, "xi_psi_diagonal", diag);
      add_assertion(rec, "xi_ritz_in_window", ritz);
      add_assertion(rec, "window_condition", window);
      add_assertion(rec, "eps_growth_lower_bound", growth);
    }

    std::vector<Permutation> candidates;
    if (cfg.mode == SeedMode::oracle) {
      const SeedPair good = timer("seeds", [&] { return oracle_good_seeds(inst.pi_star, plan, cp, cfg.k0); });
      SeedRun run = seed_run_timed(cp, obs, good, splan, d, rp, cfg.telemetry, timer, &inst.pi_star);
      rec.concentration = run.amp.telemetry;
      rec.post_lap_overlap = overlap(run.pi_lap, inst.pi_star);
      rec.post_refine_overlap = overlap(run.refined.pi, inst.pi_star);
      rec.swaps = static_cast<Index>(run.refined.swaps.size());
      rec.swaps_truncated = run.refined.truncated;
      rec.swap_trace = run.refined.swaps;
      const double sup = d.derivative_bound();
      bool bounded = true;
      for (const Concentration& c : rec.concentration) bounded = bounded && c.f_sup <= sup;
      add_assertion(rec, "amp_entries_bounded", bounded);
      add_assertion(rec, "pi_valid", is_permutation(run.refined.pi.map()));
      candidates.push_back(run.refined.pi);
      if (artifacts) {
        artifacts->pi_lap = run.pi_lap;
        artifacts->pi_refined = run.refined.pi;
        artifacts->h_final = run.amp.final.h;
        artifacts->score = run.problem.score;
      }

      Rng ctrl(rec.seeds.control);
      for (int b = 0; b < cfg.bad_pairs; ++b) {
        const SeedPair bad = bad_seeds(good, inst.pi_star, ctrl);
        SeedRun br = seed_run_timed(cp, obs, bad, splan, d, rp, false, timer, nullptr);
        rec.bad_post_lap_overlaps.push_back(overlap(br.pi_lap, inst.pi_star));
        rec.bad_post_refine_overlaps.push_back(overlap(br.refined.pi, inst.pi_star));
        candidates.push_back(br.refined.pi);
      }

      if (cfg.replay_clean) {
        const ObservedPair clean_obs{inst.a, inst.b};
        const CleanedPair cp0 = timer("replay", [&] { return clean_pair(clean_obs, rec.seeds.noise, clo); });
        const AmpContext ctx0 = timer("replay", [&] { return make_context(cp0, good, d); });
        const AmpRun r0 = timer("replay", [&] { return run_amp(ctx0, splan, d, false); });
        rec.stability_gap = relative_gap(run.amp.final.h, r0.final.h);
      }
    } else {
      std::vector<std::vector<Index>> tuples;
      enumerate_tuples(cfg.n, cfg.k0, tuples);
      std::optional<SeedPair> oracle;
      try {
        oracle = oracle_good_seeds(inst.pi_star, plan, cp, cfg.k0);
      } catch (const ParameterError&) {
      }
      rec.good_pair_present = oracle.has_value();
      for (const auto& u : tuples) {
        for (const auto& v : tuples) {
          SeedPair sp{u, v, std::nullopt};
          SeedRun r = seed_run_timed(cp, obs, sp, splan, d, rp, false, timer, nullptr);
          if (oracle && u == oracle->u && v == oracle->v) {
            rec.post_lap_overlap = overlap(r.pi_lap, inst.pi_star);
            rec.post_refine_overlap = overlap(r.refined.pi, inst.pi_star);
          }
          candidates.push_back(std::move(r.refined.pi));
          ++rec.enumerated_pairs;
        }
      }
    }

    const SelectResult sel = timer("select", [&] { return final_select(obs, candidates); });
    rec.selected = sel.index;
    rec.select_scores = sel.scores;
    rec.final_overlap = overlap(candidates[sel.index], inst.pi_star);
    rec.pi_star_score = final_select_score(obs, inst.pi_star);
    add_assertion(rec, "select_is_max",
                  std::all_of(sel.scores.begin(), sel.scores.end(),
                              [&](std::int64_t s) { return s <= sel.scores[sel.index]; }));
    rec.ok = true;
  } catch (const Error& e) {
    rec.failed_stage = timer.stage;
    rec.error_kind = e.kind();
    rec.error_message = e.what();
    rec.exit_code = e.exit_code();
  } catch (const std::exception& e) {
    rec.failed_stage = timer.stage;
    rec.error_kind = "internal";
    rec.error_message = e.what();
    rec.exit_code = 1;
  }
  return rec;
}

namespace {

void write_dumps(const RunConfig& cfg, int trial, const TrialArtifacts& art) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.dump_dir);
  fs::create_directories(dir);
  const std::string p = "trial" + std::to_string(trial) + "_";
  if (art.instance.n == 0) return;
  io::save_instance(dir / (p + "instance.rgmi"), art.instance);
  io::save_matrix(dir / (p + "a_clean.rgmm"), art.cleaned.a_clean);
  io::save_matrix(dir / (p + "b_clean.rgmm"), art.cleaned.b_clean);
  if (art.instance.n <= 500) {
    io::write_matrix_csv(dir / (p + "a_prime.csv"), art.observed.a_prime);
    io::write_matrix_csv(dir / (p + "b_prime.csv"), art.observed.b_prime);
  }
  if (art.score) io::save_matrix(dir / (p + "score.rgmm"), *art.score);
  if (art.pi_refined) io::write_assignment_csv(dir / (p + "assignment.csv"), *art.pi_refined);
}

}  // namespace

RunRecord run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  RunRecord out;
  out.config = cfg;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));
  const auto t0 = Clock::now();
  const bool keep = !cfg.dump_dir.empty() || !cfg.trace_path.empty();
  std::vector<TrialArtifacts> arts(keep ? static_cast<std::size_t>(cfg.trials) : 0);
#pragma omp parallel for schedule(dynamic, 1) if (cfg.trials > 1)
  for (int t = 0; t < cfg.trials; ++t) {
    out.trials[static_cast<std::size_t>(t)] = run_trial(cfg, t, keep ? &arts[static_cast<std::size_t>(t)] : nullptr);
  }
  out.seconds = since(t0);
  if (!cfg.dump_dir.empty()) {
    for (int t = 0; t < cfg.trials; ++t) write_dumps(cfg, t, arts[static_cast<std::size_t>(t)]);
  }
  if (!cfg.trace_path.empty()) {
    std::ofstream os(cfg.trace_path);
    if (!os) throw ParameterError("cannot open trace file " + cfg.trace_path);
    for (int t = 0; t < cfg.trials; ++t) {
      const auto& a = arts[static_cast<std::size_t>(t)];
      write_clean_trace(os, "trial" + std::to_string(t) + "/A", a.cleaned.trace_a);
      write_clean_trace(os, "trial" + std::to_string(t) + "/B", a.cleaned.trace_b);
    }
  }
  return out;
}

std::vector<RunConfig> sweep_configs(const RunConfig& base, const SweepGrid& grid) {
  std::vector<RunConfig> out;
  std::size_t c = 0;
  for (Index n : grid.n)
    for (double rho : grid.rho)
      for (double eps : grid.epsilon)
        for (Strategy s : grid.strategy) {
          RunConfig cfg = base;
          cfg.n = n;
          cfg.rho = rho;
          cfg.epsilon = eps;
          cfg.strategy = s;
          cfg.seed = c == 0 ? base.seed : derive_seed(base.seed, static_cast<std::uint64_t>(c));
          cfg.manifest_path.clear();
          cfg.csv_path.clear();
          cfg.dump_dir.clear();
          cfg.trace_path.clear();
          out.push_back(cfg);
          ++c;
        }
  return out;
}

std::vector<SweepCell> sweep(const RunConfig& base, const SweepGrid& grid) {
  std::vector<SweepCell> cells;
  const auto cfgs = sweep_configs(base, grid);
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    SweepCell cell;
    cell.index = c;
    cell.config = cfgs[c];
    try {
      cell.record = run_pipeline(cfgs[c]);
    } catch (const Error& e) {
      cell.record.config = cfgs[c];
      TrialRecord tr;
      tr.failed_stage = "config";
      tr.error_kind = e.kind();
      tr.error_message = e.what();
      tr.exit_code = e.exit_code();
      cell.record.trials.assign(static_cast<std::size_t>(std::max(cfgs[c].trials, 1)), tr);
      for (int t = 0; t < static_cast<int>(cell.record.trials.size()); ++t) cell.record.trials[static_cast<std::size_t>(t)].trial = t;
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace rgm
