#include "rgm/record.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "rgm/errors.hpp"

namespace rgm {

std::string_view seed_mode_name(SeedMode m) noexcept {
  return m == SeedMode::oracle ? "oracle-seed" : "tiny-enumeration";
}

SeedMode parse_seed_mode(std::string_view s) {
  if (s == "oracle-seed" || s == "oracle") return SeedMode::oracle;
  if (s == "tiny-enumeration" || s == "tiny") return SeedMode::tiny_enumeration;
  throw ParameterError("unknown mode '" + std::string(s) + "'");
}

std::string_view pi_mode_name(PiMode m) noexcept { return m == PiMode::identity ? "identity" : "uniform-random"; }

PiMode parse_pi_mode(std::string_view s) {
  if (s == "identity") return PiMode::identity;
  if (s == "uniform-random" || s == "uniform") return PiMode::uniform;
  throw ParameterError("unknown pi_mode '" + std::string(s) + "'");
}

namespace {

Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json seeds_json(const StreamSeeds& s) {
  return Json{{"instance", s.instance}, {"noise", s.noise}, {"beta", s.beta},
              {"corruption", s.corruption}, {"control", s.control}};
}

Json counts_json(const WindowCounts& c) {
  return Json{{"phi_in", c.phi_in}, {"psi_in", c.psi_in}, {"required", c.required}, {"ok", c.ok()}};
}

double mean(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t h = x.size() / 2;
  return x.size() % 2 ? x[h] : 0.5 * (x[h - 1] + x[h]);
}

Json stat(const std::vector<double>& x) {
  if (x.empty()) return Json{{"count", 0}, {"mean", nullptr}, {"median", nullptr}};
  return Json{{"count", x.size()}, {"mean", mean(x)}, {"median", median(x)}};
}

}  // namespace

Json to_json(const RunConfig& c) {
  Json s = Json::object();
  s["instance"] = c.stream_overrides.instance;
  s["noise"] = c.stream_overrides.noise;
  s["beta"] = c.stream_overrides.beta;
  s["corruption"] = c.stream_overrides.corruption;
  s["control"] = c.stream_overrides.control;
  return Json{{"n", c.n},
              {"rho", c.rho},
              {"epsilon", c.epsilon},
              {"strategy", strategy_name(c.strategy)},
              {"k0", c.k0},
              {"gamma", c.gamma},
              {"divisor", c.divisor},
              {"min_rounds", c.min_rounds},
              {"denoiser_b", c.denoiser_b},
              {"threshold_mult", c.threshold_mult},
              {"clique_weight", c.clique_weight},
              {"spike_lambda", c.spike_lambda},
              {"max_resamples", c.max_resamples},
              {"max_swaps", c.max_swaps},
              {"pi_mode", pi_mode_name(c.pi_mode)},
              {"mode", seed_mode_name(c.mode)},
              {"trials", c.trials},
              {"bad_pairs", c.bad_pairs},
              {"replay_clean", c.replay_clean},
              {"telemetry", c.telemetry},
              {"seed", c.seed},
              {"stream_overrides", s}};
}

Json to_json(const TrialRecord& t) {
  Json spectral = Json::array();
  for (const RoundTelemetry& r : t.spectral) {
    spectral.push_back(Json{{"t", r.t},
                            {"k", r.k},
                            {"m", r.m},
                            {"k_next", r.k_next},
                            {"eps", r.eps},
                            {"eps_next", r.eps_next},
                            {"resamples", r.resamples},
                            {"clamps", r.clamps},
                            {"growth_ok", r.growth_ok},
                            {"intersection_dim", r.intersection_dim},
                            {"phi_orth_err", r.phi_orth_err},
                            {"psi_offdiag", r.psi_offdiag},
                            {"ritz_min", r.ritz_min},
                            {"ritz_max", r.ritz_max},
                            {"counts", counts_json(r.counts)},
                            {"counts_next", counts_json(r.counts_next)}});
  }
  Json conc = Json::array();
  for (const Concentration& c : t.concentration) {
    conc.push_back(Json{{"t", c.t},
                        {"ff_gap", c.ff_gap},
                        {"gg_gap", c.gg_gap},
                        {"fg_gap", c.fg_gap},
                        {"mean_gap", c.mean_gap},
                        {"f_sup", c.f_sup}});
  }
  Json swaps = Json::array();
  for (const SwapRecord& s : t.swap_trace) {
    swaps.push_back(Json{{"u", s.u}, {"v", s.v}, {"u_prev_image", s.u_prev_image},
                         {"v_prev_preimage", s.v_prev_preimage}, {"n_uv", s.n_uv},
                         {"n_u_old", s.n_u_old}, {"n_v_old", s.n_v_old}});
  }
  Json asserts = Json::array();
  for (const Assertion& a : t.assertions) asserts.push_back(Json{{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  Json seconds = Json::object();
  for (const auto& [k, v] : t.seconds) seconds[k] = v;
  Json status = t.ok ? Json{{"ok", true}, {"stage", nullptr}, {"kind", nullptr}, {"message", nullptr}, {"exit_code", 0}}
                     : Json{{"ok", false}, {"stage", t.failed_stage}, {"kind", t.error_kind},
                            {"message", t.error_message}, {"exit_code", t.exit_code}};
  return Json{{"trial", t.trial},
              {"status", status},
              {"seeds", seeds_json(t.seeds)},
              {"cleaning", Json{{"q_size", t.q_size}, {"s_size", t.s_size}, {"t_size", t.t_size},
                                {"iters_a", t.iters_a}, {"iters_b", t.iters_b}}},
              {"schedule", Json{{"ks", t.ks}, {"eps_prior", t.eps_prior}, {"t_star", t.t_star}, {"rounds", t.rounds}}},
              {"spectral", spectral},
              {"concentration", conc},
              {"overlaps", Json{{"post_lap", opt(t.post_lap_overlap)},
                                {"post_refine", opt(t.post_refine_overlap)},
                                {"final", opt(t.final_overlap)},
                                {"bad_post_lap", t.bad_post_lap_overlaps},
                                {"bad_post_refine", t.bad_post_refine_overlaps}}},
              {"refine", Json{{"swaps", t.swaps}, {"truncated", t.swaps_truncated}, {"trace", swaps}}},
              {"final_select", Json{{"selected", t.selected},
                                    {"scores", t.select_scores},
                                    {"pi_star_score", t.pi_star_score ? Json(*t.pi_star_score) : Json(nullptr)}}},
              {"stability_gap", opt(t.stability_gap)},
              {"enumeration", Json{{"pairs", t.enumerated_pairs},
                                   {"good_pair_present", t.good_pair_present ? Json(*t.good_pair_present) : Json(nullptr)}}},
              {"seconds", seconds},
              {"assertions", asserts}};
}

Json summarize(const std::vector<TrialRecord>& trials) {
  std::vector<double> lap, ref, fin, clean_it, res;
  int ok = 0;
  Json failures = Json::object();
  for (const TrialRecord& t : trials) {
    if (t.ok) ++ok;
    else failures[t.failed_stage] = failures.value(t.failed_stage, 0) + 1;
    if (t.post_lap_overlap) lap.push_back(*t.post_lap_overlap);
    if (t.post_refine_overlap) ref.push_back(*t.post_refine_overlap);
    if (t.final_overlap) fin.push_back(*t.final_overlap);
    clean_it.push_back(static_cast<double>(t.iters_a + t.iters_b));
    double r = 0.0;
    for (const RoundTelemetry& x : t.spectral) r += x.resamples;
    res.push_back(r);
  }
  return Json{{"trials", trials.size()},
              {"ok", ok},
              {"failed", static_cast<int>(trials.size()) - ok},
              {"failures_by_stage", failures},
              {"post_lap_overlap", stat(lap)},
              {"post_refine_overlap", stat(ref)},
              {"final_overlap", stat(fin)},
              {"cleaning_iterations", stat(clean_it)},
              {"resamples", stat(res)}};
}

Json to_json(const RunRecord& r) {
  Json trials = Json::array();
  for (const TrialRecord& t : r.trials) trials.push_back(to_json(t));
  return Json{{"schema_version", kRunRecordSchemaVersion},
              {"tool", "rgm"},
              {"config", to_json(r.config)},
              {"trials", trials},
              {"summary", summarize(r.trials)},
              {"seconds", r.seconds},
              {"exit_code", r.exit_code()}};
}

void write_manifest(const std::string& path, const RunRecord& r) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open manifest " + path);
  os << to_json(r).dump(2) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "cell,n,rho,epsilon,strategy,trial,ok,stage,post_lap_overlap,post_refine_overlap,final_overlap,"
        "iters_a,iters_b,resamples,swaps,seconds\n";
  auto num = [&](const std::optional<double>& x) {
    if (x) os << *x;
  };
  for (const SweepCell& c : cells) {
    for (const TrialRecord& t : c.record.trials) {
      double secs = 0.0;
      for (const auto& [k, v] : t.seconds) secs += v;
      int res = 0;
      for (const RoundTelemetry& x : t.spectral) res += x.resamples;
      os << c.index << ',' << c.config.n << ',' << c.config.rho << ',' << c.config.epsilon << ','
         << strategy_name(c.config.strategy) << ',' << t.trial << ',' << (t.ok ? 1 : 0) << ','
         << (t.ok ? "" : t.failed_stage) << ',';
      num(t.post_lap_overlap);
      os << ',';
      num(t.post_refine_overlap);
      os << ',';
      num(t.final_overlap);
      os << ',' << t.iters_a << ',' << t.iters_b << ',' << res << ',' << t.swaps << ',' << secs << '\n';
    }
  }
}

Json sweep_summary(const std::vector<SweepCell>& cells) {
  Json out = Json::array();
  for (const SweepCell& c : cells) {
    Json s = summarize(c.record.trials);
    out.push_back(Json{{"cell", c.index},
                       {"n", c.config.n},
                       {"rho", c.config.rho},
                       {"epsilon", c.config.epsilon},
                       {"strategy", strategy_name(c.config.strategy)},
                       {"seed", c.config.seed},
                       {"summary", s}});
  }
  return Json{{"schema_version", kRunRecordSchemaVersion}, {"cells", out}};
}

Json constants_json(double rho, double b, Index n, Index k0) {
  const Denoiser d = make_denoiser(b);
  const PaperConstants pc = paper_constants(rho, d, static_cast<double>(k0));
  const double eps0 = d.phi_map(rho / 2.0);
  return Json{{"rho", rho},
              {"b", b},
              {"n", n},
              {"k0", k0},
              {"a1", d.a1()},
              {"a0", d.a0()},
              {"derivative_bound", d.derivative_bound()},
              {"phi2_at_zero", d.phi_second_deriv_at_zero()},
              {"c2", d.taylor_coefficient(2)},
              {"lambda", compute_lambda(d)},
              {"eps0", eps0},
              {"alpha", compute_alpha()},
              {"psi_rho", compute_psi(rho)},
              {"delta", compute_psi(rho) * static_cast<double>(n) / 10.0},
              {"k_star_threshold", k_star_threshold(n)},
              {"paper_k0_bound", pc.k0_bound},
              {"paper_gamma", pc.gamma_paper},
              {"paper_k0_ratio", std::isfinite(pc.k0_ratio) ? Json(pc.k0_ratio) : Json(nullptr)},
              {"paper_k0_ratio_ok", pc.k0_ratio_ok},
              {"practical_gamma", 4.0 / static_cast<double>(k0)}};
}

}  // namespace rgm
