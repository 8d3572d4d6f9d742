#include "rgm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rgm/errors.hpp"

namespace rgm {

CorrelatedInstance generate(Index n, double rho, PiMode pi_mode, std::uint64_t seed) {
  if (n < 2) throw ParameterError("generate: n must be >= 2");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("generate: rho must lie in [0,1]");
  CorrelatedInstance inst;
  inst.n = n;
  inst.rho = rho;
  inst.rng_seed = seed;
  if (pi_mode == PiMode::identity) {
    inst.pi_star = Permutation::identity(n);
  } else {
    Rng rng(splitmix64(seed));
    inst.pi_star = Permutation::uniform(n, rng);
  }
  inst.a.resize(n, n);
  inst.b.resize(n, n);
  kernels::fill_correlated_pair(inst.a, inst.b, inst.pi_star, rho, seed);
  return inst;
}

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::planted_clique_weight: return "planted-clique-weight";
    case Strategy::rank1_spike: return "rank1-spike";
    case Strategy::zero_out: return "zero-out";
    case Strategy::adaptive_sign_flip: return "adaptive-sign-flip";
  }
  return "?";
}

Strategy parse_strategy(std::string_view tag) {
  for (Strategy s : all_strategies()) {
    if (strategy_name(s) == tag) return s;
  }
  throw ParameterError("unknown corruption strategy '" + std::string(tag) + "'");
}

std::vector<Strategy> all_strategies() {
  return {Strategy::planted_clique_weight, Strategy::rank1_spike, Strategy::zero_out,
          Strategy::adaptive_sign_flip};
}

Index corrupted_count(double epsilon, Index n) {
  const double x = epsilon * static_cast<double>(n);
  return static_cast<Index>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

namespace {

std::vector<Index> sample_subset(Index n, Index k, Rng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

Mat make_block(const Mat& x, const std::vector<Index>& idx, Strategy s, const CorruptionOptions& opts,
               Rng& rng) {
  const auto k = static_cast<Index>(idx.size());
  const Index n = x.rows();
  Mat e = Mat::Zero(k, k);
  switch (s) {
    case Strategy::planted_clique_weight:
      e.setConstant(opts.clique_weight);
      e.diagonal().setZero();
      break;
    case Strategy::rank1_spike: {
      const double lam = opts.spike_lambda > 0.0 ? opts.spike_lambda : 20.0 * std::sqrt(static_cast<double>(n));
      Vec v(k);
      std::normal_distribution<double> nd;
      for (Index i = 0; i < k; ++i) v(i) = nd(rng);
      if (k > 0) v /= v.norm();
      for (Index b = 0; b < k; ++b)
        for (Index a = b + 1; a < k; ++a) e(a, b) = e(b, a) = lam * v(a) * v(b);
      break;
    }
    case Strategy::zero_out:
    case Strategy::adaptive_sign_flip: {
      const double c = s == Strategy::zero_out ? -1.0 : -2.0;
      for (Index b = 0; b < k; ++b)
        for (Index a = 0; a < k; ++a) e(a, b) = c * x(idx[a], idx[b]);
      break;
    }
  }
  return e;
}

Mat expand(const Mat& block, const std::vector<Index>& idx, Index n) {
  Mat out = Mat::Zero(n, n);
  const auto k = static_cast<Index>(idx.size());
  for (Index b = 0; b < k; ++b)
    for (Index a = 0; a < k; ++a) out(idx[a], idx[b]) = block(a, b);
  return out;
}

void add_block(Mat& x, const Mat& block, const std::vector<Index>& idx) {
  const auto k = static_cast<Index>(idx.size());
  for (Index b = 0; b < k; ++b)
    for (Index a = 0; a < k; ++a) x(idx[a], idx[b]) += block(a, b);
}

}  // namespace

Mat CorruptionPlan::dense_e(Index n) const { return expand(e_block, q, n); }
Mat CorruptionPlan::dense_f(Index n) const { return expand(f_block, r, n); }

std::pair<ObservedPair, CorruptionPlan> corrupt(const CorrelatedInstance& inst, double epsilon,
                                                Strategy strategy, std::uint64_t seed,
                                                const CorruptionOptions& opts) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ParameterError("corrupt: epsilon must lie in [0,1)");
  const Index n = inst.n;
  const Index k = corrupted_count(epsilon, n);
  Rng rng(seed);
  CorruptionPlan plan;
  plan.strategy = strategy;
  plan.epsilon = epsilon;
  plan.q = sample_subset(n, k, rng);
  plan.r = sample_subset(n, k, rng);
  plan.e_block = make_block(inst.a, plan.q, strategy, opts, rng);
  plan.f_block = make_block(inst.b, plan.r, strategy, opts, rng);

  ObservedPair obs{inst.a, inst.b};
  add_block(obs.a_prime, plan.e_block, plan.q);
  add_block(obs.b_prime, plan.f_block, plan.r);
  return {std::move(obs), std::move(plan)};
}

double overlap(const Permutation& pi_hat, const Permutation& pi_star) {
  if (pi_hat.size() != pi_star.size()) throw ParameterError("overlap: size mismatch");
  if (pi_hat.size() == 0) return 1.0;
  Index fixed = 0;
  for (Index i = 0; i < pi_hat.size(); ++i) fixed += pi_hat(i) == pi_star(i) ? 1 : 0;
  return static_cast<double>(fixed) / static_cast<double>(pi_hat.size());
}

}  // namespace rgm
