#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgm/kernels.hpp"
#include "rgm/permutation.hpp"

namespace rgm {

/// Ground-truth pair: a[i,j] and b[pi*(i), pi*(j)] are rho-correlated N(0,1).
struct CorrelatedInstance {
  Index n = 0;
  double rho = 0.0;
  Mat a;
  Mat b;
  Permutation pi_star;
  std::uint64_t rng_seed = 0;
};

enum class PiMode { identity, uniform };

/// Throws ParameterError for n < 2 or rho outside [0,1].
CorrelatedInstance generate(Index n, double rho, PiMode pi_mode, std::uint64_t seed);

enum class Strategy { planted_clique_weight, rank1_spike, zero_out, adaptive_sign_flip };

std::string_view strategy_name(Strategy s) noexcept;
/// Throws ParameterError on an unknown tag.
Strategy parse_strategy(std::string_view tag);
std::vector<Strategy> all_strategies();

struct CorruptionOptions {
  double clique_weight = 5.0;
  /// <= 0 selects 20 sqrt(n).
  double spike_lambda = 0.0;
};

/// E and F stored compactly: e_block is |Q| x |Q| with e_block(a, b) = E[q[a], q[b]].
struct CorruptionPlan {
  std::vector<Index> q;
  std::vector<Index> r;
  Mat e_block;
  Mat f_block;
  Strategy strategy = Strategy::zero_out;
  double epsilon = 0.0;

  Mat dense_e(Index n) const;
  Mat dense_f(Index n) const;
};

struct ObservedPair {
  Mat a_prime;
  Mat b_prime;
};

/// ceil(eps n), guarded against round-off in eps n.
Index corrupted_count(double epsilon, Index n);

/// Q, R uniform random subsets of size ceil(eps n); E, F from the strategy
/// applied to A on Q x Q and B on R x R.
std::pair<ObservedPair, CorruptionPlan> corrupt(const CorrelatedInstance& inst, double epsilon,
                                                Strategy strategy, std::uint64_t seed,
                                                const CorruptionOptions& opts = {});

/// Fraction of i with pi_hat(i) = pi_star(i).
double overlap(const Permutation& pi_hat, const Permutation& pi_star);

}  // namespace rgm
