#pragma once

#include <cstdint>
#include <vector>

#include "rgm/model.hpp"

namespace rgm {

/// P(X >= 1) for X ~ N(0,1).
double compute_alpha();
/// P(X >= 1, Y >= 1) for standard bivariate normal at correlation rho in [0,1].
double compute_psi(double rho);

struct RefineParams {
  double alpha = 0.0;
  double psi_rho = 0.0;
  double delta = 0.0;   ///< psi(rho) n / 10
  Index max_swaps = 0;  ///< default 10 n
};

RefineParams make_refine_params(double rho, Index n, Index max_swaps = 0);

/// N(u,v) = sum_w (1{A'[u,w] >= 1} - alpha)(1{B'[v, pi(w)] >= 1} - alpha).
double neighborhood_stat(const ObservedPair& obs, const Permutation& pi, Index u, Index v, double alpha);

/// Full table N(u, v) for all u, v as one matrix product.
Mat neighborhood_table(const ObservedPair& obs, const Permutation& pi, double alpha);

struct SwapRecord {
  Index u = 0;
  Index v = 0;
  Index u_prev_image = 0;  ///< pi(u) before the swap
  Index v_prev_preimage = 0;
  double n_uv = 0.0;
  double n_u_old = 0.0;
  double n_v_old = 0.0;
};

struct RefineResult {
  Permutation pi;
  std::vector<SwapRecord> swaps;
  bool truncated = false;
};

/// Swap rule on a fixed table N (computed from the input permutation):
/// if N(u,v) >= Delta, N(u, pi(u)) < Delta/10 and N(pi^-1(v), v) < Delta/10,
/// then pi(u) <- v and pi(pi^-1(v)) <- old pi(u). Scan u then v ascending,
/// apply the first qualifying pair, restart.
RefineResult apply_swap_rule(const Mat& table, const Permutation& start, double delta, Index max_swaps);

RefineResult seeded_refine(const ObservedPair& obs, const Permutation& pi_tilde, const RefineParams& params);

/// sum_{u<v} 1{A'[u,v] >= 1} 1{B'[pi(u), pi(v)] >= 1}
std::int64_t final_select_score(const ObservedPair& obs, const Permutation& pi);

struct SelectResult {
  std::size_t index = 0;
  std::vector<std::int64_t> scores;
};

/// Candidate with the largest score; ties go to the first. Empty list throws ParameterError.
SelectResult final_select(const ObservedPair& obs, const std::vector<Permutation>& candidates);

}  // namespace rgm
