#pragma once

#include <optional>
#include <vector>

#include "rgm/denoiser.hpp"
#include "rgm/preprocess.hpp"
#include "rgm/spectral.hpp"

namespace rgm {

/// Ordered seed tuples (u_1..u_K0) and (v_1..v_K0).
struct SeedPair {
  std::vector<Index> u;
  std::vector<Index> v;
  std::optional<bool> good;
};

/// Restriction of the cleaned pair to the non-seed rows/columns.
struct AmpContext {
  Index n = 0;
  std::vector<Index> rows_f;  ///< [n] \ U
  std::vector<Index> rows_g;  ///< [n] \ V
  Mat a_sub;
  Mat b_sub;
  Mat f0;
  Mat g0;
};

struct AmpIterate {
  Mat f;
  Mat g;
  Mat h;
  Mat l;
  int t = 0;
};

/// Validates the seeds, builds the submatrices and
/// f0[i,k] = phi(A[i, u_k]), g0[i,k] = phi(B[i, v_k]) for i outside the seeds.
AmpContext make_context(const CleanedPair& cp, const SeedPair& seeds, const Denoiser& d);

AmpIterate init_iterate(const AmpContext& ctx);
inline AmpIterate init_iterate(const CleanedPair& cp, const SeedPair& seeds, const Denoiser& d) {
  return init_iterate(make_context(cp, seeds, d));
}

/// h = A_sub f Xi / sqrt(n), l = B_sub g Xi / sqrt(n).
void amp_linear_step(AmpIterate& it, const AmpContext& ctx, const Mat& xi);
/// Linear step followed by f' = phi(h beta), g' = phi(l beta).
AmpIterate amp_round(const AmpIterate& it, const AmpContext& ctx, const Mat& xi, const Mat& beta, const Denoiser& d);

struct Concentration {
  int t = 0;
  double ff_gap = 0.0;    ///< ||f^T f / n - Phi||_inf
  double gg_gap = 0.0;
  double fg_gap = 0.0;    ///< ||f^T g / n - Psi||_inf
  double mean_gap = 0.0;  ///< max(||1^T f / n||_inf, ||1^T g / n||_inf)
  double f_sup = 0.0;     ///< max |f|, |g|
};

/// align[i] is the g row holding pi(rows_f[i]), or -1 when that vertex is a V seed.
std::vector<Index> align_rows(const AmpContext& ctx, const Permutation& pi);
/// fg_gap pairs f row i with g row align[i]; an empty `align` pairs rows by position.
Concentration concentration(const AmpIterate& it, const RoundMatrices& rm, Index n,
                            const std::vector<Index>& align = {});

struct AmpRun {
  AmpIterate final;
  std::vector<Concentration> telemetry;
  std::vector<double> round_seconds;
};

/// Rounds 0..plan.last_round(); the final iterate carries h, l of the last round.
AmpRun run_amp(const AmpContext& ctx, const SpectralPlan& plan, const Denoiser& d, bool telemetry = true,
               const std::vector<Index>& align = {});

}  // namespace rgm
