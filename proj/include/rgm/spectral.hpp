#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgm/denoiser.hpp"
#include "rgm/kernels.hpp"

namespace rgm {

/// Per-round Gram targets: Phi (K_t x K_t), Psi, eps_t.
struct RoundMatrices {
  Mat phi;
  Mat psi;
  double eps = 0.0;
  Index k = 0;

  static RoundMatrices initial(Index k0, double eps0);
};

struct WindowCounts {
  Index phi_in = 0;   ///< eigenvalues of Phi in (0.9, 1.1)
  Index psi_in = 0;   ///< eigenvalues of Psi in (0.9 eps, 1.1 eps)
  Index required = 0; ///< ceil(3K/4)
  bool ok() const noexcept { return phi_in >= required && psi_in >= required; }
};

WindowCounts window_counts(const RoundMatrices& rm);
WindowCounts window_counts(const Vec& phi_eigs, const Vec& psi_eigs, double eps);

struct XiOptions {
  /// Principal-angle cosine threshold for the span intersection.
  double intersection_tol = 1e-8;
  double check_tol = 1e-8;
};

struct XiResult {
  Mat xi;                      ///< K_t x m
  Index intersection_dim = 0;
  Vec ritz;                    ///< diag(Xi^T Psi Xi)
  double phi_orth_err = 0.0;   ///< ||Xi^T Phi Xi - I||_F
  double psi_offdiag = 0.0;    ///< ||offdiag(Xi^T Psi Xi)||_F
  WindowCounts counts;
};

/// Xi with m columns, Phi-orthonormal and Psi-diagonal, inside the span
/// intersection of the windowed eigenvectors of Phi and Psi.
/// Throws SpectralError when the intersection or the Ritz window is too small.
XiResult build_xi(const RoundMatrices& rm, Index m, const XiOptions& opts = {});

/// m x k_next matrix with i.i.d. entries +-1/sqrt(m).
Mat sample_beta(Index m, Index k_next, Rng& rng);

struct UpdateResult {
  RoundMatrices next;
  double eps_next = 0.0;
  Index clamps = 0;        ///< varphi arguments with |x| > 1 (clamped)
  bool growth_ok = false;  ///< eps_next >= rho^2 varphi''(0) eps^2 / 16
};

/// Phi'[i,j] = varphi(beta_i^T beta_j), Psi'[i,j] = varphi(rho/2 beta_i^T D beta_j),
/// D = Xi^T Psi Xi, eps' = varphi(rho/2 tr(D)/m).
UpdateResult update_round(const RoundMatrices& rm, const Mat& xi, const Mat& beta, const Denoiser& d, double rho);

struct SpectralStep {
  Mat xi;
  Mat beta;
  int resamples = 0;
};

struct RoundTelemetry {
  int t = 0;
  Index k = 0;
  Index m = 0;
  Index k_next = 0;
  double eps = 0.0;
  double eps_next = 0.0;
  int resamples = 0;
  Index clamps = 0;
  bool growth_ok = false;
  Index intersection_dim = 0;
  double phi_orth_err = 0.0;
  double psi_offdiag = 0.0;
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  bool ritz_in_window = false;
  WindowCounts counts;       ///< of round t
  WindowCounts counts_next;  ///< of the accepted round t + 1
};

/// Resample beta until (Phi', Psi') meet the window condition, at most
/// `max_resamples` extra draws. Throws SpectralError with eigenvalue histograms.
std::pair<SpectralStep, UpdateResult> sample_step(const RoundMatrices& rm, const Mat& xi, Index k_next,
                                                  const Denoiser& d, double rho, Rng& rng,
                                                  int max_resamples = 64);

/// Text histogram of eigenvalues (used in error diagnostics).
std::string eigen_histogram(const Vec& eigs, double lo, double hi, int bins = 10);

/// Data-independent plan: Xi^(0..T), beta^(0..T-1), Phi/Psi^(0..T).
struct SpectralPlan {
  std::vector<RoundMatrices> rounds;
  std::vector<Mat> xi;
  std::vector<Mat> beta;
  std::vector<RoundTelemetry> telemetry;
  int last_round() const noexcept { return static_cast<int>(xi.size()) - 1; }
};

struct PlanOptions {
  int max_resamples = 64;
  XiOptions xi;
};

/// ks[t] for t = 0..T, columns(t) = max(ks[t]/divisor, 1). Throws SpectralError
/// (with the partial telemetry in the message) when a round cannot be accepted.
SpectralPlan build_plan(const std::vector<Index>& ks, Index divisor, double eps0, int rounds, const Denoiser& d,
                        double rho, std::uint64_t seed, const PlanOptions& opts = {},
                        std::vector<RoundTelemetry>* partial = nullptr);

}  // namespace rgm
