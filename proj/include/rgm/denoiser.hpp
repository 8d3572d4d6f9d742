#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rgm/permutation.hpp"

namespace rgm {

/// Smooth bounded denoiser phi(x) = a1 cos(b x) + a0 with a0 = -a1 exp(-b^2/2)
/// and a1 chosen so that E[phi(X)] = 0, E[phi(X)^2] = 1 for X ~ N(0,1).
///
/// For this family the correlation map has the closed form
///   varphi(u) = E[phi(X) phi(Y)] = a1^2 exp(-b^2) (cosh(b^2 u) - 1),
/// with (X, Y) standard bivariate normal at correlation u, so every derived
/// constant (Taylor coefficients, varphi''(0), Lambda) is exact.
class Denoiser {
 public:
  /// Throws ParameterError for b <= 0 or when the derivative bound
  /// sum |a_i| max(1, b_i^2) exceeds 100.
  static Denoiser make(double b = 1.0);

  double b() const noexcept { return b_; }
  double a1() const noexcept { return a1_; }
  double a0() const noexcept { return a0_; }

  /// Cosine terms (a_i, b_i); the constant offset is the b_i = 0 term.
  std::vector<std::pair<double, double>> terms() const { return {{a1_, b_}, {a0_, 0.0}}; }

  /// Normalization a1 itself: [(1 + e^{-2b^2})/2 - e^{-b^2}]^{-1/2}.
  double var_norm() const noexcept { return a1_; }

  double operator()(double x) const noexcept { return a1_ * std::cos(b_ * x) + a0_; }
  double derivative(double x) const noexcept { return -a1_ * b_ * std::sin(b_ * x); }
  double second_derivative(double x) const noexcept { return -a1_ * b_ * b_ * std::cos(b_ * x); }

  /// sum_i |a_i| max(1, b_i^2); bounds sup|phi|, sup|phi'|, sup|phi''|.
  double derivative_bound() const noexcept;

  /// varphi(u) for |u| <= 1 (closed form).
  double phi_map(double u) const noexcept;
  /// varphi''(0) = a1^2 e^{-b^2} b^4.
  double phi_second_deriv_at_zero() const noexcept;
  /// Taylor coefficient c_m of varphi: a1^2 e^{-b^2} b^{2m} / m! for even m >= 2, else 0.
  double taylor_coefficient(int m) const noexcept;

 private:
  Denoiser(double b, double a1) : b_(b), a1_(a1), a0_(-a1 * std::exp(-0.5 * b * b)) {}

  double b_ = 1.0;
  double a1_ = 1.0;
  double a0_ = 0.0;
};

inline Denoiser make_denoiser(double b = 1.0) { return Denoiser::make(b); }

/// Lambda = max_{2 <= m <= max_m} |c_m| / 2^m.
double compute_lambda(const Denoiser& d, int max_m = 40);

enum class ScheduleMode { paper_constants, practical };

struct ScheduleOptions {
  /// K_{t+1} = gamma K_t^2 in practical mode; <= 0 selects 4 / K0.
  double gamma = 0.0;
  /// K_t / divisor columns per round (integer division).
  Index divisor = 12;
  /// Extend the K/eps lists to at least this many rounds past t*.
  int min_rounds = 0;
  int lambda_max_m = 40;
};

/// Reference constants from the asymptotic analysis; reported, never run.
struct PaperConstants {
  double k0_bound = 0.0;      ///< 1e30 rho^-30 |varphi''(0)|^4 Lambda^4 eps0^-2
  double gamma_paper = 0.0;   ///< 1e-20 rho^20 |varphi''(0)|^2 Lambda^-2
  double k0_ratio = 0.0;      ///< log(...)/log(...) second K0 condition
  bool k0_ratio_ok = false;   ///< k0_ratio < 1.01 (and both logs well defined)
};

PaperConstants paper_constants(double rho, const Denoiser& d, double k0, int lambda_max_m = 40);

/// A-priori K/eps schedule. eps_{t+1} here uses the proxy varphi(rho/2 eps_t);
/// the realized values come from the spectral plan at run time.
struct Schedule {
  double rho = 0.0;
  Index n = 0;
  Index k0 = 0;
  Index divisor = 12;
  double gamma = 0.0;
  double eps0 = 0.0;
  std::vector<Index> ks;
  std::vector<double> epss;
  int t_star = 0;
  /// max(t_star, min_rounds): index of the last round the AMP loop runs.
  int rounds = 0;
  double c2 = 0.0;
  double lambda_cap = 0.0;
  double phi2 = 0.0;
  /// K0 eps0^2 gamma (varphi''(0) rho^2 / 16)^2 > 1.
  bool signal_growth_precondition = false;
  /// K_t eps_t^2 strictly increasing along the a-priori list.
  bool signal_proxy_increasing = false;
  PaperConstants paper;

  Index columns(int t) const;
};

/// (ln n)^{1.1}
double k_star_threshold(Index n);

Schedule build_schedule(double rho, Index n, Index k0, ScheduleMode mode, const Denoiser& d,
                        const ScheduleOptions& opts = {});

}  // namespace rgm
