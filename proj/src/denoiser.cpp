#include "rgm/denoiser.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "rgm/errors.hpp"

namespace rgm {

Denoiser Denoiser::make(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw ParameterError("make_denoiser: b must be positive");
  const double b2 = b * b;
  // (1 + e^{-2b^2})/2 - e^{-b^2} = (1 - e^{-b^2})^2 / 2, written to avoid cancellation.
  const double one_minus = -std::expm1(-b2);
  const double var = 0.5 * one_minus * one_minus;
  if (!(var > 0.0)) throw ParameterError("make_denoiser: b too small, variance underflows");
  const Denoiser d(b, 1.0 / std::sqrt(var));
  if (!(d.derivative_bound() <= 100.0)) {
    std::ostringstream os;
    os << "make_denoiser: b=" << b << " gives derivative bound " << d.derivative_bound() << " > 100";
    throw ParameterError(os.str());
  }
  return d;
}

double Denoiser::derivative_bound() const noexcept {
  return std::abs(a1_) * std::max(1.0, b_ * b_) + std::abs(a0_);
}

double Denoiser::phi_map(double u) const noexcept {
  const double b2 = b_ * b_;
  // cosh(x) - 1 = 2 sinh^2(x/2) keeps precision near u = 0.
  const double s = std::sinh(0.5 * b2 * u);
  return a1_ * a1_ * std::exp(-b2) * 2.0 * s * s;
}

double Denoiser::phi_second_deriv_at_zero() const noexcept {
  const double b2 = b_ * b_;
  return a1_ * a1_ * std::exp(-b2) * b2 * b2;
}

double Denoiser::taylor_coefficient(int m) const noexcept {
  if (m < 2 || m % 2 != 0) return 0.0;
  const double b2 = b_ * b_;
  // log-space: b^{2m} / m!
  const double log_c = 2.0 * std::log(a1_) - b2 + m * std::log(b2) - std::lgamma(m + 1.0);
  return std::exp(log_c);
}

double compute_lambda(const Denoiser& d, int max_m) {
  double lam = 0.0;
  for (int m = 2; m <= max_m; ++m) {
    lam = std::max(lam, std::abs(d.taylor_coefficient(m)) / std::ldexp(1.0, m));
  }
  return lam;
}

PaperConstants paper_constants(double rho, const Denoiser& d, double k0, int lambda_max_m) {
  PaperConstants pc;
  const double lam = compute_lambda(d, lambda_max_m);
  const double p2 = std::abs(d.phi_second_deriv_at_zero());
  const double eps0 = d.phi_map(rho / 2.0);
  pc.k0_bound = 1e30 * std::pow(rho, -30.0) * std::pow(p2, 4) * std::pow(lam, 4) / (eps0 * eps0);
  pc.gamma_paper = 1e-20 * std::pow(rho, 20.0) * p2 * p2 / (lam * lam);
  const double num = 1e-30 * p2 * p2 * lam * lam * std::pow(rho, 20.0) * k0;
  const double den = 1e40 * std::pow(p2, 4) * std::pow(lam, -4.0) * std::pow(rho, 24.0) * k0 * eps0 * eps0;
  if (num > 0.0 && den > 0.0 && std::log(den) != 0.0) {
    pc.k0_ratio = std::log(num) / std::log(den);
    pc.k0_ratio_ok = std::log(num) > 0.0 && std::log(den) > 0.0 && pc.k0_ratio < 1.01;
  } else {
    pc.k0_ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return pc;
}

double k_star_threshold(Index n) { return std::pow(std::log(static_cast<double>(n)), 1.1); }

Index Schedule::columns(int t) const {
  return std::max<Index>(ks.at(static_cast<std::size_t>(t)) / divisor, 1);
}

Schedule build_schedule(double rho, Index n, Index k0, ScheduleMode mode, const Denoiser& d,
                        const ScheduleOptions& opts) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("build_schedule: rho outside [0,1]");
  if (n < 2) throw ParameterError("build_schedule: n must be >= 2");
  if (opts.divisor < 1) throw ParameterError("build_schedule: divisor must be >= 1");
  if (opts.min_rounds < 0) throw ParameterError("build_schedule: min_rounds must be >= 0");

  Schedule s;
  s.rho = rho;
  s.n = n;
  s.k0 = k0;
  s.divisor = opts.divisor;
  s.eps0 = d.phi_map(rho / 2.0);
  s.phi2 = d.phi_second_deriv_at_zero();
  s.c2 = d.taylor_coefficient(2);
  s.lambda_cap = compute_lambda(d, opts.lambda_max_m);
  s.paper = paper_constants(rho, d, static_cast<double>(k0), opts.lambda_max_m);

  if (mode == ScheduleMode::paper_constants) {
    std::ostringstream os;
    os << "build_schedule: paper-constants mode is reference-only (K0 >= " << s.paper.k0_bound
       << ", gamma = " << s.paper.gamma_paper << ")";
    throw ScheduleError(os.str());
  }

  if (k0 < opts.divisor) {
    std::ostringstream os;
    os << "build_schedule: K0/" << opts.divisor << " < 1 for K0=" << k0;
    throw ScheduleError(os.str());
  }
  s.gamma = opts.gamma > 0.0 ? opts.gamma : 4.0 / static_cast<double>(k0);

  const double threshold = k_star_threshold(n);
  s.ks.push_back(k0);
  s.epss.push_back(s.eps0);
  int t_star = -1;
  for (int t = 0;; ++t) {
    if (t_star < 0 && static_cast<double>(s.ks[t]) >= threshold) t_star = t;
    if (t_star >= 0 && t >= std::max(t_star, opts.min_rounds)) break;
    if (t > 64) throw ScheduleError("build_schedule: K recursion did not reach (ln n)^1.1 in 64 rounds");
    const double next = s.gamma * static_cast<double>(s.ks[t]) * static_cast<double>(s.ks[t]);
    if (!(next < 1e15)) throw ScheduleError("build_schedule: K_t overflow");
    const auto k_next = static_cast<Index>(std::floor(next + 1e-9));
    if (k_next <= s.ks[t]) {
      std::ostringstream os;
      os << "build_schedule: K_{t+1}=" << k_next << " <= K_t=" << s.ks[t] << " at t=" << t
         << " (gamma=" << s.gamma << ")";
      throw ScheduleError(os.str());
    }
    s.ks.push_back(k_next);
    s.epss.push_back(d.phi_map(rho / 2.0 * s.epss[t]));
  }
  s.t_star = t_star;
  s.rounds = std::max(t_star, opts.min_rounds);

  for (double e : s.epss) {
    if (!(e > 0.0 && e < 1.0)) {
      // eps can only leave (0,1) for rho = 0 (eps = 0) or degenerate b.
      if (rho > 0.0) throw ScheduleError("build_schedule: eps_t left (0,1)");
    }
  }

  const double g = s.phi2 * rho * rho / 16.0;
  s.signal_growth_precondition =
      static_cast<double>(k0) * s.eps0 * s.eps0 * s.gamma * g * g > 1.0;
  s.signal_proxy_increasing = true;
  for (std::size_t t = 1; t < s.ks.size(); ++t) {
    const double prev = static_cast<double>(s.ks[t - 1]) * s.epss[t - 1] * s.epss[t - 1];
    const double cur = static_cast<double>(s.ks[t]) * s.epss[t] * s.epss[t];
    if (!(cur > prev)) s.signal_proxy_increasing = false;
  }
  return s;
}

}  // namespace rgm
