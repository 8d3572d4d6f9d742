#include "rgm/preprocess.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rgm/errors.hpp"

namespace rgm {

namespace {
constexpr std::uint64_t kTagG = 0x47;
constexpr std::uint64_t kTagH = 0x48;
constexpr std::uint64_t kTagCleanA = 0x4341;
constexpr std::uint64_t kTagCleanB = 0x4342;
}  // namespace

Reinjected reinject_noise(const ObservedPair& obs, std::uint64_t seed, bool zero_noise) {
  const Index n = obs.a_prime.rows();
  if (obs.a_prime.cols() != n || obs.b_prime.rows() != n || obs.b_prime.cols() != n) {
    throw ParameterError("reinject_noise: A' and B' must be square and of equal size");
  }
  Reinjected r;
  r.g = Mat::Zero(n, n);
  r.h = Mat::Zero(n, n);
  if (!zero_noise) {
    kernels::fill_symmetric_gaussian(r.g, derive_seed(seed, kTagG));
    kernels::fill_symmetric_gaussian(r.h, derive_seed(seed, kTagH));
  }
  kernels::reinject(obs.a_prime, r.g, r.hat_a);
  kernels::reinject(obs.b_prime, r.h, r.hat_b);
  return r;
}

CleanResult spectral_clean(Mat m, double threshold_mult, std::uint64_t seed, const PowerOptions& popts) {
  const Index n = m.rows();
  if (m.cols() != n) throw ParameterError("spectral_clean: square matrix required");
  if (!(threshold_mult > 0.0)) throw ParameterError("spectral_clean: threshold_mult must be positive");
  const double tau = threshold_mult * std::sqrt(static_cast<double>(n));
  PowerOptions po = popts;
  po.stop_below = tau;

  CleanResult res;
  Rng pick_rng(derive_seed(seed, 0));
  for (int it = 0;; ++it) {
    const SingularPair sp = leading_singular(m, derive_seed(seed, static_cast<std::uint64_t>(it) + 1), po);
    res.final_sigma = sp.sigma;
    res.final_upper = sp.upper;
    if (sp.certified_below || (sp.converged && sp.sigma < tau)) break;
    if (!sp.converged && sp.sigma < tau) {
      std::ostringstream os;
      os << "spectral_clean: singular solver did not converge (iter " << it << ", " << sp.iterations
         << " power steps, estimate " << sp.sigma << ", bound " << sp.upper << ", threshold " << tau << ")";
      throw NumericalError(os.str());
    }
    if (it >= n) throw NumericalError("spectral_clean: more than n removals");

    std::vector<double> w(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 0.5 * (sp.v(i) * sp.v(i) + sp.u(i) * sp.u(i));
    std::discrete_distribution<Index> pick(w.begin(), w.end());
    const Index i = pick(pick_rng);
    m.row(i).setZero();
    m.col(i).setZero();
    res.zeroed.push_back(i);
    res.trace.push_back({it, sp.sigma, i, sp.iterations});
  }
  res.cleaned = std::move(m);
  return res;
}

CleanedPair clean_pair(const ObservedPair& obs, std::uint64_t seed, const CleanOptions& opts) {
  Reinjected r = reinject_noise(obs, seed, opts.zero_noise);
  CleanResult ca = spectral_clean(std::move(r.hat_a), opts.threshold_mult, derive_seed(seed, kTagCleanA), opts.power);
  CleanResult cb = spectral_clean(std::move(r.hat_b), opts.threshold_mult, derive_seed(seed, kTagCleanB), opts.power);
  CleanedPair cp;
  cp.a_clean = std::move(ca.cleaned);
  cp.b_clean = std::move(cb.cleaned);
  cp.s = std::move(ca.zeroed);
  cp.t = std::move(cb.zeroed);
  cp.g_noise = std::move(r.g);
  cp.h_noise = std::move(r.h);
  cp.iters_a = static_cast<int>(ca.trace.size());
  cp.iters_b = static_cast<int>(cb.trace.size());
  cp.trace_a = std::move(ca.trace);
  cp.trace_b = std::move(cb.trace);
  return cp;
}

void write_clean_trace(std::ostream& os, std::string_view label, const std::vector<CleanStep>& trace) {
  for (const CleanStep& s : trace) {
    nlohmann::json j{{"matrix", label},
                     {"iter", s.iter},
                     {"sigma", s.sigma},
                     {"removed", s.removed},
                     {"solver_iterations", s.solver_iterations}};
    os << j.dump() << '\n';
  }
}

}  // namespace rgm
