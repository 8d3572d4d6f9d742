#include "rgm/refine.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rgm/errors.hpp"
#include "rgm/kernels.hpp"

namespace rgm {

namespace {
double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
}  // namespace

double compute_alpha() { return upper_tail(1.0); }

double compute_psi(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("compute_psi: rho must lie in [0,1]");
  if (rho == 1.0) return compute_alpha();
  const double s = std::sqrt(1.0 - rho * rho);
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // Y | X = x ~ N(rho x, 1 - rho^2).
  auto f = [&](double x) { return c * std::exp(-0.5 * x * x) * upper_tail((1.0 - rho * x) / s); };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 1.0, std::numeric_limits<double>::infinity(), 20, 1e-13, &err);
  if (!(err <= 1e-10) || !std::isfinite(val)) {
    std::ostringstream os;
    os << "compute_psi: quadrature error estimate " << err << " at rho=" << rho;
    throw NumericalError(os.str());
  }
  return val;
}

RefineParams make_refine_params(double rho, Index n, Index max_swaps) {
  RefineParams p;
  p.alpha = compute_alpha();
  p.psi_rho = compute_psi(rho);
  p.delta = p.psi_rho * static_cast<double>(n) / 10.0;
  p.max_swaps = max_swaps > 0 ? max_swaps : 10 * n;
  return p;
}

double neighborhood_stat(const ObservedPair& obs, const Permutation& pi, Index u, Index v, double alpha) {
  const Index n = obs.a_prime.rows();
  if (u < 0 || u >= n || v < 0 || v >= n || pi.size() != n) throw ParameterError("neighborhood_stat: bad index");
  double s = 0.0;
  for (Index w = 0; w < n; ++w) {
    const double x = (obs.a_prime(u, w) >= 1.0 ? 1.0 : 0.0) - alpha;
    const double y = (obs.b_prime(v, pi(w)) >= 1.0 ? 1.0 : 0.0) - alpha;
    s += x * y;
  }
  return s;
}

Mat neighborhood_table(const ObservedPair& obs, const Permutation& pi, double alpha) {
  const Index n = obs.a_prime.rows();
  Mat abar, bbar;
  kernels::centered_indicator(obs.a_prime, alpha, abar);
  kernels::centered_indicator(obs.b_prime, alpha, bbar);
  // bpi(v, w) = bbar(v, pi(w))
  Mat bpi(n, n);
  for (Index w = 0; w < n; ++w) bpi.col(w) = bbar.col(pi(w));
  Mat table(n, n);
  table.noalias() = abar * bpi.transpose();
  return table;
}

RefineResult apply_swap_rule(const Mat& table, const Permutation& start, double delta, Index max_swaps) {
  const Index n = table.rows();
  RefineResult res;
  res.pi = start;
  Permutation inv = start.inverse();
  const double lo = delta / 10.0;
  std::vector<char> bad_u(static_cast<std::size_t>(n)), bad_v(static_cast<std::size_t>(n));
  auto refresh = [&](Index u) {
    bad_u[static_cast<std::size_t>(u)] = table(u, res.pi(u)) < lo;
    bad_v[static_cast<std::size_t>(res.pi(u))] = table(u, res.pi(u)) < lo;
  };
  for (Index u = 0; u < n; ++u) refresh(u);

  while (true) {
    bool applied = false;
    for (Index u = 0; u < n && !applied; ++u) {
      if (!bad_u[static_cast<std::size_t>(u)]) continue;
      for (Index v = 0; v < n; ++v) {
        if (!bad_v[static_cast<std::size_t>(v)] || table(u, v) < delta) continue;
        if (static_cast<Index>(res.swaps.size()) >= max_swaps) {
          res.truncated = true;
          return res;
        }
        const Index old_image = res.pi(u);
        const Index w = inv(v);
        res.swaps.push_back({u, v, old_image, w, table(u, v), table(u, old_image), table(w, v)});
        res.pi.set(u, v);
        res.pi.set(w, old_image);
        inv.set(v, u);
        inv.set(old_image, w);
        refresh(u);
        refresh(w);
        applied = true;
        break;
      }
    }
    if (!applied) break;
  }
  return res;
}

RefineResult seeded_refine(const ObservedPair& obs, const Permutation& pi_tilde, const RefineParams& params) {
  if (pi_tilde.size() != obs.a_prime.rows()) throw ParameterError("seeded_refine: permutation size mismatch");
  const Mat table = neighborhood_table(obs, pi_tilde, params.alpha);
  return apply_swap_rule(table, pi_tilde, params.delta, params.max_swaps);
}

std::int64_t final_select_score(const ObservedPair& obs, const Permutation& pi) {
  return kernels::agreement_score(obs.a_prime, obs.b_prime, pi);
}

SelectResult final_select(const ObservedPair& obs, const std::vector<Permutation>& candidates) {
  if (candidates.empty()) throw ParameterError("final_select: no candidates");
  SelectResult r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    r.scores.push_back(final_select_score(obs, candidates[i]));
    if (r.scores[i] > r.scores[r.index]) r.index = i;
  }
  return r;
}

}  // namespace rgm
