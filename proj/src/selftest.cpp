#include "rgm/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rgm/denoiser.hpp"
#include "rgm/errors.hpp"
#include "rgm/kernels.hpp"

namespace rgm {

void gauss_hermite(int nodes, Vec& x, Vec& w) {
  // Jacobi matrix of the monic probabilists' Hermite recurrence: off-diagonal sqrt(k).
  Mat j = Mat::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Mat> es(j);
  x = es.eigenvalues();
  w = es.eigenvectors().row(0).transpose().array().square();
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double brute_force_lap(const Mat& s) {
  std::vector<Index> p(static_cast<std::size_t>(s.rows()));
  std::iota(p.begin(), p.end(), Index{0});
  double best = -std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (Index i = 0; i < s.rows(); ++i) v += s(i, p[static_cast<std::size_t>(i)]);
    best = std::max(best, v);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

std::vector<Assertion> run_selftest() {
  std::vector<Assertion> out;
  auto add = [&](std::string name, bool pass, std::string detail) { out.push_back({std::move(name), pass, std::move(detail)}); };

  const Denoiser d = make_denoiser(1.0);
  Vec x, w;
  gauss_hermite(120, x, w);
  {
    double m1 = 0.0, m2 = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      m1 += w(i) * d(x(i));
      m2 += w(i) * d(x(i)) * d(x(i));
    }
    add("denoiser_moments", std::abs(m1) < 1e-10 && std::abs(m2 - 1.0) < 1e-10,
        "E[phi]=" + fmt(m1) + " E[phi^2]-1=" + fmt(m2 - 1.0));
  }
  {
    double worst = 0.0;
    for (int k = -10; k <= 10; ++k) {
      const double u = 0.1 * k;
      const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      double q = 0.0;
      for (Index i = 0; i < x.size(); ++i)
        for (Index jj = 0; jj < x.size(); ++jj) q += w(i) * w(jj) * d(x(i)) * d(u * x(i) + s * x(jj));
      worst = std::max(worst, std::abs(q - d.phi_map(u)));
    }
    add("phi_map_quadrature", worst < 1e-8, "max error " + fmt(worst));
  }
  {
    const double lam = compute_lambda(d);
    bool ok = d.taylor_coefficient(0) == 0.0 && d.taylor_coefficient(1) == 0.0;
    for (int m = 2; m <= 40; ++m) ok = ok && std::abs(d.taylor_coefficient(m)) <= lam * std::ldexp(1.0, m) * (1 + 1e-12);
    add("taylor_coefficients", ok, "Lambda=" + fmt(lam));
  }
  {
    const CorrelatedInstance a = generate(60, 0.7, PiMode::uniform, 11);
    const CorrelatedInstance b = generate(60, 0.7, PiMode::uniform, 11);
    const bool sym = a.a == a.a.transpose() && a.b == a.b.transpose() && a.a.diagonal().isZero(0.0) &&
                     a.b.diagonal().isZero(0.0);
    add("generate_symmetric_deterministic", sym && a.a == b.a && a.b == b.b && a.pi_star == b.pi_star, "n=60");
  }
  {
    const CorrelatedInstance inst = generate(80, 0.5, PiMode::uniform, 5);
    bool ok = true;
    for (Strategy s : all_strategies()) {
      auto [obs, plan] = corrupt(inst, 0.1, s, 9);
      Mat diff = obs.a_prime - inst.a;
      std::vector<char> in(80, 0);
      for (Index q : plan.q) in[static_cast<std::size_t>(q)] = 1;
      for (Index j = 0; j < 80; ++j)
        for (Index i = 0; i < 80; ++i)
          if (!(in[static_cast<std::size_t>(i)] && in[static_cast<std::size_t>(j)]) && diff(i, j) != 0.0) ok = false;
      ok = ok && obs.a_prime == obs.a_prime.transpose() && static_cast<Index>(plan.q.size()) == 8;
    }
    add("corruption_support", ok, "four strategies, n=80, eps=0.1");
  }
  {
    Mat a1(120, 120), a2(120, 120), b1(120, 120), b2(120, 120);
    Rng rng(3);
    const Permutation p = Permutation::uniform(120, rng);
    kernels::fill_correlated_pair(a1, b1, p, 0.6, 77);
    kernels::serial::fill_correlated_pair(a2, b2, p, 0.6, 77);
    Vec v = Vec::LinSpaced(120, -1.0, 1.0), y1, y2;
    kernels::matvec(a1, v, y1);
    kernels::serial::matvec(a2, v, y2);
    const bool ok = a1 == a2 && b1 == b2 && y1 == y2 &&
                    kernels::agreement_score(a1, b1, p) == kernels::serial::agreement_score(a2, b2, p);
    add("kernels_match_serial", ok, "n=120");
  }
  {
    CorrelatedInstance inst = generate(150, 0.5, PiMode::identity, 21);
    CorruptionOptions co;
    co.spike_lambda = 30.0 * std::sqrt(150.0);
    auto [obs, plan] = corrupt(inst, 0.04, Strategy::rank1_spike, 4, co);
    const CleanedPair cp = clean_pair(obs, 8);
    const double tau = 10.0 * std::sqrt(150.0);
    const bool ok = dense_op_norm(cp.a_clean) < tau && dense_op_norm(cp.b_clean) < tau;
    add("cleaning_norm_guard", ok, "|S|=" + std::to_string(cp.s.size()) + " |T|=" + std::to_string(cp.t.size()));
  }
  {
    Rng rng(99);
    std::normal_distribution<double> nd;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      Mat s(6, 6);
      for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 6; ++i) s(i, j) = nd(rng);
      ok = ok && std::abs(assignment_value(s, solve_lap(s)) - brute_force_lap(s)) < 1e-12;
    }
    add("lap_brute_force", ok, "20 random 6x6");
  }
  {
    const double alpha = compute_alpha();
    bool ok = true;
    double prev = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double p = compute_psi(0.1 * k);
      ok = ok && p >= alpha * alpha - 1e-8 && p <= alpha + 1e-8 && p >= prev - 1e-8;
      prev = p;
    }
    add("psi_bounds_monotone", ok, "alpha=" + fmt(alpha));
  }
  {
    const CorrelatedInstance inst = generate(200, 0.9, PiMode::uniform, 31);
    const ObservedPair obs{inst.a, inst.b};
    const RefineParams rp = make_refine_params(0.9, 200);
    const RefineResult r1 = seeded_refine(obs, inst.pi_star, rp);
    const RefineResult r2 = seeded_refine(obs, r1.pi, rp);
    add("refine_idempotent", r2.swaps.empty() && r2.pi == r1.pi, "swaps=" + std::to_string(r1.swaps.size()));
  }
  {
    const RoundMatrices rm = RoundMatrices::initial(24, 0.3);
    const XiResult xr = build_xi(rm, 2);
    add("xi_isotropic", xr.phi_orth_err <= 1e-8 && xr.psi_offdiag <= 1e-8, "K=24 eps=0.3");
  }
  return out;
}

}  // namespace rgm
