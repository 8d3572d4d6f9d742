#include "rgm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rgm/errors.hpp"

namespace rgm {

namespace {

bool in_phi_window(double x) { return x > 0.9 && x < 1.1; }
bool in_psi_window(double x, double eps) { return x > 0.9 * eps && x < 1.1 * eps; }

Index required_count(Index k) { return (3 * k + 3) / 4; }

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

double offdiag_norm(const Mat& m) {
  Mat o = m;
  o.diagonal().setZero();
  return o.norm();
}

}  // namespace

RoundMatrices RoundMatrices::initial(Index k0, double eps0) {
  RoundMatrices rm;
  rm.k = k0;
  rm.eps = eps0;
  rm.phi = Mat::Identity(k0, k0);
  rm.psi = eps0 * Mat::Identity(k0, k0);
  return rm;
}

WindowCounts window_counts(const Vec& phi_eigs, const Vec& psi_eigs, double eps) {
  WindowCounts c;
  c.required = required_count(phi_eigs.size());
  for (Index i = 0; i < phi_eigs.size(); ++i) c.phi_in += in_phi_window(phi_eigs(i)) ? 1 : 0;
  for (Index i = 0; i < psi_eigs.size(); ++i) c.psi_in += in_psi_window(psi_eigs(i), eps) ? 1 : 0;
  return c;
}

WindowCounts window_counts(const RoundMatrices& rm) {
  Eigen::SelfAdjointEigenSolver<Mat> e1(rm.phi, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> e2(rm.psi, Eigen::EigenvaluesOnly);
  return window_counts(e1.eigenvalues(), e2.eigenvalues(), rm.eps);
}

XiResult build_xi(const RoundMatrices& rm, Index m, const XiOptions& opts) {
  const Index k = rm.k;
  if (rm.phi.rows() != k || rm.phi.cols() != k || rm.psi.rows() != k || rm.psi.cols() != k) {
    throw ParameterError("build_xi: Phi/Psi must be K x K");
  }
  if (m < 1 || m > k) throw ParameterError("build_xi: column count outside [1, K]");

  Eigen::SelfAdjointEigenSolver<Mat> e1(rm.phi);
  Eigen::SelfAdjointEigenSolver<Mat> e2(rm.psi);
  XiResult res;
  res.counts = window_counts(e1.eigenvalues(), e2.eigenvalues(), rm.eps);

  std::vector<Index> good1, good2;
  for (Index i = 0; i < k; ++i) {
    if (in_phi_window(e1.eigenvalues()(i))) good1.push_back(i);
    if (in_psi_window(e2.eigenvalues()(i), rm.eps)) good2.push_back(i);
  }
  const auto d1 = static_cast<Index>(good1.size());
  const auto d2 = static_cast<Index>(good2.size());
  if (d1 < m || d2 < m) {
    std::ostringstream os;
    os << "build_xi: only " << d1 << " Phi / " << d2 << " Psi eigenvalues in window, need " << m;
    throw SpectralError(os.str());
  }
  Mat v1(k, d1), v2(k, d2);
  for (Index i = 0; i < d1; ++i) v1.col(i) = e1.eigenvectors().col(good1[static_cast<std::size_t>(i)]);
  for (Index i = 0; i < d2; ++i) v2.col(i) = e2.eigenvectors().col(good2[static_cast<std::size_t>(i)]);

  // Principal angles: cosines equal to one span the intersection.
  Eigen::BDCSVD<Mat> svd(v1.transpose() * v2, Eigen::ComputeThinU);
  const Vec& cosines = svd.singularValues();
  Index dim = 0;
  while (dim < cosines.size() && cosines(dim) >= 1.0 - opts.intersection_tol) ++dim;
  res.intersection_dim = dim;
  if (dim < m) {
    std::ostringstream os;
    os << "build_xi: span intersection has dimension " << dim << " < " << m;
    throw SpectralError(os.str());
  }
  const Mat w = v1 * svd.matrixU().leftCols(dim);

  const Mat a = symmetrized(w.transpose() * rm.psi * w);
  const Mat b = symmetrized(w.transpose() * rm.phi * w);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(a, b);
  if (ges.info() != Eigen::Success) throw NumericalError("build_xi: generalized eigensolver failed");

  std::vector<Index> order;
  for (Index i = 0; i < dim; ++i) {
    if (in_psi_window(ges.eigenvalues()(i), rm.eps)) order.push_back(i);
  }
  if (static_cast<Index>(order.size()) < m) {
    std::ostringstream os;
    os << "build_xi: " << order.size() << " Ritz values in (0.9 eps, 1.1 eps), need " << m;
    throw SpectralError(os.str());
  }
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::abs(ges.eigenvalues()(x) - rm.eps) < std::abs(ges.eigenvalues()(y) - rm.eps);
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());

  Mat x(dim, m);
  for (Index j = 0; j < m; ++j) x.col(j) = ges.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  res.xi = w * x;

  const Mat gp = res.xi.transpose() * rm.phi * res.xi;
  const Mat gs = res.xi.transpose() * rm.psi * res.xi;
  res.phi_orth_err = (gp - Mat::Identity(m, m)).norm();
  res.psi_offdiag = offdiag_norm(gs);
  res.ritz = gs.diagonal();
  if (res.phi_orth_err > opts.check_tol || res.psi_offdiag > opts.check_tol) {
    std::ostringstream os;
    os << "build_xi: ||Xi^T Phi Xi - I||_F = " << res.phi_orth_err << ", offdiag(Xi^T Psi Xi) = " << res.psi_offdiag;
    throw NumericalError(os.str());
  }
  return res;
}

Mat sample_beta(Index m, Index k_next, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  Mat beta(m, k_next);
  std::bernoulli_distribution coin(0.5);
  for (Index j = 0; j < k_next; ++j)
    for (Index i = 0; i < m; ++i) beta(i, j) = coin(rng) ? s : -s;
  return beta;
}

UpdateResult update_round(const RoundMatrices& rm, const Mat& xi, const Mat& beta, const Denoiser& d, double rho) {
  const Index m = xi.cols();
  if (xi.rows() != rm.k || beta.rows() != m) throw ParameterError("update_round: dimension mismatch");
  const Index kn = beta.cols();
  const Mat dm = symmetrized(xi.transpose() * rm.psi * xi);
  const Mat g1 = beta.transpose() * beta;
  const Mat g2 = (0.5 * rho) * (beta.transpose() * dm * beta);

  UpdateResult up;
  up.next.k = kn;
  up.next.phi.resize(kn, kn);
  up.next.psi.resize(kn, kn);
  auto clamp = [&up](double x) {
    if (std::abs(x) > 1.0 + 1e-12) ++up.clamps;
    return std::clamp(x, -1.0, 1.0);
  };
  for (Index j = 0; j < kn; ++j) {
    for (Index i = j; i < kn; ++i) {
      const double p = d.phi_map(clamp(0.5 * (g1(i, j) + g1(j, i))));
      const double q = d.phi_map(clamp(0.5 * (g2(i, j) + g2(j, i))));
      up.next.phi(i, j) = p;
      up.next.phi(j, i) = p;
      up.next.psi(i, j) = q;
      up.next.psi(j, i) = q;
    }
  }
  up.eps_next = d.phi_map(std::clamp(0.5 * rho * dm.trace() / static_cast<double>(m), -1.0, 1.0));
  up.next.eps = up.eps_next;
  up.growth_ok = up.eps_next >= rho * rho * d.phi_second_deriv_at_zero() * rm.eps * rm.eps / 16.0;
  return up;
}

std::string eigen_histogram(const Vec& eigs, double lo, double hi, int bins) {
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  for (Index i = 0; i < eigs.size(); ++i) {
    int b = static_cast<int>((eigs(i) - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  std::ostringstream os;
  for (int b = 0; b < bins; ++b) {
    os << "[" << lo + b * width << "," << lo + (b + 1) * width << "):" << counts[static_cast<std::size_t>(b)];
    if (b + 1 < bins) os << ' ';
  }
  return os.str();
}

std::pair<SpectralStep, UpdateResult> sample_step(const RoundMatrices& rm, const Mat& xi, Index k_next,
                                                  const Denoiser& d, double rho, Rng& rng, int max_resamples) {
  Vec last_phi, last_psi;
  double last_eps = 0.0;
  WindowCounts last;
  for (int attempt = 0; attempt <= max_resamples; ++attempt) {
    Mat beta = sample_beta(xi.cols(), k_next, rng);
    UpdateResult up = update_round(rm, xi, beta, d, rho);
    Eigen::SelfAdjointEigenSolver<Mat> e1(up.next.phi, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Mat> e2(up.next.psi, Eigen::EigenvaluesOnly);
    last = window_counts(e1.eigenvalues(), e2.eigenvalues(), up.eps_next);
    if (last.ok()) {
      SpectralStep step{xi, std::move(beta), attempt};
      return {std::move(step), std::move(up)};
    }
    last_phi = e1.eigenvalues();
    last_psi = e2.eigenvalues();
    last_eps = up.eps_next;
  }
  std::ostringstream os;
  os << "sample_step: window condition failed after " << max_resamples << " resamples (K=" << rm.k
     << ", m=" << xi.cols() << ", K'=" << k_next << "); last candidate has " << last.phi_in << " Phi and "
     << last.psi_in << " Psi eigenvalues in window, need " << last.required << "\n  Phi eigs: "
     << eigen_histogram(last_phi, last_phi.minCoeff(), last_phi.maxCoeff()) << "\n  Psi/eps' eigs: "
     << eigen_histogram(last_psi / last_eps, (last_psi / last_eps).minCoeff(), (last_psi / last_eps).maxCoeff());
  throw SpectralError(os.str());
}

SpectralPlan build_plan(const std::vector<Index>& ks, Index divisor, double eps0, int rounds, const Denoiser& d,
                        double rho, std::uint64_t seed, const PlanOptions& opts,
                        std::vector<RoundTelemetry>* partial) {
  if (rounds < 0 || static_cast<std::size_t>(rounds) + 1 > ks.size()) {
    throw ParameterError("build_plan: schedule shorter than requested rounds");
  }
  SpectralPlan plan;
  plan.rounds.push_back(RoundMatrices::initial(ks[0], eps0));
  Rng rng(seed);
  try {
    for (int t = 0; t <= rounds; ++t) {
      const RoundMatrices& rm = plan.rounds.back();
      const Index m = std::max<Index>(ks[static_cast<std::size_t>(t)] / divisor, 1);
      RoundTelemetry tel;
      tel.t = t;
      tel.k = rm.k;
      tel.m = m;
      tel.eps = rm.eps;
      XiResult xr = build_xi(rm, m, opts.xi);
      tel.intersection_dim = xr.intersection_dim;
      tel.phi_orth_err = xr.phi_orth_err;
      tel.psi_offdiag = xr.psi_offdiag;
      tel.ritz_min = xr.ritz.minCoeff();
      tel.ritz_max = xr.ritz.maxCoeff();
      tel.ritz_in_window = tel.ritz_min > 0.9 * rm.eps && tel.ritz_max < 1.1 * rm.eps;
      tel.counts = xr.counts;
      if (t < rounds) {
        tel.k_next = ks[static_cast<std::size_t>(t) + 1];
        auto [step, up] = sample_step(rm, xr.xi, tel.k_next, d, rho, rng, opts.max_resamples);
        tel.eps_next = up.eps_next;
        tel.resamples = step.resamples;
        tel.clamps = up.clamps;
        tel.growth_ok = up.growth_ok;
        tel.counts_next = window_counts(up.next);
        plan.beta.push_back(std::move(step.beta));
        plan.xi.push_back(std::move(xr.xi));
        plan.telemetry.push_back(tel);
        plan.rounds.push_back(std::move(up.next));
      } else {
        plan.xi.push_back(std::move(xr.xi));
        plan.telemetry.push_back(tel);
      }
    }
  } catch (...) {
    if (partial) *partial = plan.telemetry;
    throw;
  }
  return plan;
}

}  // namespace rgm
