#include <cmath>
#include <random>

#include "rgm/errors.hpp"
#include "rgm/kernels.hpp"

namespace rgm::kernels::serial {

void fill_symmetric_gaussian(Mat& a, std::uint64_t seed) {
  const Index n = a.rows();
  a.setZero();
  for (Index i = 1; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> nd;
    for (Index j = 0; j < i; ++j) {
      const double x = nd(rng);
      a(i, j) = x;
      a(j, i) = x;
    }
  }
}

void fill_correlated_pair(Mat& a, Mat& b, const Permutation& pi, double rho, std::uint64_t seed) {
  const Index n = a.rows();
  const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  a.setZero();
  b.setZero();
  for (Index i = 1; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> nd;
    const Index pi_i = pi(i);
    for (Index j = 0; j < i; ++j) {
      const double x = nd(rng);
      const double z = nd(rng);
      const double y = rho * x + s * z;
      a(i, j) = x;
      a(j, i) = x;
      b(pi_i, pi(j)) = y;
      b(pi(j), pi_i) = y;
    }
  }
}

void reinject(const Mat& x, const Mat& g, Mat& out) {
  const Index n = x.rows();
  out.resize(n, n);
  const double r = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i > j) out(i, j) = (x(i, j) + g(i, j)) * r;
      else if (i < j) out(i, j) = (x(i, j) - g(i, j)) * r;
      else out(i, j) = 0.0;
    }
  }
}

void matvec(const Mat& m, const Vec& x, Vec& y) {
  const Index n = m.rows();
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < m.cols(); ++j) acc += m(i, j) * x(j);
    y(i) = acc;
  }
}

void matvec_t(const Mat& m, const Vec& x, Vec& y) {
  const Index n = m.cols();
  y.resize(n);
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < m.rows(); ++i) acc += m(i, j) * x(i);
    y(j) = acc;
  }
}

void apply_denoiser(const Denoiser& d, Mat& x) {
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) x(i, j) = d(x(i, j));
}

void centered_indicator(const Mat& m, double alpha, Mat& out) {
  out.resize(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out(i, j) = (m(i, j) >= 1.0 ? 1.0 : 0.0) - alpha;
}

std::int64_t agreement_score(const Mat& a, const Mat& b, const Permutation& pi) {
  const Index n = a.rows();
  if (b.rows() != n || pi.size() != n) throw ParameterError("agreement_score: size mismatch");
  std::int64_t total = 0;
  for (Index v = 1; v < n; ++v) {
    const Index pv = pi(v);
    for (Index u = 0; u < v; ++u) {
      if (a(u, v) >= 1.0 && b(pi(u), pv) >= 1.0) ++total;
    }
  }
  return total;
}

}  // namespace rgm::kernels::serial
