#include "rgm/linalg.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "rgm/errors.hpp"

namespace rgm {

double dense_op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

namespace {

SingularPair dense_pair(const Mat& m) {
  SingularPair sp;
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sp.sigma = svd.singularValues()(0);
  sp.u = svd.matrixU().col(0);
  sp.v = svd.matrixV().col(0);
  sp.converged = true;
  sp.dense = true;
  sp.upper = sp.sigma;
  return sp;
}

}  // namespace

SingularPair leading_singular(const Mat& m, std::uint64_t seed, const PowerOptions& opts) {
  const Index n = m.cols();
  if (m.rows() != n || n == 0) throw ParameterError("leading_singular: square non-empty matrix required");
  if (!opts.force_power && n <= opts.dense_cutoff) {
    SingularPair sp = dense_pair(m);
    sp.certified_below = opts.stop_below > 0.0 && sp.sigma < opts.stop_below;
    return sp;
  }

  SingularPair sp;
  const double fro = m.norm();
  if (fro == 0.0) {
    sp.u = Vec::Unit(n, 0);
    sp.v = Vec::Unit(n, 0);
    sp.converged = true;
    sp.certified_below = opts.stop_below > 0.0;
    return sp;
  }
  sp.upper = fro;

  Rng rng(seed);
  std::normal_distribution<double> nd;
  Vec x(n);
  for (Index i = 0; i < n; ++i) x(i) = nd(rng);
  x /= x.norm();

  const double log_t = std::log(opts.delta * std::sqrt(std::numbers::pi / 2.0) / std::sqrt(static_cast<double>(n)));
  double log_growth = 0.0;
  double prev = -1.0;
  Vec y(n), z(n);
  for (int k = 1; k <= opts.max_iter; ++k) {
    kernels::matvec(m, x, y);
    kernels::matvec_t(m, y, z);
    const double s2 = y.squaredNorm();
    const double zn = z.norm();
    sp.iterations = k;
    sp.sigma = std::sqrt(s2);
    if (zn == 0.0) throw NumericalError("leading_singular: start vector hit the null space");
    log_growth += std::log(zn);
    sp.upper = std::min(sp.upper, std::exp((log_growth - log_t) / (2.0 * k)));
    x = z / zn;
    if (prev >= 0.0 && std::abs(sp.sigma - prev) <= opts.tol * sp.sigma) {
      sp.converged = true;
      break;
    }
    prev = sp.sigma;
    if (opts.stop_below > 0.0 && sp.upper < opts.stop_below) {
      sp.certified_below = true;
      break;
    }
  }
  if (opts.stop_below > 0.0 && sp.upper < opts.stop_below) sp.certified_below = true;
  // Right vector x, left vector m x / sigma.
  sp.v = x;
  kernels::matvec(m, x, y);
  sp.sigma = y.norm();
  sp.u = sp.sigma > 0.0 ? Vec(y / sp.sigma) : Vec::Unit(n, 0);
  return sp;
}

}  // namespace rgm
