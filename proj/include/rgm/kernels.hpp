#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "rgm/denoiser.hpp"
#include "rgm/permutation.hpp"

namespace rgm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Data-parallel loops of the pipeline. The default namespace is the
/// OpenMP version; `kernels::serial` holds the single-threaded reference
/// with identical results (row-seeded randomness, same summation order
/// per output entry).
namespace kernels {

/// Strict lower triangle of `a` filled with N(0,1), mirrored; diagonal 0.
/// Row i draws from its own stream derive_seed(seed, i).
void fill_symmetric_gaussian(Mat& a, std::uint64_t seed);

/// a as above; b[pi(i), pi(j)] = rho a[i,j] + sqrt(1 - rho^2) z[i,j].
void fill_correlated_pair(Mat& a, Mat& b, const Permutation& pi, double rho, std::uint64_t seed);

/// out[i,j] = (x[i,j] + g[i,j]) / sqrt2 for i > j, (x[i,j] - g[i,j]) / sqrt2 for i < j.
void reinject(const Mat& x, const Mat& g, Mat& out);

/// y = m x
void matvec(const Mat& m, const Vec& x, Vec& y);
/// y = m^T x
void matvec_t(const Mat& m, const Vec& x, Vec& y);

/// x <- phi(x) entrywise.
void apply_denoiser(const Denoiser& d, Mat& x);

/// out = 1{m >= 1} - alpha
void centered_indicator(const Mat& m, double alpha, Mat& out);

/// sum_{u<v} 1{a[u,v] >= 1} 1{b[pi(u), pi(v)] >= 1}
std::int64_t agreement_score(const Mat& a, const Mat& b, const Permutation& pi);

namespace serial {
void fill_symmetric_gaussian(Mat& a, std::uint64_t seed);
void fill_correlated_pair(Mat& a, Mat& b, const Permutation& pi, double rho, std::uint64_t seed);
void reinject(const Mat& x, const Mat& g, Mat& out);
void matvec(const Mat& m, const Vec& x, Vec& y);
void matvec_t(const Mat& m, const Vec& x, Vec& y);
void apply_denoiser(const Denoiser& d, Mat& x);
void centered_indicator(const Mat& m, double alpha, Mat& out);
std::int64_t agreement_score(const Mat& a, const Mat& b, const Permutation& pi);
}  // namespace serial

}  // namespace kernels

/// Worker count used by the OpenMP kernels (RGM_WORKERS or the OpenMP default).
int worker_count();
void set_worker_count(int n);

}  // namespace rgm
