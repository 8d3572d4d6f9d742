#pragma once

#include <cstdint>

#include "rgm/kernels.hpp"

namespace rgm {

struct PowerOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  /// Dense SVD when n <= dense_cutoff (unless force_power).
  Index dense_cutoff = 200;
  bool force_power = false;
  /// When > 0, stop as soon as the randomized bound certifies sigma_1 < stop_below.
  double stop_below = 0.0;
  /// Failure probability of the randomized upper bound.
  double delta = 1e-6;
};

struct SingularPair {
  double sigma = 0.0;
  Vec u;  ///< left: m v = sigma u
  Vec v;  ///< right
  int iterations = 0;
  bool converged = false;
  bool dense = false;
  /// sigma_1 <= upper with probability >= 1 - delta (exact for the dense path).
  double upper = 0.0;
  bool certified_below = false;
};

/// Leading singular triple by power iteration on m^T m.
///
/// For a unit start x0 uniform on the sphere, |<x0, v1>| >= t except with
/// probability about t sqrt(2n/pi), and ||(m^T m)^k x0|| >= sigma_1^{2k} |<x0, v1>|.
/// With t = delta sqrt(pi/2) / sqrt(n) this gives the bound
///   sigma_1 <= (||(m^T m)^k x0|| / t)^{1/(2k)}
/// which tightens as k grows and lets callers stop without a spectral gap.
SingularPair leading_singular(const Mat& m, std::uint64_t seed, const PowerOptions& opts = {});

/// Largest singular value by dense SVD.
double dense_op_norm(const Mat& m);

}  // namespace rgm
