#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "rgm/linalg.hpp"
#include "rgm/model.hpp"

namespace rgm {

struct Reinjected {
  Mat hat_a;  ///< not symmetric
  Mat hat_b;
  Mat g;      ///< symmetric N(0,1), zero diagonal
  Mat h;
};

/// hat_a[i,j] = (A'[i,j] + G[i,j])/sqrt2 for i > j and (A'[i,j] - G[i,j])/sqrt2
/// for i < j; same for B' with H. `zero_noise` forces G = H = 0 (test hook).
Reinjected reinject_noise(const ObservedPair& obs, std::uint64_t seed, bool zero_noise = false);

struct CleanStep {
  int iter = 0;
  double sigma = 0.0;
  Index removed = -1;
  int solver_iterations = 0;
};

struct CleanResult {
  Mat cleaned;
  std::vector<Index> zeroed;  ///< removal order
  std::vector<CleanStep> trace;
  /// Norm bound that ended the loop (exact for the dense path).
  double final_sigma = 0.0;
  double final_upper = 0.0;
};

/// While ||m||op >= threshold_mult sqrt(n): sample i with probability
/// (v_i^2 + u_i^2)/2 from the leading singular pair and zero row/column i.
CleanResult spectral_clean(Mat m, double threshold_mult, std::uint64_t seed, const PowerOptions& popts = {});

struct CleanedPair {
  Mat a_clean;
  Mat b_clean;
  std::vector<Index> s;
  std::vector<Index> t;
  Mat g_noise;
  Mat h_noise;
  int iters_a = 0;
  int iters_b = 0;
  std::vector<CleanStep> trace_a;
  std::vector<CleanStep> trace_b;
};

struct CleanOptions {
  double threshold_mult = 10.0;
  bool zero_noise = false;
  PowerOptions power;
};

CleanedPair clean_pair(const ObservedPair& obs, std::uint64_t seed, const CleanOptions& opts = {});

/// One JSON object per line: {"matrix": label, "iter", "sigma", "removed", "solver_iterations"}.
void write_clean_trace(std::ostream& os, std::string_view label, const std::vector<CleanStep>& trace);

}  // namespace rgm
