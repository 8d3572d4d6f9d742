#pragma once

#include <vector>

#include "rgm/amp.hpp"
#include "rgm/permutation.hpp"

namespace rgm {

struct AssignmentProblem {
  Mat score;  ///< score[i,j] = <h_i, l_j>
  std::vector<Index> row_labels;
  std::vector<Index> col_labels;
};

AssignmentProblem build_scores(const AmpIterate& it, const AmpContext& ctx);

/// Exact maximum-weight perfect matching (Hungarian, O(m^3));
/// result[i] is the column matched to row i.
std::vector<Index> solve_lap(const Mat& score);
inline std::vector<Index> solve_lap(const AssignmentProblem& p) { return solve_lap(p.score); }

double assignment_value(const Mat& score, const std::vector<Index>& sigma);

/// pi(u_k) = v_k on the seeds, pi(row_labels[i]) = col_labels[sigma[i]] elsewhere.
Permutation assemble_pi(const SeedPair& seeds, const AssignmentProblem& p, const std::vector<Index>& sigma);

}  // namespace rgm
