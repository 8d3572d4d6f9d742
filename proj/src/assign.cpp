#include "rgm/assign.hpp"

#include <limits>

#include "rgm/errors.hpp"

namespace rgm {

AssignmentProblem build_scores(const AmpIterate& it, const AmpContext& ctx) {
  if (it.h.rows() != it.l.rows() || it.h.cols() != it.l.cols()) throw ParameterError("build_scores: h and l differ in shape");
  AssignmentProblem p;
  p.score.noalias() = it.h * it.l.transpose();
  p.row_labels = ctx.rows_f;
  p.col_labels = ctx.rows_g;
  return p;
}

std::vector<Index> solve_lap(const Mat& score) {
  const Index m = score.rows();
  if (score.cols() != m) throw ParameterError("solve_lap: score matrix must be square");
  if (!score.allFinite()) throw ParameterError("solve_lap: non-finite score");
  if (m == 0) return {};
  // Shortest augmenting paths with row/column potentials, minimizing -score.
  // Arrays are 1-based; column 0 is the virtual source.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0), v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<Index> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
  for (Index i = 1; i <= m; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> sigma(static_cast<std::size_t>(m));
  for (Index j = 1; j <= m; ++j) sigma[p[j] - 1] = j - 1;
  return sigma;
}

double assignment_value(const Mat& score, const std::vector<Index>& sigma) {
  double s = 0.0;
  for (Index i = 0; i < static_cast<Index>(sigma.size()); ++i) s += score(i, sigma[i]);
  return s;
}

Permutation assemble_pi(const SeedPair& seeds, const AssignmentProblem& p, const std::vector<Index>& sigma) {
  const Index n = static_cast<Index>(seeds.u.size() + p.row_labels.size());
  if (sigma.size() != p.row_labels.size() || p.col_labels.size() != p.row_labels.size() ||
      seeds.u.size() != seeds.v.size()) {
    throw NumericalError("assemble_pi: inconsistent sizes (internal index bug)");
  }
  std::vector<Index> map(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < seeds.u.size(); ++k) map[static_cast<std::size_t>(seeds.u[k])] = seeds.v[k];
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    map[static_cast<std::size_t>(p.row_labels[i])] = p.col_labels[static_cast<std::size_t>(sigma[i])];
  }
  if (!is_permutation(map)) throw NumericalError("assemble_pi: result is not a bijection (internal index bug)");
  return Permutation(std::move(map));
}

}  // namespace rgm
