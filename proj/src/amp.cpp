#include "rgm/amp.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "rgm/errors.hpp"

namespace rgm {

namespace {

std::vector<Index> complement(Index n, const std::vector<Index>& seeds, const char* what) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Index s : seeds) {
    if (s < 0 || s >= n) throw ParameterError(std::string("seed index out of range in ") + what);
    if (used[static_cast<std::size_t>(s)]) throw ParameterError(std::string("repeated seed index in ") + what);
    used[static_cast<std::size_t>(s)] = 1;
  }
  std::vector<Index> rest;
  rest.reserve(static_cast<std::size_t>(n) - seeds.size());
  for (Index i = 0; i < n; ++i)
    if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
  return rest;
}

Mat gather(const Mat& x, const std::vector<Index>& rows) {
  const auto k = static_cast<Index>(rows.size());
  Mat out(k, k);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) out(i, j) = x(rows[i], rows[j]);
  return out;
}

Mat seed_columns(const Mat& x, const std::vector<Index>& rows, const std::vector<Index>& seeds, const Denoiser& d) {
  Mat out(static_cast<Index>(rows.size()), static_cast<Index>(seeds.size()));
  for (Index k = 0; k < out.cols(); ++k)
    for (Index i = 0; i < out.rows(); ++i) out(i, k) = x(rows[i], seeds[k]);
  kernels::apply_denoiser(d, out);
  return out;
}

void check_finite(const Mat& m, const char* name, int t) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "amp: non-finite entries in " << name << " at round " << t;
    throw NumericalError(os.str());
  }
}

double sup_gap(const Mat& x, const Mat& target) { return (x - target).cwiseAbs().maxCoeff(); }

}  // namespace

AmpContext make_context(const CleanedPair& cp, const SeedPair& seeds, const Denoiser& d) {
  const Index n = cp.a_clean.rows();
  if (seeds.u.size() != seeds.v.size() || seeds.u.empty()) {
    throw ParameterError("seed tuples must be non-empty and of equal length");
  }
  AmpContext ctx;
  ctx.n = n;
  ctx.rows_f = complement(n, seeds.u, "U");
  ctx.rows_g = complement(n, seeds.v, "V");
  ctx.a_sub = gather(cp.a_clean, ctx.rows_f);
  ctx.b_sub = gather(cp.b_clean, ctx.rows_g);
  ctx.f0 = seed_columns(cp.a_clean, ctx.rows_f, seeds.u, d);
  ctx.g0 = seed_columns(cp.b_clean, ctx.rows_g, seeds.v, d);
  return ctx;
}

AmpIterate init_iterate(const AmpContext& ctx) {
  AmpIterate it;
  it.f = ctx.f0;
  it.g = ctx.g0;
  it.t = 0;
  return it;
}

void amp_linear_step(AmpIterate& it, const AmpContext& ctx, const Mat& xi) {
  if (it.f.cols() != xi.rows() || it.g.cols() != xi.rows()) throw ParameterError("amp: Xi does not match K_t");
  const double s = 1.0 / std::sqrt(static_cast<double>(ctx.n));
  it.h.noalias() = s * (ctx.a_sub * (it.f * xi));
  it.l.noalias() = s * (ctx.b_sub * (it.g * xi));
  check_finite(it.h, "h", it.t);
  check_finite(it.l, "l", it.t);
}

AmpIterate amp_round(const AmpIterate& it, const AmpContext& ctx, const Mat& xi, const Mat& beta, const Denoiser& d) {
  AmpIterate cur = it;
  amp_linear_step(cur, ctx, xi);
  if (beta.rows() != xi.cols()) throw ParameterError("amp: beta does not match Xi");
  AmpIterate next;
  next.t = it.t + 1;
  next.f.noalias() = cur.h * beta;
  next.g.noalias() = cur.l * beta;
  kernels::apply_denoiser(d, next.f);
  kernels::apply_denoiser(d, next.g);
  check_finite(next.f, "f", next.t);
  check_finite(next.g, "g", next.t);
  next.h = std::move(cur.h);
  next.l = std::move(cur.l);
  return next;
}

std::vector<Index> align_rows(const AmpContext& ctx, const Permutation& pi) {
  if (pi.size() != ctx.n) throw ParameterError("align_rows: permutation size mismatch");
  std::vector<Index> g_row(static_cast<std::size_t>(ctx.n), -1);
  for (std::size_t r = 0; r < ctx.rows_g.size(); ++r) g_row[static_cast<std::size_t>(ctx.rows_g[r])] = static_cast<Index>(r);
  std::vector<Index> align(ctx.rows_f.size());
  for (std::size_t i = 0; i < ctx.rows_f.size(); ++i) align[i] = g_row[static_cast<std::size_t>(pi(ctx.rows_f[i]))];
  return align;
}

Concentration concentration(const AmpIterate& it, const RoundMatrices& rm, Index n, const std::vector<Index>& align) {
  Concentration c;
  c.t = it.t;
  const double inv = 1.0 / static_cast<double>(n);
  c.ff_gap = sup_gap(inv * (it.f.transpose() * it.f), rm.phi);
  c.gg_gap = sup_gap(inv * (it.g.transpose() * it.g), rm.phi);
  if (align.empty()) {
    c.fg_gap = sup_gap(inv * (it.f.transpose() * it.g), rm.psi);
  } else {
    if (static_cast<Index>(align.size()) != it.f.rows()) throw ParameterError("concentration: alignment size mismatch");
    Mat fg = Mat::Zero(it.f.cols(), it.g.cols());
    for (Index i = 0; i < it.f.rows(); ++i) {
      const Index j = align[static_cast<std::size_t>(i)];
      if (j >= 0) fg.noalias() += it.f.row(i).transpose() * it.g.row(j);
    }
    c.fg_gap = sup_gap(inv * fg, rm.psi);
  }
  c.mean_gap = std::max((inv * it.f.colwise().sum()).cwiseAbs().maxCoeff(),
                        (inv * it.g.colwise().sum()).cwiseAbs().maxCoeff());
  c.f_sup = std::max(it.f.cwiseAbs().maxCoeff(), it.g.cwiseAbs().maxCoeff());
  return c;
}

AmpRun run_amp(const AmpContext& ctx, const SpectralPlan& plan, const Denoiser& d, bool telemetry,
               const std::vector<Index>& align) {
  AmpRun run;
  AmpIterate it = init_iterate(ctx);
  const int last = plan.last_round();
  for (int t = 0; t <= last; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    if (telemetry) run.telemetry.push_back(concentration(it, plan.rounds[static_cast<std::size_t>(t)], ctx.n, align));
    if (t < last) {
      it = amp_round(it, ctx, plan.xi[static_cast<std::size_t>(t)], plan.beta[static_cast<std::size_t>(t)], d);
    } else {
      amp_linear_step(it, ctx, plan.xi[static_cast<std::size_t>(t)]);
    }
    run.round_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  run.final = std::move(it);
  return run;
}

}  // namespace rgm
