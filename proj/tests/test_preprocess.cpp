#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "rgm/errors.hpp"
#include "rgm/linalg.hpp"
#include "rgm/preprocess.hpp"

using namespace rgm;

namespace {

Mat goe(Index n, std::uint64_t seed) {
  Mat m(n, n);
  kernels::fill_symmetric_gaussian(m, seed);
  return m;
}

bool rows_cols_zero(const Mat& m, const std::vector<Index>& idx) {
  for (Index i : idx)
    if (!m.row(i).isZero(0.0) || !m.col(i).isZero(0.0)) return false;
  return true;
}

}  // namespace

TEST_CASE("reinjection with forced zero noise halves nothing but scales by 1/sqrt2") {
  const CorrelatedInstance inst = generate(30, 0.6, PiMode::uniform, 3);
  const ObservedPair obs{inst.a, inst.b};
  const Reinjected r = reinject_noise(obs, 5, true);
  CHECK(r.g.isZero(0.0));
  CHECK(r.h.isZero(0.0));
  CHECK((r.hat_a - inst.a / std::sqrt(2.0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((r.hat_b - inst.b / std::sqrt(2.0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reinjection formula, noise symmetry and asymmetry of the output") {
  const CorrelatedInstance inst = generate(40, 0.6, PiMode::uniform, 3);
  const ObservedPair obs{inst.a, inst.b};
  const Reinjected r = reinject_noise(obs, 5);
  CHECK(r.g == r.g.transpose());
  CHECK(r.g.diagonal().isZero(0.0));
  CHECK(r.h == r.h.transpose());
  CHECK(r.g != r.h);
  CHECK(r.hat_a.diagonal().isZero(0.0));
  CHECK(r.hat_a != r.hat_a.transpose());
  for (Index i = 0; i < 40; ++i)
    for (Index j = 0; j < 40; ++j) {
      if (i == j) continue;
      const double s = i > j ? 1.0 : -1.0;
      CHECK(r.hat_a(i, j) == doctest::Approx((inst.a(i, j) + s * r.g(i, j)) / std::sqrt(2.0)).epsilon(1e-14));
      CHECK(r.hat_b(i, j) == doctest::Approx((inst.b(i, j) + s * r.h(i, j)) / std::sqrt(2.0)).epsilon(1e-14));
    }
  const Reinjected again = reinject_noise(obs, 5);
  CHECK(again.hat_a == r.hat_a);
  CHECK_THROWS_AS(reinject_noise(ObservedPair{Mat::Zero(3, 3), Mat::Zero(4, 4)}, 1), ParameterError);
}

TEST_CASE("reinjection moments at n = 2000") {
  const Index n = 2000;
  const CorrelatedInstance inst = generate(n, 0.8, PiMode::uniform, 11);
  const Reinjected r = reinject_noise(ObservedPair{inst.a, inst.b}, 12);
  double sa = 0, saa = 0, sb = 0, sab = 0, cnt = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double x = r.hat_a(i, j), y = r.hat_b(inst.pi_star(i), inst.pi_star(j));
      sa += x;
      saa += x * x;
      sb += y;
      sab += x * y;
      cnt += 1;
    }
  const double ma = sa / cnt, mb = sb / cnt;
  CHECK(std::abs(saa / cnt - ma * ma - 1.0) <= 0.05);
  CHECK(std::abs(sab / cnt - ma * mb - 0.4) <= 0.05);
}

TEST_CASE("leading singular value agrees with dense SVD") {
  for (Index n : {Index{20}, Index{60}, Index{100}}) {
    CAPTURE(n);
    Mat m = goe(n, static_cast<std::uint64_t>(n));
    // Add a gap so power iteration converges to 1e-10.
    Vec v = Vec::Ones(n).normalized();
    m += 8.0 * std::sqrt(static_cast<double>(n)) * v * v.transpose();
    PowerOptions po;
    po.force_power = true;
    const SingularPair sp = leading_singular(m, 7, po);
    const double ref = oracle::op_norm(m);
    CHECK(sp.converged);
    CHECK(!sp.dense);
    CHECK(std::abs(sp.sigma - ref) <= 1e-8 * ref);
    CHECK(sp.upper >= ref * (1 - 1e-12));
    CHECK((m * sp.v - sp.sigma * sp.u).norm() <= 1e-4 * sp.sigma);
    const SingularPair dn = leading_singular(m, 7);
    CHECK(dn.dense);
    CHECK(std::abs(dn.sigma - ref) <= 1e-10 * ref);
    CHECK(dense_op_norm(m) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("randomized bound certifies small norms without a gap") {
  const Index n = 400;
  const Mat m = goe(n, 3);
  PowerOptions po;
  po.stop_below = 10.0 * std::sqrt(static_cast<double>(n));
  const SingularPair sp = leading_singular(m, 4, po);
  CHECK(sp.certified_below);
  CHECK(sp.upper < po.stop_below);
  CHECK(oracle::op_norm_gram(m) <= sp.upper);
}

TEST_CASE("spectral_clean leaves small matrices untouched") {
  const Index n = 50;
  Vec v = Vec::Random(n).normalized();
  const Mat m = 5.0 * std::sqrt(static_cast<double>(n)) * v * v.transpose();
  const CleanResult r = spectral_clean(m, 10.0, 1);
  CHECK(r.zeroed.empty());
  CHECK(r.cleaned == m);

  const Mat big = goe(300, 9);
  const CleanResult rb = spectral_clean(big, 10.0, 1);
  CHECK(rb.zeroed.empty());
  CHECK(rb.cleaned == big);
}

TEST_CASE("spectral_clean on the 2 x 2 example") {
  const double c = 20.0 * std::sqrt(2.0);
  Mat m(2, 2);
  m << 0, c, c, 0;
  const CleanResult r = spectral_clean(m, 10.0, 3);
  CHECK(r.zeroed.size() == 1);
  CHECK(r.cleaned.isZero(0.0));
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].sigma == doctest::Approx(c));
}

TEST_CASE("spectral_clean postconditions and error paths") {
  const Index n = 250;
  const CorrelatedInstance inst = generate(n, 0.5, PiMode::uniform, 21);
  auto [obs, plan] = corrupt(inst, 0.04, Strategy::planted_clique_weight, 22, {25.0, 0.0});
  const CleanResult r = spectral_clean(obs.a_prime, 10.0, 23);
  CHECK(!r.zeroed.empty());
  CHECK(rows_cols_zero(r.cleaned, r.zeroed));
  CHECK(oracle::op_norm_gram(r.cleaned) < 10.0 * std::sqrt(static_cast<double>(n)));
  CHECK(r.trace.size() == r.zeroed.size());

  PowerOptions starve;
  starve.force_power = true;
  starve.max_iter = 2;
  starve.delta = 1e-300;
  Mat g = goe(n, 5);
  g *= 4.0;
  CHECK_THROWS_AS(spectral_clean(g, 10.0, 1, starve), NumericalError);
  CHECK_THROWS_AS(spectral_clean(Mat::Zero(3, 4), 10.0, 1), ParameterError);
}

TEST_CASE("cleaning a rank-one spike stays within 4 eps n removals") {
  const Index n = 500;
  const double lam = 30.0 * std::sqrt(static_cast<double>(n));
  int ok = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const CorrelatedInstance inst = generate(n, 0.5, PiMode::identity, 100 + static_cast<std::uint64_t>(t));
    CorruptionOptions co;
    co.spike_lambda = lam;
    auto [obs, plan] = corrupt(inst, 0.02, Strategy::rank1_spike, 200 + static_cast<std::uint64_t>(t), co);
    REQUIRE(plan.q.size() == 10);
    const CleanResult r = spectral_clean(obs.a_prime, 10.0, 300 + static_cast<std::uint64_t>(t));
    if (r.zeroed.size() <= 40) ++ok;
    CHECK(rows_cols_zero(r.cleaned, r.zeroed));
    CHECK(r.final_sigma < 10.0 * std::sqrt(static_cast<double>(n)));
    CHECK(oracle::op_norm_gram(r.cleaned) < 10.0 * std::sqrt(static_cast<double>(n)));
  }
  CHECK(ok >= 48);
}

TEST_CASE("clean_pair on uncorrupted pairs rarely removes anything") {
  const Index n = 500;
  int empty = 0;
  double mean_removed = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const CorrelatedInstance inst = generate(n, 0.8, PiMode::uniform, 500 + static_cast<std::uint64_t>(t));
    const CleanedPair cp = clean_pair(ObservedPair{inst.a, inst.b}, 900 + static_cast<std::uint64_t>(t));
    if (cp.s.empty() && cp.t.empty()) ++empty;
    mean_removed += static_cast<double>(cp.s.size());
    CHECK(cp.iters_a == static_cast<int>(cp.s.size()));
  }
  CHECK(empty >= 48);
  CHECK(mean_removed / trials <= 1.0);
}

TEST_CASE("clean_pair invariants under corruption") {
  const Index n = 300;
  const double bound = 10.0 * std::sqrt(static_cast<double>(n));
  for (Strategy s : {Strategy::zero_out, Strategy::rank1_spike, Strategy::planted_clique_weight}) {
    CAPTURE(strategy_name(s));
    const CorrelatedInstance inst = generate(n, 0.8, PiMode::uniform, 31);
    CorruptionOptions co;
    co.clique_weight = 12.0;
    auto [obs, plan] = corrupt(inst, 0.05, s, 32, co);
    const CleanedPair cp = clean_pair(obs, 33);
    CHECK(oracle::op_norm_gram(cp.a_clean) <= bound);
    CHECK(oracle::op_norm_gram(cp.b_clean) <= bound);
    CHECK(rows_cols_zero(cp.a_clean, cp.s));
    CHECK(rows_cols_zero(cp.b_clean, cp.t));
    if (s == Strategy::rank1_spike) CHECK(!cp.s.empty());
  }
}

TEST_CASE("cleaning trace is JSON lines") {
  std::vector<CleanStep> tr{{0, 12.5, 3, 40}, {1, 9.0, 7, 12}};
  std::ostringstream os;
  write_clean_trace(os, "A", tr);
  std::istringstream is(os.str());
  std::string line;
  int k = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["matrix"] == "A");
    CHECK(j["iter"] == k);
    CHECK(j["removed"] == tr[static_cast<std::size_t>(k)].removed);
    CHECK(j.contains("sigma"));
    CHECK(j.contains("solver_iterations"));
    ++k;
  }
  CHECK(k == 2);
}
