#include <map>

#include <benchmark/benchmark.h>

#include "rgm/kernels.hpp"

namespace {

using rgm::Index;
using rgm::Mat;
using rgm::Vec;

const rgm::Permutation& perm(Index n) {
  static std::map<Index, rgm::Permutation> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    rgm::Rng rng(7);
    it = cache.emplace(n, rgm::Permutation::uniform(n, rng)).first;
  }
  return it->second;
}

template <bool Serial>
void BM_FillPair(benchmark::State& st) {
  const Index n = st.range(0);
  Mat a(n, n), b(n, n);
  for (auto _ : st) {
    if constexpr (Serial) rgm::kernels::serial::fill_correlated_pair(a, b, perm(n), 0.8, 1);
    else rgm::kernels::fill_correlated_pair(a, b, perm(n), 0.8, 1);
    benchmark::DoNotOptimize(a.data());
  }
  st.SetItemsProcessed(st.iterations() * n * (n - 1) / 2);
}

template <bool Serial>
void BM_Matvec(benchmark::State& st) {
  const Index n = st.range(0);
  Mat a(n, n);
  rgm::kernels::fill_symmetric_gaussian(a, 3);
  Vec x = Vec::Ones(n), y;
  for (auto _ : st) {
    if constexpr (Serial) rgm::kernels::serial::matvec(a, x, y);
    else rgm::kernels::matvec(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetBytesProcessed(st.iterations() * n * n * static_cast<int64_t>(sizeof(double)));
}

template <bool Serial>
void BM_MatvecT(benchmark::State& st) {
  const Index n = st.range(0);
  Mat a(n, n);
  rgm::kernels::fill_symmetric_gaussian(a, 3);
  Vec x = Vec::Ones(n), y;
  for (auto _ : st) {
    if constexpr (Serial) rgm::kernels::serial::matvec_t(a, x, y);
    else rgm::kernels::matvec_t(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetBytesProcessed(st.iterations() * n * n * static_cast<int64_t>(sizeof(double)));
}

template <bool Serial>
void BM_Denoiser(benchmark::State& st) {
  const Index n = st.range(0);
  const rgm::Denoiser d = rgm::make_denoiser(1.0);
  Mat x(n, 96);
  x.setRandom();
  for (auto _ : st) {
    Mat y = x;
    if constexpr (Serial) rgm::kernels::serial::apply_denoiser(d, y);
    else rgm::kernels::apply_denoiser(d, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Serial>
void BM_Agreement(benchmark::State& st) {
  const Index n = st.range(0);
  Mat a(n, n), b(n, n);
  rgm::kernels::fill_correlated_pair(a, b, perm(n), 0.8, 5);
  for (auto _ : st) {
    std::int64_t s = Serial ? rgm::kernels::serial::agreement_score(a, b, perm(n))
                            : rgm::kernels::agreement_score(a, b, perm(n));
    benchmark::DoNotOptimize(s);
  }
}

}  // namespace

BENCHMARK(BM_FillPair<true>)->Name("fill_pair/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_FillPair<false>)->Name("fill_pair/omp")->Arg(500)->Arg(2000);
BENCHMARK(BM_Matvec<true>)->Name("matvec/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_Matvec<false>)->Name("matvec/omp")->Arg(500)->Arg(2000);
BENCHMARK(BM_MatvecT<true>)->Name("matvec_t/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_MatvecT<false>)->Name("matvec_t/omp")->Arg(500)->Arg(2000);
BENCHMARK(BM_Denoiser<true>)->Name("denoiser/serial")->Arg(2000);
BENCHMARK(BM_Denoiser<false>)->Name("denoiser/omp")->Arg(2000);
BENCHMARK(BM_Agreement<true>)->Name("agreement/serial")->Arg(1000);
BENCHMARK(BM_Agreement<false>)->Name("agreement/omp")->Arg(1000);

BENCHMARK_MAIN();
