#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "miqp/cuts.hpp"
#include "miqp/decompose.hpp"
#include "miqp/instance.hpp"
#include "miqp/oa.hpp"

namespace {

using namespace miqp;

struct Setup {
  MiqpInstance inst;
  Decomposition decomp;
  std::vector<Vector> points;
};

// Binary points with |S| = k whose subproblem is feasible.
const Setup& setup(int n, int k) {
  static std::map<std::pair<int, int>, Setup> cache;
  auto [it, fresh] = cache.try_emplace({n, k});
  if (!fresh) return it->second;
  Setup& s = it->second;
  s.inst = generate_portfolio({n, k, 1});
  s.decomp = decompose(s.inst.Q, s.inst.g, DiagonalStrategy::DominanceShift);
  std::mt19937_64 rng(7);
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  while (s.points.size() < 32) {
    std::shuffle(idx.begin(), idx.end(), rng);
    Vector x = Vector::Zero(n);
    for (int i = 0; i < k; ++i) x(idx[static_cast<std::size_t>(i)]) = 1.0;
    if (solve_subproblem(s.inst, s.decomp, x).feasible) s.points.push_back(x);
  }
  return s;
}

void BM_SolveSubproblem(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)), 6);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_subproblem(s.inst, s.decomp, s.points[i++ % s.points.size()]));
  }
}

void BM_CutPersp(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)), 6);
  std::size_t i = 0;
  for (auto _ : state) {
    const Vector& x = s.points[i++ % s.points.size()];
    benchmark::DoNotOptimize(cut_persp(s.inst, s.decomp, x));
  }
}

void BM_CutPerspRo(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)), 6);
  std::size_t i = 0;
  for (auto _ : state) {
    const Vector& x = s.points[i++ % s.points.size()];
    benchmark::DoNotOptimize(cut_persp_ro(s.inst, s.decomp, x));
  }
}

void BM_Solve(benchmark::State& state) {
  const MiqpInstance inst = generate_portfolio({static_cast<int>(state.range(0)), 4, 1});
  const Decomposition d = decompose(inst.Q, inst.g, DiagonalStrategy::DominanceShift);
  OaConfig config;
  config.cut_source = state.range(1) ? CutSource::PerspRo : CutSource::Persp;
  for (auto _ : state) benchmark::DoNotOptimize(solve(inst, d, config).objective);
}

}  // namespace

BENCHMARK(BM_SolveSubproblem)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CutPersp)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CutPerspRo)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Solve)->Args({12, 0})->Args({12, 1})->Args({20, 0})->Args({20, 1})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
