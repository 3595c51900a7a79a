#include <benchmark/benchmark.h>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"
#include "nehari/extremal.hpp"
#include "nehari/fibering.hpp"
#include "nehari/nehari_solver.hpp"

namespace {

nehari::Problem double_power(int cells, double lambda) {
  nehari::MeshSpec s;
  s.subdivisions = {cells};
  auto mesh = nehari::build_mesh(s);
  auto w = nehari::Weight::constant(mesh, 1.0);
  return nehari::Problem(std::move(mesh), nehari::NFunctionModel::double_power(2.0, 3.0), std::move(w), 1.5, 7.0,
                         lambda);
}

void BM_RayEvaluation(benchmark::State& state) {
  const auto prob = double_power(static_cast<int>(state.range(0)), 1.0);
  const auto ray = nehari::Ray::through(prob, nehari::bump_field(prob.mesh()));
  double t = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ray.rn(t));
    t = t < 2.0 ? t * 1.01 : 0.5;
  }
}
BENCHMARK(BM_RayEvaluation)->Arg(64)->Arg(1024);

void BM_FindTn(benchmark::State& state) {
  const auto prob = double_power(static_cast<int>(state.range(0)), 1.0);
  const auto u = nehari::bump_field(prob.mesh());
  for (auto _ : state) benchmark::DoNotOptimize(nehari::find_tn(prob, u));
}
BENCHMARK(BM_FindTn)->Arg(64)->Arg(1024);

void BM_LambdaN(benchmark::State& state) {
  const auto prob = double_power(static_cast<int>(state.range(0)), 1.0);
  const auto u = nehari::random_field(prob.mesh(), 7, true);
  for (auto _ : state) benchmark::DoNotOptimize(nehari::lambda_n_of(prob, u));
}
BENCHMARK(BM_LambdaN)->Arg(64)->Arg(1024);

void BM_SolvePlus(benchmark::State& state) {
  const auto prob = double_power(static_cast<int>(state.range(0)), 25.0);
  const auto init = nehari::bump_field(prob.mesh());
  for (auto _ : state) benchmark::DoNotOptimize(nehari::solve_plus(prob, init).J_value);
}
BENCHMARK(BM_SolvePlus)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
