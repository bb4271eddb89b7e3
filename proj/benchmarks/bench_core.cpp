#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "spikeloc/dualenergy.hpp"
#include "spikeloc/expr.hpp"
#include "spikeloc/groundstate.hpp"
#include "spikeloc/landscape.hpp"
#include "spikeloc/perturb.hpp"

using namespace spikeloc;

namespace {

const RadialGrid& grid() {
  static const RadialGrid g = make_radial_grid(1, 4001, 20.0);
  return g;
}

const GroundState& canonical() {
  static const GroundState gs = solve_canonical(grid(), validate_params(1, 3.0, 3.0));
  return gs;
}

void BM_HelmholtzSolve(benchmark::State& state) {
  HelmholtzOp op(grid(), 1.0);
  std::vector<double> rhs(grid().r.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    double s = 1.0 / std::cosh(grid().r[i]);
    rhs[i] = 2.0 * s * s * s;
  }
  for (auto _ : state) benchmark::DoNotOptimize(op.solve(rhs));
}
BENCHMARK(BM_HelmholtzSolve);

void BM_RadialQuadrature(benchmark::State& state) {
  std::vector<double> f(grid().r.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-grid().r[i]);
  for (auto _ : state) benchmark::DoNotOptimize(quad_radial(grid(), f));
}
BENCHMARK(BM_RadialQuadrature);

void BM_ExprGradField(benchmark::State& state) {
  Expr e = Expr::parse("1 + 0.4*exp(-(x1-2)^2) + 0.6*exp(-(x1+2)^2)", 1);
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Vec3 z{-4.0 + 8.0 * i / 999.0, 0.0, 0.0};
      acc += e.grad(z).g[0];
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ExprGradField);

void BM_CanonicalSolve(benchmark::State& state) {
  RadialGrid g = make_radial_grid(1, 2001, 20.0);
  ProblemParams params = validate_params(1, 3.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_canonical(g, params).gamma);
}
BENCHMARK(BM_CanonicalSolve);

void BM_FiberRoot(benchmark::State& state) {
  DualPair eta = dual_transform(canonical().u, canonical().v, 1.0, 1.0, 3.0, 3.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(nehari_time(grid(), eta, 1.0, 1.0, 3.0, 3.0));
}
BENCHMARK(BM_FiberRoot);

void BM_PerturbedSolve(benchmark::State& state) {
  static const Landscape ls(validate_params(1, 3.0, 3.0),
                            PotentialTriple::parse("1 + 0.5*exp(-x1^2)", "1", "1", 1), grid(),
                            SolverOptions{});
  PerturbOptions opts;
  opts.mesh_factor = 10.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_perturbed(ls, 0.4, 0.3, opts).peak_x);
}
BENCHMARK(BM_PerturbedSolve);

}  // namespace

BENCHMARK_MAIN();
