#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikeloc/errors.hpp"
#include "spikeloc/perturb.hpp"
#include "testutil.hpp"

using namespace spikeloc;

namespace {

const Landscape& bump_landscape() {
  static const Landscape ls(validate_params(1, 3.0, 3.0),
                            PotentialTriple::parse("1 + 0.5*exp(-x1^2)", "1", "1", 1),
                            testutil::grid_1d(), SolverOptions{});
  return ls;
}

PerturbOptions fast_opts() {
  PerturbOptions opts;
  opts.mesh_factor = 8.0;
  return opts;
}

}  // namespace

TEST_SUITE("perturb") {

TEST_CASE("mesh covers the interval with simpson weights") {
  Mesh1D mesh = make_mesh(8.0, 0.4, 10.0);
  CHECK(mesh.M % 2 == 1);
  CHECK(mesh.x.front() == -8.0);
  CHECK(mesh.x.back() == 8.0);
  CHECK(std::fabs(mesh.h - 0.04) < 1e-12);
  double total = 0.0;
  for (double w : mesh.w) total += w;
  CHECK(std::fabs(total - 16.0) < 1e-10);  // integral of 1
  CHECK_THROWS_AS(make_mesh(8.0, 0.4, 2.0), ValidationError);
  CHECK_THROWS_AS(make_mesh(-1.0, 0.4, 10.0), ValidationError);
}

TEST_CASE("single solve concentrates at the bump") {
  PerturbedRun run = solve_perturbed(bump_landscape(), 0.4, 0.3, fast_opts());
  CHECK(std::fabs(run.peak_x) < 0.05);
  CHECK(run.peak_height > 1.0);
  CHECK(run.residual < 1e-6);
  CHECK(run.relax_sweeps == 0);  // plain Newton suffices from a near seed
  for (double x : run.u) CHECK(x >= 0.0);
  CHECK(run.u.front() == 0.0);
  CHECK(run.u.back() == 0.0);
}

TEST_CASE("energy approaches the landscape level from above") {
  const Landscape& ls = bump_landscape();
  double sigma0 = ls.sigma_at(Vec3{0.0, 0.0, 0.0});
  PerturbedRun a = solve_perturbed(ls, 0.4, 0.3, fast_opts());
  PerturbedRun b = solve_perturbed(ls, 0.2, 0.3, fast_opts(), &a);
  CHECK(a.energy > sigma0);
  CHECK(b.energy > sigma0);
  CHECK(std::fabs(b.energy - sigma0) < std::fabs(a.energy - sigma0));
}

TEST_CASE("balance residual vanishes on converged runs") {
  const Landscape& ls = bump_landscape();
  PerturbedRun run = solve_perturbed(ls, 0.3, 0.3, fast_opts());
  auto [acc, scale] = pucci_serrin_residual(run.mesh, run.u, run.v, ls.potentials(), 3.0, 3.0,
                                            0.3);
  CHECK(scale > 0.0);
  CHECK(std::fabs(acc) / scale < 1e-6);
  CHECK(std::fabs(run.ps_residual) / run.ps_scale < 1e-6);
}

TEST_CASE("warm start cuts the iteration count") {
  const Landscape& ls = bump_landscape();
  PerturbedRun a = solve_perturbed(ls, 0.4, 0.3, fast_opts());
  PerturbedRun b = solve_perturbed(ls, 0.3, 0.3, fast_opts(), &a);
  CHECK(b.newton_iters <= 6);
  CHECK(b.relax_sweeps == 0);
}

TEST_CASE("sweep verdict on the single bump") {
  const Landscape& ls = bump_landscape();
  std::vector<double> eps{0.4, 0.3, 0.2};
  SweepOptions opts;
  opts.solve.mesh_factor = 8.0;
  SweepResult res = epsilon_sweep(ls, eps, 0.3, opts);
  REQUIRE(res.runs.size() == 3);
  CHECK_FALSE(res.landscape_degenerate);
  CHECK(std::fabs(res.verdict.target_x) < 1e-6);
  CHECK(res.verdict.peak_ok);
  CHECK(res.verdict.gap_ok);
  CHECK(res.verdict.peaks_monotone);
  CHECK(res.verdict.gaps_monotone);
  CHECK(res.verdict.pass());
}

TEST_CASE("flat landscape pins the verdict to the start") {
  Landscape flat(validate_params(1, 3.0, 3.0), PotentialTriple::parse("1", "1", "1", 1),
                 testutil::grid_1d(), SolverOptions{});
  std::vector<double> eps{0.4, 0.3};
  SweepOptions opts;
  opts.solve.mesh_factor = 8.0;
  SweepResult res = epsilon_sweep(flat, eps, 0.5, opts);
  CHECK(res.landscape_degenerate);
  CHECK(res.verdict.target_x == 0.5);
}

TEST_CASE("sweep validates its ladder") {
  const Landscape& ls = bump_landscape();
  SweepOptions opts;
  std::vector<double> single{0.4};
  CHECK_THROWS_AS(epsilon_sweep(ls, single, 0.3, opts), ValidationError);
  std::vector<double> rising{0.3, 0.4};
  CHECK_THROWS_AS(epsilon_sweep(ls, rising, 0.3, opts), ValidationError);
  std::vector<double> repeated{0.4, 0.4};
  CHECK_THROWS_AS(epsilon_sweep(ls, repeated, 0.3, opts), ValidationError);
}

TEST_CASE("sweep requires a confining mass") {
  Landscape varying(validate_params(1, 3.0, 3.0),
                    PotentialTriple::parse("1", "1", "1 + 0.1*x1^2", 1), testutil::grid_1d(),
                    SolverOptions{});
  std::vector<double> eps{0.4, 0.3};
  SweepOptions opts;
  CHECK_THROWS_AS(epsilon_sweep(varying, eps, 0.3, opts), ValidationError);
}

TEST_CASE("two bumps select the basin of the start") {
  Landscape ls(validate_params(1, 3.0, 3.0),
               PotentialTriple::parse("1 + 0.4*exp(-(x1-2)^2) + 0.6*exp(-(x1+2)^2)", "1", "1", 1),
               testutil::grid_1d(), SolverOptions{});
  std::vector<double> eps{0.4, 0.3};
  SweepOptions opts;
  opts.solve.mesh_factor = 8.0;
  SweepResult right = epsilon_sweep(ls, eps, 1.5, opts);
  CHECK(std::fabs(right.verdict.target_x - 2.0) < 1e-3);
  CHECK(std::fabs(right.runs.back().peak_x - 2.0) < 0.01);
  SweepResult left = epsilon_sweep(ls, eps, -1.5, opts);
  CHECK(std::fabs(left.verdict.target_x + 2.0) < 1e-3);
  CHECK(std::fabs(left.runs.back().peak_x + 2.0) < 0.01);
}

}  // TEST_SUITE
