// One-dimensional singularly perturbed solves and the epsilon sweep that
// checks spike concentration against the landscape prediction.
//
// System on (-L, L) with zero Dirichlet data:
//   -eps^2 u'' + u = K(x) v^q,   -eps^2 v'' + v = Q(x) u^p.
//
// The primary path is damped Newton from a width-eps profile; when the
// line search collapses (near-singular translational mode on far-off
// initial data) a normalized resolvent relaxation walks the iterate into
// the right basin and Newton finishes from there.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spikeloc/landscape.hpp"
#include "spikeloc/model.hpp"

namespace spikeloc {

struct Mesh1D {
  double L;
  int M;  // node count, odd
  double h;
  std::vector<double> x;  // -L .. L
  std::vector<double> w;  // Simpson weights including h
};

// Spacing eps / mesh_factor, rounded to an odd node count.
Mesh1D make_mesh(double L, double eps, double mesh_factor);

struct PerturbedRun {
  double eps;
  Mesh1D mesh;
  std::vector<double> u, v;
  double peak_x;        // interpolated location of the maximum of u
  double peak_height;   // interpolated maximum of u
  double energy;        // eps^{-1} times the free energy of the pair
  double ps_residual;   // balance integral of the coefficient gradients
  double ps_scale;      // natural magnitude of that integral's pieces
  double residual;      // final Newton max-norm residual
  int newton_iters;
  int relax_sweeps;     // 0 when plain Newton was enough
};

struct PerturbOptions {
  double L = 8.0;
  double mesh_factor = 20.0;
  SolverOptions newton{};
  int relax_budget = 1000;  // total relaxation sweeps before giving up
};

// Solve at one eps. The initial guess is a width-eps canonical profile
// centered at x0, or the previous run's solution rescaled about its own
// peak when warm is given.
PerturbedRun solve_perturbed(const Landscape& ls, double eps, double x0,
                             const PerturbOptions& opts, const PerturbedRun* warm = nullptr);

// Literal quadrature of -K' v^{q+1}/(q+1) - Q' u^{p+1}/(p+1) over the mesh,
// and its natural scale; near-zero ratio is the concentration balance check.
std::pair<double, double> pucci_serrin_residual(const Mesh1D& mesh, std::span<const double> u,
                                                std::span<const double> v,
                                                const PotentialTriple& pot, double p, double q,
                                                double eps);

struct SweepVerdict {
  double target_x;       // predicted concentration point
  double sigma_ref;      // landscape level at the target
  double final_peak_dist;
  double final_gap;      // relative energy gap at the smallest eps
  bool peak_ok;
  bool gap_ok;
  bool peaks_monotone;
  bool gaps_monotone;
  bool pass() const { return peak_ok && gap_ok && peaks_monotone && gaps_monotone; }
};

struct SweepResult {
  std::vector<PerturbedRun> runs;
  SweepVerdict verdict;
  Candidate target;
  bool landscape_degenerate;  // flat landscape: peak pinned by the data, trend checks skipped
};

struct SweepOptions {
  PerturbOptions solve{};
  double peak_tol = 0.05;
  double gap_tol = 0.01;
  double jitter = 0.10;  // admitted non-monotonicity factor on trends
  int multistarts = 32;
  std::uint64_t seed = 12345;
};

// Descending ladder of eps values, each solve warm-started from the last.
// The verdict compares the final peak against the nearest spike candidate
// and the rescaled energies against the landscape level.
SweepResult epsilon_sweep(const Landscape& ls, std::span<const double> epsilons, double x0,
                          const SweepOptions& opts);

}  // namespace spikeloc
