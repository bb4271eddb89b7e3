// Radial ground states of the constant-coefficient system
//   (-Laplacian + V) u = K v^q,  (-Laplacian + V) v = Q u^p
// by damped Newton with exponent continuation, plus the closed-form
// amplitude/width rescaling between coefficient triples.
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "spikeloc/model.hpp"
#include "spikeloc/radial.hpp"

namespace spikeloc {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 80;
  double armijo = 1e-4;
  double min_step = 9.5367431640625e-7;  // 2^-20
  int steps_per_unit = 10;               // continuation density in exponent space
  double min_dt = 3.125e-3;              // smallest admitted continuation step
};

struct GroundState {
  int n;
  double p, q;
  double coefK, coefQ, coefV;  // frozen coefficients of this branch
  std::vector<double> u, v;
  double gamma;     // direct energy of the pair on the grid
  double theta;     // fitted exponential decay rate of u + v
  double u0, v0;    // center values
  double residual;  // final max-norm Newton residual
  int iters;        // Newton iterations, cumulative over continuation
  bool tail_ok;     // tail below 1e-6 of the peak
  bool monotone;    // radially nonincreasing profiles
};

// Positive decaying solution of (-Laplacian + 1) w = w^p from a sech-profile
// initial guess.
std::vector<double> scalar_ground_state(const RadialGrid& g, double p,
                                        const SolverOptions& opts = {});

// K = Q = V = 1 branch for the given exponents; seeds at the symmetric pair
// (s, s), s = min(p, q), and continues along a straight segment in exponent
// space, halving the step on failure.
GroundState solve_canonical(const RadialGrid& g, const ProblemParams& params,
                            const SolverOptions& opts = {});

// Ground state at frozen coefficients (K, Q, V), warm-started from the
// rescaled canonical branch.
GroundState solve_scaled(const RadialGrid& g, const ProblemParams& params, double K, double Q,
                         double V, const GroundState& canonical,
                         const SolverOptions& opts = {});

struct LocalScaling {
  double mu;  // width factor sqrt(V)
  double w1;  // amplitude factor of u
  double w2;  // amplitude factor of v
};

LocalScaling local_scaling(const ProblemParams& params, double K, double Q, double V);

// Maps the canonical pair onto the (K, Q, V) branch: amplitudes w1, w2 and
// argument dilation by mu, resampled on the same grid (zero beyond R).
// Exact (no resampling) when V = 1.
std::pair<std::vector<double>, std::vector<double>> rescale_to_local(
    const RadialGrid& g, const GroundState& canonical, const ProblemParams& params, double K,
    double Q, double V);

// Least-squares slope of -log(u+v) over [r_lo, r_hi], with the radial
// amplitude factor r^{-(n-1)/2} divided out first.
double estimate_decay_rate(const RadialGrid& g, std::span<const double> u,
                           std::span<const double> v, double r_lo, double r_hi);

}  // namespace spikeloc
