// The ground-energy landscape over the slow variable: closed-form scaling
// of the canonical level, direct re-solves for validation, representation-
// formula gradients, spike candidate search, and one-dimensional Clarke
// subdifferential hulls for nonsmooth coefficients.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spikeloc/groundstate.hpp"
#include "spikeloc/model.hpp"

namespace spikeloc {

struct ScalingExponents {
  double thetaK;  // (p+1)/(pq-1)
  double thetaQ;  // (q+1)/(pq-1)
  double thetaV;  // (p+1)(q+1)/(pq-1) - n/2
};

ScalingExponents scaling_exponents(const ProblemParams& params);

struct SigmaGrad {
  Vec3 g{0.0, 0.0, 0.0};
  bool nonsmooth = false;
};

class Landscape {
 public:
  // Solves the canonical branch on construction.
  Landscape(ProblemParams params, PotentialTriple pot, RadialGrid grid,
            SolverOptions opts = {});

  const ProblemParams& params() const { return params_; }
  const PotentialTriple& potentials() const { return pot_; }
  const RadialGrid& grid() const { return grid_; }
  const GroundState& canonical() const { return canonical_; }
  double gamma() const { return canonical_.gamma; }
  ScalingExponents exponents() const { return exps_; }

  // Ground energy at z through the scaling identity.
  double sigma_at(const Vec3& z) const;

  // Gradient of the scaling identity by logarithmic differentiation of the
  // coefficient fields; flagged nonsmooth when a kink convention fired.
  SigmaGrad grad_sigma_at(const Vec3& z) const;

  // Independent constant-coefficient re-solve at z (validation path).
  double sigma_direct(const Vec3& z) const;

  // Representation-formula gradient: dual-norm integrals of the local
  // solution pair against the coefficient gradients.
  Vec3 grad_sigma_formula(const Vec3& z, std::span<const double> u,
                          std::span<const double> v) const;

  // Canonical pair rescaled to the coefficients frozen at z.
  std::pair<std::vector<double>, std::vector<double>> local_profile(const Vec3& z) const;

  // Coefficient values at z, positivity-checked.
  void coefficients_at(const Vec3& z, double& K, double& Q, double& V) const;

 private:
  ProblemParams params_;
  PotentialTriple pot_;
  RadialGrid grid_;
  SolverOptions opts_;
  ScalingExponents exps_;
  GroundState canonical_;
};

struct Candidate {
  enum class Kind { Minimum, Maximum, Saddle, Flat };
  Vec3 z{0.0, 0.0, 0.0};
  double sigma = 0.0;
  double grad_norm = 0.0;
  Kind kind = Kind::Flat;
};

struct CandidateSearch {
  std::vector<Candidate> candidates;
  bool degenerate = false;  // landscape flat over the whole box
};

// Multistart quasi-random descent on the stationarity system of the
// landscape; deduplicated, classified by the Hessian signature of log G
// where G is the spike locator (sigma = gamma / G).
CandidateSearch find_spike_candidates(const Landscape& ls, const Box& box, int multistarts,
                                      std::uint64_t seed);

struct ClarkeHull {
  double lo = 0.0;
  double hi = 0.0;
  bool contains_zero = false;
};

// Interval hull of difference quotients of sampled sigma values inside a
// window about z0; for smooth data it collapses to the derivative, at a
// kink it brackets both one-sided slopes.
ClarkeHull clarke_hull_1d(std::span<const double> z, std::span<const double> sigma, double z0,
                          double window);

struct ProfilePair {
  std::vector<double> u, v;
};

// One-sided generalized derivative brackets along direction w at a point
// with (possibly several) minimizing pairs at the same level. Each pair's
// energy must match the level to 1e-6 relative (EnergyMismatch otherwise).
// Returns (gamma_minus, gamma_plus).
std::pair<double, double> gamma_pm(const Landscape& ls, const Vec3& z, double level,
                                   std::span<const ProfilePair> solutions, const Vec3& w);

}  // namespace spikeloc
