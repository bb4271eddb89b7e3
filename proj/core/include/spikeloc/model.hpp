// Problem data: exponent pair, dimension, subcriticality margin, and the
// coefficient triple (K, Q, V) as expressions over the slow variable.
#pragma once

#include <array>

#include "spikeloc/expr.hpp"

namespace spikeloc {

using Vec3 = std::array<double, 3>;

struct ProblemParams {
  int n;       // ambient dimension, 1..3
  double p, q; // superlinear exponents, > 1
  // 1/(p+1) + 1/(q+1) - (n-2)/n; strictly positive for admitted pairs
  double margin;
};

// Rejects n outside 1..3 (BadDimension), p or q <= 1 (ExponentTooSmall),
// and pairs on or past the critical hyperbola (SupercriticalPair; equality
// is rejected).
ProblemParams validate_params(int n, double p, double q);

struct Box {
  int dim = 1;
  Vec3 lo{-5.0, -5.0, -5.0};
  Vec3 hi{5.0, 5.0, 5.0};
};

struct PotentialTriple {
  Expr K, Q, V;
  int dim = 1;

  static PotentialTriple parse(std::string_view k, std::string_view q, std::string_view v,
                               int dim);
};

struct BoundsReport {
  double kmin, kmax;
  double qmin, qmax;
  double vmin, vmax;
  // max over samples of |grad F| / exp(|z|), the admissible-growth gauge
  double growth_coeff;
  bool any_nonsmooth;
};

// Samples the box on a uniform lattice and verifies strict positivity of
// all three coefficients; throws NonpositivePotential naming the offender
// and the sample point. samples_per_axis >= 2.
BoundsReport check_potential_bounds(const PotentialTriple& pot, const Box& box,
                                    int samples_per_axis);

}  // namespace spikeloc
