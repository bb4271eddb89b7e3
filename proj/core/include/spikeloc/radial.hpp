// Radial finite differences on [0, R]: uniform grid, composite Simpson
// quadrature with the surface-measure weight, the radial Laplacian, and a
// prefactored tridiagonal solver for (-Laplacian + mass).
//
// Discretization: the origin row uses the regular limit of the radial
// operator (n f''(0)); interior rows are standard second-order central
// differences of f'' + (n-1)/r f'; the outer boundary eliminates a ghost
// node through the decay-matched Robin condition f'(R) + sqrt(mass) f(R) = 0.
#pragma once

#include <span>
#include <vector>

namespace spikeloc {

struct RadialGrid {
  int n;   // ambient dimension, 1..3
  int m;   // nodes, >= 9
  double R;
  double h;
  std::vector<double> r;   // nodes 0 .. R
  std::vector<double> qw;  // quadrature weights including sigma_{n-1} r^{n-1}
};

RadialGrid make_radial_grid(int n, int m, double R);

// Integral over R^n of a radial integrand sampled at the nodes.
double quad_radial(const RadialGrid& g, std::span<const double> f);

// True when the last percent of nodes all sit below rel_tol * max|f|.
bool tail_decayed(std::span<const double> f, double rel_tol = 1e-8);

std::vector<double> radial_laplacian(const RadialGrid& g, std::span<const double> f);

class HelmholtzOp {
 public:
  HelmholtzOp(const RadialGrid& g, double mass = 1.0);

  // Thomas solve plus one step of iterative refinement; verifies the
  // residual is below 1e-12 relative to the data.
  std::vector<double> solve(std::span<const double> rhs) const;
  std::vector<double> apply(std::span<const double> f) const;

  double mass() const { return mass_; }
  // Tridiagonal bands, for assembling Jacobians on top of the operator.
  std::span<const double> lower() const { return lo_; }
  std::span<const double> diag() const { return di_; }
  std::span<const double> upper() const { return up_; }

 private:
  std::vector<double> solve_once(std::span<const double> rhs) const;

  int m_;
  double mass_;
  std::vector<double> lo_, di_, up_;
  std::vector<double> cp_, inv_;  // prefactored elimination coefficients
};

}  // namespace spikeloc
