// Direct and dual energy functionals for the constant-coefficient system,
// the dual transform, and the Nehari-type fibering root.
//
// The kinetic+mass term is evaluated through the discrete operator pairing
//   (1/2) [ quad((Au) v) + quad((Av) u) ],  A = -Laplacian + V,
// which agrees with the continuum integral to O(h^2) everywhere and is
// nodally exact against the coupling terms on discrete solutions, so the
// energy identity holds to roundoff rather than to mesh error. A literal
// centered-difference evaluation is kept as a mesh diagnostic.
#pragma once

#include <span>
#include <vector>

#include "spikeloc/radial.hpp"

namespace spikeloc {

struct DualPair {
  std::vector<double> eta1;  // Q u^p
  std::vector<double> eta2;  // K v^q
};

DualPair dual_transform(std::span<const double> u, std::span<const double> v, double K,
                        double Q, double p, double q);

double direct_energy(const RadialGrid& g, std::span<const double> u, std::span<const double> v,
                     double K, double Q, double V, double p, double q);

// Centered-difference variant of the kinetic+mass term; O(h^2) off the
// operator form, reported by the consistency suite.
double direct_energy_centered(const RadialGrid& g, std::span<const double> u,
                              std::span<const double> v, double K, double Q, double V, double p,
                              double q);

// Scalar pieces of the fiber map t -> I(t eta): the two dual norms and the
// resolvent cross term.
struct FiberScalars {
  double d1;  // integral of |eta1|^{(p+1)/p} / Q^{1/p}
  double d2;  // integral of |eta2|^{(q+1)/q} / K^{1/q}
  double s;   // integral of eta1 T eta2 + eta2 T eta1, T = (-Laplacian + mass)^{-1}
};

FiberScalars fiber_scalars(const RadialGrid& g, const DualPair& eta, double K, double Q,
                           double p, double q, double mass = 1.0);

// I(t eta) from precomputed scalars.
double fiber_value(const FiberScalars& f, double p, double q, double t);

// Dual functional at the pair itself (t = 1).
double dual_energy(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                   double q, double mass = 1.0);

// Unique positive root of d/dt I(t eta); requires the cross term positive
// (throws NotInHPlus otherwise). On discrete ground states this is 1 to
// roundoff.
double nehari_time(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                   double q, double mass = 1.0);

// I evaluated at the fiber root: the dual energy level of the ray.
double nehari_energy(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                     double q, double mass = 1.0);

}  // namespace spikeloc
