#include "spikeloc/dualenergy.hpp"

#include <fmt/format.h>

#include <cmath>

#include "spikeloc/errors.hpp"

namespace spikeloc {

namespace {

void check_sizes(const RadialGrid& g, std::size_t a, std::size_t b, std::string_view who) {
  auto m = g.r.size();
  if (a != m || b != m)
    throw ValidationError(
        fmt::format("dualenergy.{}: field sizes ({}, {}) vs grid {}", who, a, b, m));
}

}  // namespace

DualPair dual_transform(std::span<const double> u, std::span<const double> v, double K,
                        double Q, double p, double q) {
  DualPair eta;
  eta.eta1.resize(u.size());
  eta.eta2.resize(v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    eta.eta1[i] = Q * std::pow(std::fabs(u[i]), p) * (u[i] < 0.0 ? -1.0 : 1.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    eta.eta2[i] = K * std::pow(std::fabs(v[i]), q) * (v[i] < 0.0 ? -1.0 : 1.0);
  return eta;
}

double direct_energy(const RadialGrid& g, std::span<const double> u, std::span<const double> v,
                     double K, double Q, double V, double p, double q) {
  check_sizes(g, u.size(), v.size(), "direct_energy");
  HelmholtzOp A(g, V);
  std::vector<double> Au = A.apply(u);
  std::vector<double> Av = A.apply(v);
  auto m = g.r.size();
  std::vector<double> integrand(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double kinetic = 0.5 * (Au[i] * v[i] + Av[i] * u[i]);
    double coupling = K * std::pow(std::fabs(v[i]), q + 1.0) / (q + 1.0) +
                      Q * std::pow(std::fabs(u[i]), p + 1.0) / (p + 1.0);
    integrand[i] = kinetic - coupling;
  }
  return quad_radial(g, integrand);
}

double direct_energy_centered(const RadialGrid& g, std::span<const double> u,
                              std::span<const double> v, double K, double Q, double V, double p,
                              double q) {
  check_sizes(g, u.size(), v.size(), "direct_energy_centered");
  auto m = g.r.size();
  auto deriv = [&](std::span<const double> f, std::size_t i) {
    if (i == 0) return 0.0;  // radial symmetry
    if (i + 1 == m) return (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * g.h);
    return (f[i + 1] - f[i - 1]) / (2.0 * g.h);
  };
  std::vector<double> integrand(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double kinetic = deriv(u, i) * deriv(v, i) + V * u[i] * v[i];
    double coupling = K * std::pow(std::fabs(v[i]), q + 1.0) / (q + 1.0) +
                      Q * std::pow(std::fabs(u[i]), p + 1.0) / (p + 1.0);
    integrand[i] = kinetic - coupling;
  }
  return quad_radial(g, integrand);
}

FiberScalars fiber_scalars(const RadialGrid& g, const DualPair& eta, double K, double Q,
                           double p, double q, double mass) {
  check_sizes(g, eta.eta1.size(), eta.eta2.size(), "fiber_scalars");
  if (!(K > 0.0) || !(Q > 0.0))
    throw NonpositivePotential(
        fmt::format("dualenergy.fiber_scalars: coefficients ({}, {}) must be positive", K, Q));
  auto m = g.r.size();
  HelmholtzOp T(g, mass);
  std::vector<double> t2 = T.solve(eta.eta2);
  std::vector<double> t1 = T.solve(eta.eta1);
  std::vector<double> f1(m, 0.0), f2(m, 0.0), fs(m, 0.0);
  double cp = (p + 1.0) / p, cq = (q + 1.0) / q;
  double wq = std::pow(Q, 1.0 / p), wk = std::pow(K, 1.0 / q);
  for (std::size_t i = 0; i < m; ++i) {
    f1[i] = std::pow(std::fabs(eta.eta1[i]), cp) / wq;
    f2[i] = std::pow(std::fabs(eta.eta2[i]), cq) / wk;
    fs[i] = eta.eta1[i] * t2[i] + eta.eta2[i] * t1[i];
  }
  return FiberScalars{quad_radial(g, f1), quad_radial(g, f2), quad_radial(g, fs)};
}

double fiber_value(const FiberScalars& f, double p, double q, double t) {
  return p / (p + 1.0) * std::pow(t, (p + 1.0) / p) * f.d1 +
         q / (q + 1.0) * std::pow(t, (q + 1.0) / q) * f.d2 - 0.5 * t * t * f.s;
}

double dual_energy(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                   double q, double mass) {
  return fiber_value(fiber_scalars(g, eta, K, Q, p, q, mass), p, q, 1.0);
}

double nehari_time(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                   double q, double mass) {
  FiberScalars f = fiber_scalars(g, eta, K, Q, p, q, mass);
  if (!(f.s > 0.0))
    throw NotInHPlus(fmt::format(
        "dualenergy.nehari_time: resolvent cross term {:.3e} not positive", f.s));
  // g(t) = d1 t^{(1-p)/p} + d2 t^{(1-q)/q} - s is strictly decreasing with
  // limits +inf and -s, so it has exactly one root.
  auto gfun = [&](double t) {
    return f.d1 * std::pow(t, (1.0 - p) / p) + f.d2 * std::pow(t, (1.0 - q) / q) - f.s;
  };
  double lo = 1.0, hi = 1.0;
  while (gfun(lo) < 0.0) lo *= 0.25;
  while (gfun(hi) > 0.0) hi *= 4.0;
  for (int it = 0; it < 200 && hi - lo > 1e-3 * lo; ++it) {
    double mid = 0.5 * (lo + hi);
    (gfun(mid) > 0.0 ? lo : hi) = mid;
  }
  // Newton polish on the smooth monotone g
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    double gv = gfun(t);
    if (std::fabs(gv) <= 1e-14 * f.s) break;
    double gd = f.d1 * (1.0 - p) / p * std::pow(t, (1.0 - p) / p - 1.0) +
                f.d2 * (1.0 - q) / q * std::pow(t, (1.0 - q) / q - 1.0);
    double tn = t - gv / gd;
    if (!(tn > 0.0)) tn = 0.5 * t;
    t = tn;
  }
  return t;
}

double nehari_energy(const RadialGrid& g, const DualPair& eta, double K, double Q, double p,
                     double q, double mass) {
  FiberScalars f = fiber_scalars(g, eta, K, Q, p, q, mass);
  if (!(f.s > 0.0))
    throw NotInHPlus(fmt::format(
        "dualenergy.nehari_energy: resolvent cross term {:.3e} not positive", f.s));
  double t = nehari_time(g, eta, K, Q, p, q, mass);
  return fiber_value(f, p, q, t);
}

}  // namespace spikeloc
