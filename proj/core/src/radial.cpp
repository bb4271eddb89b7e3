#include "spikeloc/radial.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "spikeloc/errors.hpp"

namespace spikeloc {

namespace {

double surface_measure(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

// Composite Simpson weights on m nodes (spacing folded in by the caller).
// An odd interval count closes with a 3/8 block on the last three cells.
std::vector<double> simpson_weights(int m) {
  std::vector<double> w(static_cast<std::size_t>(m), 0.0);
  int intervals = m - 1;
  int simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[static_cast<std::size_t>(i)] += 1.0 / 3.0;
    w[static_cast<std::size_t>(i) + 1] += 4.0 / 3.0;
    w[static_cast<std::size_t>(i) + 2] += 1.0 / 3.0;
  }
  if (simpson_end < intervals) {
    auto s = static_cast<std::size_t>(simpson_end);
    w[s] += 3.0 / 8.0;
    w[s + 1] += 9.0 / 8.0;
    w[s + 2] += 9.0 / 8.0;
    w[s + 3] += 3.0 / 8.0;
  }
  return w;
}

}  // namespace

RadialGrid make_radial_grid(int n, int m, double R) {
  if (n < 1 || n > 3)
    throw BadDimension(fmt::format("radialkernel.make_grid: n = {} not in 1..3", n));
  if (m < 9)
    throw GridTooCoarse(fmt::format("radialkernel.make_grid: m = {} below minimum 9", m));
  if (!(R > 0.0))
    throw ValidationError(fmt::format("radialkernel.make_grid: R = {} must be positive", R));

  RadialGrid g;
  g.n = n;
  g.m = m;
  g.R = R;
  g.h = R / static_cast<double>(m - 1);
  g.r.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) g.r[static_cast<std::size_t>(i)] = g.h * i;

  g.qw = simpson_weights(m);
  double sigma = surface_measure(n);
  for (int i = 0; i < m; ++i) {
    auto s = static_cast<std::size_t>(i);
    g.qw[s] *= sigma * g.h * std::pow(g.r[s], n - 1);
  }
  return g;
}

double quad_radial(const RadialGrid& g, std::span<const double> f) {
  if (f.size() != g.qw.size())
    throw ValidationError(fmt::format("radialkernel.quad_radial: field size {} vs grid {}",
                                      f.size(), g.qw.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += g.qw[i] * f[i];
  return acc;
}

bool tail_decayed(std::span<const double> f, double rel_tol) {
  if (f.empty()) return false;
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) return true;
  std::size_t tail = std::max<std::size_t>(1, f.size() / 100);
  for (std::size_t i = f.size() - tail; i < f.size(); ++i)
    if (std::fabs(f[i]) > rel_tol * peak) return false;
  return true;
}

std::vector<double> radial_laplacian(const RadialGrid& g, std::span<const double> f) {
  auto m = static_cast<std::size_t>(g.m);
  if (f.size() != m)
    throw ValidationError(fmt::format("radialkernel.radial_laplacian: field size {} vs grid {}",
                                      f.size(), m));
  std::vector<double> out(m, 0.0);
  double h2 = g.h * g.h;
  // regular limit at the origin: Laplacian -> n f''(0), f'(0) = 0
  out[0] = 2.0 * g.n * (f[1] - f[0]) / h2;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    double d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    double d1 = (f[i + 1] - f[i - 1]) / (2.0 * g.h);
    out[i] = d2 + (g.n - 1) * d1 / g.r[i];
  }
  // one-sided second-order closure at R
  double d2 = (2.0 * f[m - 1] - 5.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4]) / h2;
  double d1 = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * g.h);
  out[m - 1] = d2 + (g.n - 1) * d1 / g.r[m - 1];
  return out;
}

HelmholtzOp::HelmholtzOp(const RadialGrid& g, double mass) : m_(g.m), mass_(mass) {
  if (!(mass > 0.0))
    throw ValidationError(fmt::format("radialkernel.helmholtz: mass = {} must be positive",
                                      mass));
  auto m = static_cast<std::size_t>(m_);
  lo_.assign(m, 0.0);
  di_.assign(m, 0.0);
  up_.assign(m, 0.0);
  double h = g.h, h2 = h * h;

  di_[0] = 2.0 * g.n / h2 + mass;
  up_[0] = -2.0 * g.n / h2;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    double c = (g.n - 1) / (2.0 * h * g.r[i]);
    lo_[i] = -1.0 / h2 + c;
    di_[i] = 2.0 / h2 + mass;
    up_[i] = -1.0 / h2 - c;
  }
  // ghost elimination of f'(R) + s f(R) = 0, s = sqrt(mass)
  double s = std::sqrt(mass);
  lo_[m - 1] = -2.0 / h2;
  di_[m - 1] = 2.0 * (1.0 + h * s) / h2 + (g.n - 1) * s / g.R + mass;
  up_[m - 1] = 0.0;

  // prefactored forward elimination (diagonally dominant, no pivoting)
  cp_.assign(m, 0.0);
  inv_.assign(m, 0.0);
  double denom = di_[0];
  inv_[0] = 1.0 / denom;
  cp_[0] = up_[0] * inv_[0];
  for (std::size_t i = 1; i < m; ++i) {
    denom = di_[i] - lo_[i] * cp_[i - 1];
    inv_[i] = 1.0 / denom;
    cp_[i] = up_[i] * inv_[i];
  }
}

std::vector<double> HelmholtzOp::solve_once(std::span<const double> rhs) const {
  auto m = static_cast<std::size_t>(m_);
  std::vector<double> w(m, 0.0);
  w[0] = rhs[0] * inv_[0];
  for (std::size_t i = 1; i < m; ++i) w[i] = (rhs[i] - lo_[i] * w[i - 1]) * inv_[i];
  for (std::size_t i = m - 1; i-- > 0;) w[i] -= cp_[i] * w[i + 1];
  return w;
}

std::vector<double> HelmholtzOp::apply(std::span<const double> f) const {
  auto m = static_cast<std::size_t>(m_);
  if (f.size() != m)
    throw ValidationError(fmt::format("radialkernel.helmholtz: field size {} vs grid {}",
                                      f.size(), m));
  std::vector<double> out(m, 0.0);
  out[0] = di_[0] * f[0] + up_[0] * f[1];
  for (std::size_t i = 1; i + 1 < m; ++i)
    out[i] = lo_[i] * f[i - 1] + di_[i] * f[i] + up_[i] * f[i + 1];
  out[m - 1] = lo_[m - 1] * f[m - 2] + di_[m - 1] * f[m - 1];
  return out;
}

std::vector<double> HelmholtzOp::solve(std::span<const double> rhs) const {
  auto m = static_cast<std::size_t>(m_);
  if (rhs.size() != m)
    throw ValidationError(fmt::format("radialkernel.helmholtz_solve: rhs size {} vs grid {}",
                                      rhs.size(), m));
  std::vector<double> w = solve_once(rhs);

  // one refinement pass; raw Thomas backward error scales like 1/h^2
  std::vector<double> aw = apply(w);
  std::vector<double> res(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) res[i] = rhs[i] - aw[i];
  std::vector<double> corr = solve_once(res);
  for (std::size_t i = 0; i < m; ++i) w[i] += corr[i];

  aw = apply(w);
  double rmax = 0.0, bmax = 1.0, wmax = 1.0, anorm = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    rmax = std::max(rmax, std::fabs(rhs[i] - aw[i]));
    bmax = std::max(bmax, std::fabs(rhs[i]));
    wmax = std::max(wmax, std::fabs(w[i]));
    anorm = std::max(anorm, std::fabs(lo_[i]) + std::fabs(di_[i]) + std::fabs(up_[i]));
  }
  // the residual evaluation itself carries eps * |A| * |w| of noise
  double gate = 1e-12 * bmax + 16.0 * std::numeric_limits<double>::epsilon() * anorm * wmax;
  if (rmax > gate)
    throw Error(fmt::format("radialkernel.helmholtz_solve: residual {:.3e} above {:.3e}", rmax,
                            gate));
  return w;
}

}  // namespace spikeloc
