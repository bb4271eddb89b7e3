#include "spikeloc/groundstate.hpp"

#include <fmt/format.h>

#include <Eigen/Sparse>
#include <cmath>
#include <limits>

#include "spikeloc/dualenergy.hpp"
#include "spikeloc/errors.hpp"

namespace spikeloc {

namespace {

double spow(double x, double e) {
  return x >= 0.0 ? std::pow(x, e) : -std::pow(-x, e);
}

struct NewtonOutcome {
  bool converged = false;
  int iters = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool collapsed = false;  // line search hit the minimum step
};

// Converged when the max-norm residual reaches the user tolerance or the
// roundoff floor of the discrete operator, whichever is larger.
double stop_level(const SolverOptions& opts, double h, double mass, double amp) {
  double opscale = 2.0 / (h * h) + mass;
  return std::max(opts.tol,
                  100.0 * std::numeric_limits<double>::epsilon() * opscale * std::max(1.0, amp));
}

// Damped Newton for the coupled system at frozen coefficients. Fields are
// updated in place; the caller owns fallback policy.
NewtonOutcome coupled_newton(const HelmholtzOp& A, double h, double K, double Q, double p,
                             double q, std::vector<double>& u, std::vector<double>& v,
                             const SolverOptions& opts) {
  const auto m = u.size();
  const auto N = static_cast<Eigen::Index>(2 * m);
  auto lo = A.lower();
  auto di = A.diag();
  auto up = A.upper();

  auto residual = [&](const std::vector<double>& uu, const std::vector<double>& vv,
                      std::vector<double>& Fu, std::vector<double>& Fv) {
    Fu = A.apply(uu);
    Fv = A.apply(vv);
    for (std::size_t i = 0; i < m; ++i) {
      Fu[i] -= K * spow(vv[i], q);
      Fv[i] -= Q * spow(uu[i], p);
    }
  };
  auto norm_inf = [](const std::vector<double>& a, const std::vector<double>& b) {
    double mx = 0.0;
    for (double x : a) mx = std::max(mx, std::fabs(x));
    for (double x : b) mx = std::max(mx, std::fabs(x));
    return mx;
  };
  auto merit = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (double x : a) s += x * x;
    for (double x : b) s += x * x;
    return 0.5 * s;
  };

  std::vector<double> Fu, Fv, ut, vt, Fut, Fvt;
  residual(u, v, Fu, Fv);

  NewtonOutcome out;
  Eigen::SparseMatrix<double> J(N, N);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  for (int it = 0; it < opts.max_iter; ++it) {
    double amp = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      amp = std::max({amp, std::fabs(u[i]), std::fabs(v[i])});
    out.residual = norm_inf(Fu, Fv);
    if (out.residual <= stop_level(opts, h, A.mass(), amp)) {
      out.converged = true;
      out.iters = it;
      return out;
    }

    trips.clear();
    trips.reserve(8 * m);
    auto I = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    for (std::size_t i = 0; i < m; ++i) {
      if (i > 0) {
        trips.emplace_back(I(i), I(i - 1), lo[i]);
        trips.emplace_back(I(m + i), I(m + i - 1), lo[i]);
      }
      trips.emplace_back(I(i), I(i), di[i]);
      trips.emplace_back(I(m + i), I(m + i), di[i]);
      if (i + 1 < m) {
        trips.emplace_back(I(i), I(i + 1), up[i]);
        trips.emplace_back(I(m + i), I(m + i + 1), up[i]);
      }
      trips.emplace_back(I(i), I(m + i), -K * q * std::pow(std::fabs(v[i]), q - 1.0));
      trips.emplace_back(I(m + i), I(i), -Q * p * std::pow(std::fabs(u[i]), p - 1.0));
    }
    J.setFromTriplets(trips.begin(), trips.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      out.iters = it;
      return out;
    }
    Eigen::VectorXd rhs(N);
    for (std::size_t i = 0; i < m; ++i) {
      rhs[I(i)] = -Fu[i];
      rhs[I(m + i)] = -Fv[i];
    }
    Eigen::VectorXd step = lu.solve(rhs);

    double phi0 = merit(Fu, Fv);
    double t = 1.0;
    bool accepted = false;
    while (t >= opts.min_step) {
      ut = u;
      vt = v;
      for (std::size_t i = 0; i < m; ++i) {
        ut[i] += t * step[I(i)];
        vt[i] += t * step[I(m + i)];
      }
      residual(ut, vt, Fut, Fvt);
      if (merit(Fut, Fvt) <= phi0 * (1.0 - 2.0 * opts.armijo * t)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.iters = it;
      out.collapsed = true;
      return out;
    }
    u.swap(ut);
    v.swap(vt);
    Fu.swap(Fut);
    Fv.swap(Fvt);
  }
  out.iters = opts.max_iter;
  out.residual = norm_inf(Fu, Fv);
  return out;
}

std::vector<double> sech_profile(const RadialGrid& g, double s) {
  std::vector<double> w(g.r.size(), 0.0);
  double amp = std::pow((s + 1.0) / 2.0, 1.0 / (s - 1.0));
  double rate = (s - 1.0) / 2.0;
  double pw = 2.0 / (s - 1.0);
  for (std::size_t i = 0; i < g.r.size(); ++i)
    w[i] = amp * std::pow(1.0 / std::cosh(rate * g.r[i]), pw);
  return w;
}

void check_positive(const std::vector<double>& u, const std::vector<double>& v,
                    std::string_view who) {
  for (double x : u)
    if (!(x > 0.0))
      throw PositivityLost(fmt::format("groundstate.{}: u lost positivity ({})", who, x));
  for (double x : v)
    if (!(x > 0.0))
      throw PositivityLost(fmt::format("groundstate.{}: v lost positivity ({})", who, x));
}

bool nonincreasing(const std::vector<double>& f) {
  double peak = 0.0;
  for (double x : f) peak = std::max(peak, std::fabs(x));
  for (std::size_t i = 0; i + 1 < f.size(); ++i)
    if (f[i + 1] > f[i] + 1e-12 * peak) return false;
  return true;
}

GroundState finish_record(const RadialGrid& g, const ProblemParams& params, double K, double Q,
                          double V, std::vector<double> u, std::vector<double> v,
                          const NewtonOutcome& last, int iters_total, std::string_view who) {
  check_positive(u, v, who);
  GroundState gs;
  gs.n = params.n;
  gs.p = params.p;
  gs.q = params.q;
  gs.coefK = K;
  gs.coefQ = Q;
  gs.coefV = V;
  gs.gamma = direct_energy(g, u, v, K, Q, V, params.p, params.q);
  gs.theta = estimate_decay_rate(g, u, v, 0.5 * g.R, 0.75 * g.R);
  gs.u0 = u[0];
  gs.v0 = v[0];
  gs.residual = last.residual;
  gs.iters = iters_total;
  gs.tail_ok = tail_decayed(u, 1e-6) && tail_decayed(v, 1e-6);
  gs.monotone = nonincreasing(u) && nonincreasing(v);
  gs.u = std::move(u);
  gs.v = std::move(v);
  return gs;
}

}  // namespace

std::vector<double> scalar_ground_state(const RadialGrid& g, double p,
                                        const SolverOptions& opts) {
  if (!(p > 1.0))
    throw ExponentTooSmall(fmt::format("groundstate.scalar: p = {} must exceed 1", p));
  HelmholtzOp A(g, 1.0);
  std::vector<double> u = sech_profile(g, p);
  std::vector<double> v = u;
  NewtonOutcome out = coupled_newton(A, g.h, 1.0, 1.0, p, p, u, v, opts);
  if (!out.converged)
    throw NewtonDiverged(fmt::format(
        "groundstate.scalar: no convergence for p = {} (residual {:.3e} after {} iterations)",
        p, out.residual, out.iters));
  check_positive(u, v, "scalar");
  return u;
}

GroundState solve_canonical(const RadialGrid& g, const ProblemParams& params,
                            const SolverOptions& opts) {
  if (g.n != params.n)
    throw BadDimension(fmt::format("groundstate.solve_canonical: grid n = {} vs params n = {}",
                                   g.n, params.n));
  HelmholtzOp A(g, 1.0);
  double s = std::min(params.p, params.q);
  std::vector<double> u = sech_profile(g, s);
  std::vector<double> v = u;
  NewtonOutcome out = coupled_newton(A, g.h, 1.0, 1.0, s, s, u, v, opts);
  if (!out.converged)
    throw NewtonDiverged(fmt::format(
        "groundstate.solve_canonical: seed pair ({}, {}) diverged (residual {:.3e})", s, s,
        out.residual));
  int iters_total = out.iters;

  double dp = params.p - s, dq = params.q - s;
  double dist = std::max(std::fabs(dp), std::fabs(dq));
  if (dist > 0.0) {
    double t = 0.0;
    double dt = 1.0 / std::max(1.0, std::ceil(dist * opts.steps_per_unit));
    double dt0 = dt;
    std::vector<double> usave, vsave;
    while (t < 1.0 - 1e-12) {
      double tn = std::min(1.0, t + dt);
      usave = u;
      vsave = v;
      out = coupled_newton(A, g.h, 1.0, 1.0, s + tn * dp, s + tn * dq, u, v, opts);
      if (out.converged) {
        t = tn;
        iters_total += out.iters;
        dt = std::min(dt0, dt * 1.5);
      } else {
        u = usave;
        v = vsave;
        dt *= 0.5;
        if (dt < opts.min_dt)
          throw ContinuationStuck(fmt::format(
              "groundstate.solve_canonical: exponent continuation stalled at t = {:.4f} "
              "toward ({}, {})",
              t, params.p, params.q));
      }
    }
  }
  return finish_record(g, params, 1.0, 1.0, 1.0, std::move(u), std::move(v), out, iters_total,
                       "solve_canonical");
}

GroundState solve_scaled(const RadialGrid& g, const ProblemParams& params, double K, double Q,
                         double V, const GroundState& canonical, const SolverOptions& opts) {
  if (!(K > 0.0) || !(Q > 0.0) || !(V > 0.0))
    throw NonpositivePotential(fmt::format(
        "groundstate.solve_scaled: coefficients must be positive, got ({}, {}, {})", K, Q, V));
  auto [u, v] = rescale_to_local(g, canonical, params, K, Q, V);
  HelmholtzOp A(g, V);
  NewtonOutcome out = coupled_newton(A, g.h, K, Q, params.p, params.q, u, v, opts);
  if (!out.converged)
    throw NewtonDiverged(fmt::format(
        "groundstate.solve_scaled: no convergence at (K, Q, V) = ({}, {}, {}), residual {:.3e}",
        K, Q, V, out.residual));
  return finish_record(g, params, K, Q, V, std::move(u), std::move(v), out, out.iters,
                       "solve_scaled");
}

LocalScaling local_scaling(const ProblemParams& params, double K, double Q, double V) {
  double e = params.p * params.q - 1.0;
  LocalScaling s;
  s.mu = std::sqrt(V);
  s.w1 = std::pow(V, (params.q + 1.0) / e) / (std::pow(Q, params.q / e) * std::pow(K, 1.0 / e));
  s.w2 = std::pow(V, (params.p + 1.0) / e) / (std::pow(Q, 1.0 / e) * std::pow(K, params.p / e));
  return s;
}

std::pair<std::vector<double>, std::vector<double>> rescale_to_local(
    const RadialGrid& g, const GroundState& canonical, const ProblemParams& params, double K,
    double Q, double V) {
  LocalScaling s = local_scaling(params, K, Q, V);
  auto m = g.r.size();
  std::vector<double> u(m, 0.0), v(m, 0.0);
  if (s.mu == 1.0) {
    for (std::size_t i = 0; i < m; ++i) {
      u[i] = s.w1 * canonical.u[i];
      v[i] = s.w2 * canonical.v[i];
    }
    return {std::move(u), std::move(v)};
  }
  for (std::size_t i = 0; i < m; ++i) {
    double rr = s.mu * g.r[i];
    if (rr >= g.R) continue;
    double pos = rr / g.h;
    auto j = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(j);
    u[i] = s.w1 * ((1.0 - frac) * canonical.u[j] + frac * canonical.u[j + 1]);
    v[i] = s.w2 * ((1.0 - frac) * canonical.v[j] + frac * canonical.v[j + 1]);
  }
  return {std::move(u), std::move(v)};
}

double estimate_decay_rate(const RadialGrid& g, std::span<const double> u,
                           std::span<const double> v, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw ValidationError(fmt::format(
        "groundstate.estimate_decay_rate: bad window [{}, {}]", r_lo, r_hi));
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    if (g.r[i] < r_lo || g.r[i] > r_hi) continue;
    double sum = u[i] + v[i];
    if (!(sum > 1e-300))
      throw WindowTooNoisy(fmt::format(
          "groundstate.estimate_decay_rate: nonpositive tail value at r = {}", g.r[i]));
    xs.push_back(g.r[i]);
    ys.push_back(-std::log(sum) - 0.5 * (g.n - 1) * std::log(g.r[i]));
  }
  if (xs.size() < 8)
    throw WindowTooCoarse(fmt::format(
        "groundstate.estimate_decay_rate: only {} nodes in [{}, {}]", xs.size(), r_lo, r_hi));
  double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icept = (sy - slope * sx) / n;
  double ymin = ys[0], ymax = ys[0], rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (icept + slope * xs[i]);
    rss += e * e;
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  double rms = std::sqrt(rss / n);
  if (ymax > ymin && rms > 0.05 * (ymax - ymin))
    throw WindowTooNoisy(fmt::format(
        "groundstate.estimate_decay_rate: fit rms {:.3e} too large for window [{}, {}]", rms,
        r_lo, r_hi));
  return slope;
}

}  // namespace spikeloc
