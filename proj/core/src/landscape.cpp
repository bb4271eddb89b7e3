#include "spikeloc/landscape.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "spikeloc/dualenergy.hpp"
#include "spikeloc/errors.hpp"

namespace spikeloc {

ScalingExponents scaling_exponents(const ProblemParams& params) {
  double e = params.p * params.q - 1.0;
  ScalingExponents s;
  s.thetaK = (params.p + 1.0) / e;
  s.thetaQ = (params.q + 1.0) / e;
  s.thetaV = (params.p + 1.0) * (params.q + 1.0) / e - 0.5 * params.n;
  return s;
}

Landscape::Landscape(ProblemParams params, PotentialTriple pot, RadialGrid grid,
                     SolverOptions opts)
    : params_(params),
      pot_(std::move(pot)),
      grid_(std::move(grid)),
      opts_(opts),
      exps_(scaling_exponents(params)),
      canonical_(solve_canonical(grid_, params_, opts_)) {
  if (pot_.dim != params_.n)
    throw BadDimension(fmt::format("landscape: potential dimension {} vs n = {}", pot_.dim,
                                   params_.n));
}

void Landscape::coefficients_at(const Vec3& z, double& K, double& Q, double& V) const {
  K = pot_.K.eval(z);
  Q = pot_.Q.eval(z);
  V = pot_.V.eval(z);
  if (!(K > 0.0) || !(Q > 0.0) || !(V > 0.0))
    throw NonpositivePotential(fmt::format(
        "landscape.sigma_at: coefficients ({}, {}, {}) at z = ({}, {}, {}) must be positive", K,
        Q, V, z[0], z[1], z[2]));
}

double Landscape::sigma_at(const Vec3& z) const {
  double K, Q, V;
  coefficients_at(z, K, Q, V);
  return canonical_.gamma * std::pow(V, exps_.thetaV) /
         (std::pow(Q, exps_.thetaQ) * std::pow(K, exps_.thetaK));
}

SigmaGrad Landscape::grad_sigma_at(const Vec3& z) const {
  double K, Q, V;
  coefficients_at(z, K, Q, V);
  double sigma = canonical_.gamma * std::pow(V, exps_.thetaV) /
                 (std::pow(Q, exps_.thetaQ) * std::pow(K, exps_.thetaK));
  ExprGrad gk = pot_.K.grad(z);
  ExprGrad gq = pot_.Q.grad(z);
  ExprGrad gv = pot_.V.grad(z);
  SigmaGrad out;
  out.nonsmooth = gk.nonsmooth || gq.nonsmooth || gv.nonsmooth;
  for (int i = 0; i < 3; ++i) {
    auto d = static_cast<std::size_t>(i);
    out.g[d] = sigma * (exps_.thetaV * gv.g[d] / V - exps_.thetaQ * gq.g[d] / Q -
                        exps_.thetaK * gk.g[d] / K);
  }
  return out;
}

double Landscape::sigma_direct(const Vec3& z) const {
  double K, Q, V;
  coefficients_at(z, K, Q, V);
  GroundState gs = solve_scaled(grid_, params_, K, Q, V, canonical_, opts_);
  return gs.gamma;
}

std::pair<std::vector<double>, std::vector<double>> Landscape::local_profile(
    const Vec3& z) const {
  double K, Q, V;
  coefficients_at(z, K, Q, V);
  return rescale_to_local(grid_, canonical_, params_, K, Q, V);
}

Vec3 Landscape::grad_sigma_formula(const Vec3& z, std::span<const double> u,
                                   std::span<const double> v) const {
  double K, Q, V;
  coefficients_at(z, K, Q, V);
  double p = params_.p, q = params_.q;
  DualPair eta = dual_transform(u, v, K, Q, p, q);
  auto m = grid_.r.size();
  std::vector<double> f1(m, 0.0), f2(m, 0.0);
  double cp = (p + 1.0) / p, cq = (q + 1.0) / q;
  for (std::size_t i = 0; i < m; ++i) {
    f1[i] = std::pow(std::fabs(eta.eta1[i]), cp);
    f2[i] = std::pow(std::fabs(eta.eta2[i]), cq);
  }
  double i1 = quad_radial(grid_, f1) / std::pow(Q, cp);
  double i2 = quad_radial(grid_, f2) / std::pow(K, cq);
  ExprGrad gk = pot_.K.grad(z);
  ExprGrad gq = pot_.Q.grad(z);
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    auto d = static_cast<std::size_t>(i);
    out[d] = -gq.g[d] / (p + 1.0) * i1 - gk.g[d] / (q + 1.0) * i2;
  }
  return out;
}

namespace {

// log of the spike locator G; sigma = gamma / G, so minimizers of sigma are
// maximizers of G.
double log_locator(const Landscape& ls, const Vec3& z) {
  double K, Q, V;
  ls.coefficients_at(z, K, Q, V);
  ScalingExponents e = ls.exponents();
  return e.thetaQ * std::log(Q) + e.thetaK * std::log(K) - e.thetaV * std::log(V);
}

Vec3 grad_log_locator(const Landscape& ls, const Vec3& z) {
  double K, Q, V;
  ls.coefficients_at(z, K, Q, V);
  ScalingExponents e = ls.exponents();
  ExprGrad gk = ls.potentials().K.grad(z);
  ExprGrad gq = ls.potentials().Q.grad(z);
  ExprGrad gv = ls.potentials().V.grad(z);
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    auto d = static_cast<std::size_t>(i);
    out[d] = e.thetaQ * gq.g[d] / Q + e.thetaK * gk.g[d] / K - e.thetaV * gv.g[d] / V;
  }
  return out;
}

double norm2(const Vec3& a, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

// Radical-inverse Halton points, shifted by a seeded offset, as starts.
double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

}  // namespace

CandidateSearch find_spike_candidates(const Landscape& ls, const Box& box, int multistarts,
                                      std::uint64_t seed) {
  const int dim = box.dim;
  if (dim != ls.params().n)
    throw BadDimension(fmt::format("landscape.find_spike_candidates: box dimension {} vs n = {}",
                                   dim, ls.params().n));
  if (multistarts < 1)
    throw ValidationError(fmt::format(
        "landscape.find_spike_candidates: multistarts = {} must be positive", multistarts));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec3 shift{unif(rng), unif(rng), unif(rng)};
  constexpr int bases[3] = {2, 3, 5};

  double span = 0.0;
  for (int d = 0; d < dim; ++d)
    span = std::max(span, box.hi[static_cast<std::size_t>(d)] - box.lo[static_cast<std::size_t>(d)]);
  const double fd_step = 1e-4 * span;

  // Scale of the stationarity residual over the starts, for the
  // convergence test and the flat-landscape verdict.
  double gscale = 0.0;
  std::vector<Vec3> starts;
  starts.reserve(static_cast<std::size_t>(multistarts));
  for (int k = 0; k < multistarts; ++k) {
    Vec3 z{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
      auto dd = static_cast<std::size_t>(d);
      double t = halton(k + 1, bases[dd]) + shift[dd];
      t -= std::floor(t);
      z[dd] = box.lo[dd] + t * (box.hi[dd] - box.lo[dd]);
    }
    starts.push_back(z);
    gscale = std::max(gscale, norm2(grad_log_locator(ls, z), dim));
  }

  CandidateSearch out;
  if (gscale <= 1e-12) {
    out.degenerate = true;
    return out;
  }
  const double gtol = 1e-9 * gscale;

  auto clamp_box = [&](Vec3& z) {
    for (int d = 0; d < dim; ++d) {
      auto dd = static_cast<std::size_t>(d);
      z[dd] = std::clamp(z[dd], box.lo[dd], box.hi[dd]);
    }
  };

  // Newton alone stalls on starts in the far tails, where the stationarity
  // residual decays toward the box edge. Each raw start therefore also
  // contributes a hill-climbed twin that has been pulled into a basin first.
  {
    std::size_t raw = starts.size();
    for (std::size_t k = 0; k < raw; ++k) {
      Vec3 z = starts[k];
      double f = log_locator(ls, z);
      double step = span / 16.0;
      for (int it = 0; it < 120 && step > 1e-4 * span; ++it) {
        Vec3 g = grad_log_locator(ls, z);
        double gn = norm2(g, dim);
        if (gn <= gtol) break;
        Vec3 zt = z;
        for (int d = 0; d < dim; ++d) {
          auto dd = static_cast<std::size_t>(d);
          zt[dd] += step * g[dd] / gn;
        }
        clamp_box(zt);
        double ft = log_locator(ls, zt);
        if (ft > f) {
          z = zt;
          f = ft;
        } else {
          step *= 0.5;
        }
      }
      starts.push_back(z);
    }
  }

  for (const Vec3& start : starts) {
    Vec3 z = start;
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
      Vec3 F = grad_log_locator(ls, z);
      double fn = norm2(F, dim);
      if (fn <= gtol) {
        converged = true;
        break;
      }
      // finite-difference Jacobian of the stationarity system
      double Jm[3][3] = {};
      for (int d = 0; d < dim; ++d) {
        auto dd = static_cast<std::size_t>(d);
        Vec3 zp = z, zm = z;
        zp[dd] += fd_step;
        zm[dd] -= fd_step;
        Vec3 Fp = grad_log_locator(ls, zp);
        Vec3 Fm = grad_log_locator(ls, zm);
        for (int r = 0; r < dim; ++r)
          Jm[r][d] = (Fp[static_cast<std::size_t>(r)] - Fm[static_cast<std::size_t>(r)]) /
                     (2.0 * fd_step);
      }
      // solve Jm * dz = -F (tiny dense system, partial pivoting)
      double a[3][4] = {};
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) a[r][c] = Jm[r][c];
        a[r][dim] = -F[static_cast<std::size_t>(r)];
      }
      bool singular = false;
      for (int c = 0; c < dim; ++c) {
        int piv = c;
        for (int r = c + 1; r < dim; ++r)
          if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (std::fabs(a[piv][c]) < 1e-14 * gscale) {
          singular = true;
          break;
        }
        std::swap(a[c], a[piv]);
        for (int r = c + 1; r < dim; ++r) {
          double f = a[r][c] / a[c][c];
          for (int cc = c; cc <= dim; ++cc) a[r][cc] -= f * a[c][cc];
        }
      }
      if (singular) break;
      Vec3 dz{0.0, 0.0, 0.0};
      for (int r = dim - 1; r >= 0; --r) {
        double s = a[r][dim];
        for (int c = r + 1; c < dim; ++c) s -= a[r][c] * dz[static_cast<std::size_t>(c)];
        dz[static_cast<std::size_t>(r)] = s / a[r][r];
      }
      // backtrack on the residual norm
      double t = 1.0;
      bool accepted = false;
      for (int ls_it = 0; ls_it < 30; ++ls_it) {
        Vec3 zt = z;
        for (int d = 0; d < dim; ++d)
          zt[static_cast<std::size_t>(d)] += t * dz[static_cast<std::size_t>(d)];
        clamp_box(zt);
        if (norm2(grad_log_locator(ls, zt), dim) <= (1.0 - 1e-4 * t) * fn) {
          z = zt;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
    }
    if (!converged) continue;

    // interior only; boundary artifacts are not candidates
    bool interior = true;
    for (int d = 0; d < dim; ++d) {
      auto dd = static_cast<std::size_t>(d);
      double margin = 1e-6 * (box.hi[dd] - box.lo[dd]);
      if (z[dd] <= box.lo[dd] + margin || z[dd] >= box.hi[dd] - margin) interior = false;
    }
    if (!interior) continue;

    bool dup = false;
    for (const Candidate& c : out.candidates) {
      double dist = 0.0;
      for (int d = 0; d < dim; ++d) {
        auto dd = static_cast<std::size_t>(d);
        dist = std::max(dist, std::fabs(c.z[dd] - z[dd]));
      }
      if (dist <= 1e-5 * span) {
        dup = true;
        break;
      }
    }
    if (dup) continue;

    // Hessian of log G by central differences, classified by its signature.
    double H[3][3] = {};
    double hstep = 1e-3 * span;
    double f0 = log_locator(ls, z);
    for (int d = 0; d < dim; ++d) {
      auto dd = static_cast<std::size_t>(d);
      Vec3 zp = z, zm = z;
      zp[dd] += hstep;
      zm[dd] -= hstep;
      H[d][d] = (log_locator(ls, zp) - 2.0 * f0 + log_locator(ls, zm)) / (hstep * hstep);
      for (int e = d + 1; e < dim; ++e) {
        auto ee = static_cast<std::size_t>(e);
        Vec3 zpp = z, zpm = z, zmp = z, zmm = z;
        zpp[dd] += hstep; zpp[ee] += hstep;
        zpm[dd] += hstep; zpm[ee] -= hstep;
        zmp[dd] -= hstep; zmp[ee] += hstep;
        zmm[dd] -= hstep; zmm[ee] -= hstep;
        H[d][e] = H[e][d] = (log_locator(ls, zpp) - log_locator(ls, zpm) -
                             log_locator(ls, zmp) + log_locator(ls, zmm)) /
                            (4.0 * hstep * hstep);
      }
    }
    // eigenvalue signs via the characteristic polynomial would be overkill;
    // the Jacobi sweep below is enough for a 3x3 symmetric matrix.
    double evs[3] = {};
    {
      double M[3][3];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) M[r][c] = (r < dim && c < dim) ? H[r][c] : 0.0;
      for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int r = 0; r < dim; ++r)
          for (int c = r + 1; c < dim; ++c) off += M[r][c] * M[r][c];
        if (off < 1e-30) break;
        for (int r = 0; r < dim; ++r) {
          for (int c = r + 1; c < dim; ++c) {
            if (std::fabs(M[r][c]) < 1e-300) continue;
            double phi = 0.5 * std::atan2(2.0 * M[r][c], M[c][c] - M[r][r]);
            double cs = std::cos(phi), sn = std::sin(phi);
            for (int k = 0; k < dim; ++k) {
              double mr = M[r][k], mc = M[c][k];
              M[r][k] = cs * mr - sn * mc;
              M[c][k] = sn * mr + cs * mc;
            }
            for (int k = 0; k < dim; ++k) {
              double mr = M[k][r], mc = M[k][c];
              M[k][r] = cs * mr - sn * mc;
              M[k][c] = sn * mr + cs * mc;
            }
          }
        }
      }
      for (int r = 0; r < dim; ++r) evs[r] = M[r][r];
    }
    double hscale = 0.0;
    for (int r = 0; r < dim; ++r) hscale = std::max(hscale, std::fabs(evs[r]));
    double htol = std::max(1e-8, 1e-5 * hscale);
    int pos = 0, neg = 0, zero = 0;
    for (int r = 0; r < dim; ++r) {
      if (evs[r] > htol) ++pos;
      else if (evs[r] < -htol) ++neg;
      else ++zero;
    }
    Candidate c;
    c.z = z;
    c.sigma = ls.sigma_at(z);
    SigmaGrad sg = ls.grad_sigma_at(z);
    c.grad_norm = norm2(sg.g, dim);
    // classification is for sigma = gamma / G: maxima of log G are minima
    if (zero > 0) c.kind = Candidate::Kind::Flat;
    else if (neg == dim) c.kind = Candidate::Kind::Minimum;
    else if (pos == dim) c.kind = Candidate::Kind::Maximum;
    else c.kind = Candidate::Kind::Saddle;
    out.candidates.push_back(c);
  }

  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.sigma < b.sigma; });
  return out;
}

ClarkeHull clarke_hull_1d(std::span<const double> z, std::span<const double> sigma, double z0,
                          double window) {
  if (z.size() != sigma.size() || z.size() < 3)
    throw ValidationError(fmt::format(
        "landscape.clarke_hull_1d: need matching samples, got ({}, {})", z.size(), sigma.size()));
  if (!(window > 0.0))
    throw ValidationError(fmt::format("landscape.clarke_hull_1d: window = {} must be positive",
                                      window));
  double lo = z0 - window, hi = z0 + window;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] >= lo && z[i] <= hi) pts.emplace_back(z[i], sigma[i]);
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 3)
    throw WindowTooCoarse(fmt::format(
        "landscape.clarke_hull_1d: {} samples inside [{}, {}]", pts.size(), lo, hi));
  bool left = false, right = false;
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    gap = std::max(gap, pts[i + 1].first - pts[i].first);
    if (pts[i].first < z0) left = true;
    if (pts[i + 1].first > z0) right = true;
  }
  if (!left || !right || gap > window / 10.0)
    throw WindowTooCoarse(fmt::format(
        "landscape.clarke_hull_1d: sampling too sparse near {} (max gap {:.3e}, window {:.3e})",
        z0, gap, window));
  ClarkeHull hull;
  hull.lo = std::numeric_limits<double>::infinity();
  hull.hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double s = (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first);
    hull.lo = std::min(hull.lo, s);
    hull.hi = std::max(hull.hi, s);
  }
  hull.contains_zero = hull.lo <= 0.0 && 0.0 <= hull.hi;
  return hull;
}

std::pair<double, double> gamma_pm(const Landscape& ls, const Vec3& z, double level,
                                   std::span<const ProfilePair> solutions, const Vec3& w) {
  if (solutions.empty())
    throw ValidationError("landscape.gamma_pm: need at least one minimizing pair");
  double K, Q, V;
  ls.coefficients_at(z, K, Q, V);
  double minus = -std::numeric_limits<double>::infinity();
  double plus = -std::numeric_limits<double>::infinity();
  for (const ProfilePair& sol : solutions) {
    double f = direct_energy(ls.grid(), sol.u, sol.v, K, Q, V, ls.params().p, ls.params().q);
    if (std::fabs(f - level) > 1e-6 * std::max(1.0, std::fabs(level)))
      throw EnergyMismatch(fmt::format(
          "landscape.gamma_pm: pair energy {:.12e} does not match level {:.12e}", f, level));
    Vec3 g = ls.grad_sigma_formula(z, sol.u, sol.v);
    double gw = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
    minus = std::max(minus, gw);   // sup of the bracket
    plus = std::max(plus, -gw);    // -inf of the bracket
  }
  return {minus, plus};
}

}  // namespace spikeloc
