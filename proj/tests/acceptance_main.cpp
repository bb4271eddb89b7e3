// Acceptance gate: one line per criterion with the measured value, the
// gate, and the elapsed time. Exits nonzero when anything fails.
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spikeloc/dualenergy.hpp"
#include "spikeloc/groundstate.hpp"
#include "spikeloc/landscape.hpp"
#include "spikeloc/perturb.hpp"

using namespace spikeloc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void gate(const std::string& what, double measured, double tol) {
    bool ok = measured <= tol;
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += fmt::format("{} = {:.3g}{}", what, measured, ok ? "" : fmt::format(" > {:.3g}", tol));
  }
  void flag(const std::string& what, bool ok) {
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += fmt::format("{} = {}", what, ok ? "yes" : "NO");
  }
};

int g_failures = 0;

void criterion(int id, const std::string& name, double budget_s,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = fmt::format("threw: {}", e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    out.pass = false;
    out.detail += fmt::format(", over time budget {:.0f}s", budget_s);
  }
  if (!out.pass) ++g_failures;
  fmt::print("[{}] {:2d} {:<28} {}  [{:.1f}s]\n", out.pass ? "PASS" : "FAIL", id, name,
             out.detail, secs);
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

int main() {
  const ProblemParams p33 = validate_params(1, 3.0, 3.0);

  criterion(1, "closed-form branch", 5.0, [&](Outcome& out) {
    RadialGrid g = make_radial_grid(1, 4001, 20.0);
    GroundState gs = solve_canonical(g, p33);
    out.gate("u0 err", std::fabs(gs.u0 - std::sqrt(2.0)), 1e-5);
    out.gate("v0 err", std::fabs(gs.v0 - std::sqrt(2.0)), 1e-5);
    out.gate("energy err", std::fabs(gs.gamma - 8.0 / 3.0), 1e-5);
  });

  criterion(2, "energy identity", 120.0, [&](Outcome& out) {
    double worst = 0.0;
    for (int n : {1, 3}) {
      for (auto [p, q] : {std::pair{3.0, 3.0}, {3.0, 2.0}, {2.0, 5.0}}) {
        ProblemParams params = validate_params(n, p, q);
        RadialGrid g = make_radial_grid(n, n == 1 ? 4001 : 3001, n == 1 ? 20.0 : 15.0);
        GroundState gs = solve_canonical(g, params);
        DualPair eta = dual_transform(gs.u, gs.v, 1.0, 1.0, p, q);
        worst = std::max(worst, rel(dual_energy(g, eta, 1.0, 1.0, p, q), gs.gamma));
      }
    }
    out.gate("worst identity rel", worst, 1e-8);
  });

  criterion(3, "scaling-law exactness", 60.0, [&](Outcome& out) {
    RadialGrid g = make_radial_grid(1, 8001, 20.0);
    GroundState canon = solve_canonical(g, p33);
    ScalingExponents ex = scaling_exponents(p33);
    double triples[5][3] = {{2, 0.5, 1}, {3, 3, 4}, {1.5, 1, 1}, {1, 1, 0.5}, {0.8, 1.2, 2}};
    double worst = 0.0;
    for (auto& t : triples) {
      GroundState gs = solve_scaled(g, p33, t[0], t[1], t[2], canon);
      double pred = canon.gamma * std::pow(t[2], ex.thetaV) /
                    (std::pow(t[1], ex.thetaQ) * std::pow(t[0], ex.thetaK));
      worst = std::max(worst, rel(gs.gamma, pred));
    }
    out.gate("worst scaling rel", worst, 1e-5);
  });

  RadialGrid grid41 = make_radial_grid(1, 4001, 20.0);
  Landscape bump(p33, PotentialTriple::parse("1 + 0.5*exp(-x1^2)", "1", "1", 1), grid41,
                 SolverOptions{});

  criterion(4, "derivative formulas", 60.0, [&](Outcome& out) {
    double worst = 0.0;
    for (double z : {0.2, -0.2, 0.4, -0.4, 0.6, -0.6, 0.9, -0.9, 1.3, -1.3}) {
      auto [u, v] = bump.local_profile(Vec3{z, 0.0, 0.0});
      Vec3 g = bump.grad_sigma_formula(Vec3{z, 0.0, 0.0}, u, v);
      double hstep = 1e-4;
      double fd = (bump.sigma_at(Vec3{z + hstep, 0.0, 0.0}) -
                   bump.sigma_at(Vec3{z - hstep, 0.0, 0.0})) /
                  (2.0 * hstep);
      worst = std::max(worst, std::fabs(g[0] - fd) / std::fabs(fd));
    }
    out.gate("worst gradient rel", worst, 1e-4);
  });

  criterion(5, "fibering map", 60.0, [&](Outcome& out) {
    const GroundState& gs = bump.canonical();
    DualPair eta = dual_transform(gs.u, gs.v, 1.0, 1.0, 3.0, 3.0);
    out.gate("root minus one", std::fabs(nehari_time(grid41, eta, 1.0, 1.0, 3.0, 3.0) - 1.0),
             1e-8);

    double t0 = nehari_time(grid41, eta, 1.0, 1.0, 3.0, 3.0);
    DualPair doubled = eta;
    for (double& x : doubled.eta1) x *= 2.0;
    for (double& x : doubled.eta2) x *= 2.0;
    out.gate("ray scaling rel",
             std::fabs(nehari_time(grid41, doubled, 1.0, 1.0, 3.0, 3.0) * 2.0 / t0 - 1.0),
             1e-10);

    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> unif(0.3, 2.5);
    int unimodal = 0;
    for (int trial = 0; trial < 100; ++trial) {
      double a = unif(rng), b = unif(rng), w = unif(rng), s = unif(rng);
      DualPair pair;
      pair.eta1.resize(grid41.r.size());
      pair.eta2.resize(grid41.r.size());
      for (std::size_t i = 0; i < grid41.r.size(); ++i) {
        double r = grid41.r[i];
        pair.eta1[i] = a * std::exp(-w * r * r);
        pair.eta2[i] = b * std::exp(-s * r * r) * (1.0 + 0.1 * r);
      }
      FiberScalars fs = fiber_scalars(grid41, pair, 1.0, 1.0, 3.0, 3.0);
      if (!(fs.s > 0.0)) continue;
      double tr = nehari_time(grid41, pair, 1.0, 1.0, 3.0, 3.0);
      double peak = fiber_value(fs, 3.0, 3.0, tr);
      bool mono_up = true, mono_down = true;
      double prev = fiber_value(fs, 3.0, 3.0, tr / 64.0);
      for (int k = 1; k <= 24; ++k) {
        double val = fiber_value(fs, 3.0, 3.0, tr / 64.0 * std::pow(64.0, k / 24.0));
        if (val < prev - 1e-12 * std::fabs(peak)) mono_up = false;
        prev = val;
      }
      prev = peak;
      for (int k = 1; k <= 24; ++k) {
        double val = fiber_value(fs, 3.0, 3.0, tr * std::pow(64.0, k / 24.0));
        if (val > prev + 1e-12 * std::fabs(peak)) mono_down = false;
        prev = val;
      }
      if (mono_up && mono_down) ++unimodal;
    }
    out.flag("100 trials unimodal", unimodal == 100);
  });

  SweepResult main_sweep;
  criterion(6, "concentration criterion", 300.0, [&](Outcome& out) {
    std::vector<double> ladder{0.4, 0.3, 0.2, 0.1, 0.05};
    SweepOptions opts;
    main_sweep = epsilon_sweep(bump, ladder, 0.3, opts);
    out.gate("final peak dist", std::fabs(main_sweep.runs.back().peak_x), 0.05);
    out.gate("final energy gap",
             rel(main_sweep.runs.back().energy, main_sweep.verdict.sigma_ref), 0.01);
    out.flag("trends monotone",
             main_sweep.verdict.peaks_monotone && main_sweep.verdict.gaps_monotone);

    Landscape two(p33,
                  PotentialTriple::parse("1 + 0.4*exp(-(x1-2)^2) + 0.6*exp(-(x1+2)^2)", "1",
                                         "1", 1),
                  grid41, SolverOptions{});
    std::vector<double> short_ladder{0.4, 0.3, 0.2};
    SweepResult right = epsilon_sweep(two, short_ladder, 1.5, opts);
    out.gate("basin +2 target err", std::fabs(right.verdict.target_x - 2.0), 0.05);
    out.gate("basin +2 peak err", std::fabs(right.runs.back().peak_x - 2.0), 0.05);
    SweepResult left = epsilon_sweep(two, short_ladder, -1.5, opts);
    out.gate("basin -2 target err", std::fabs(left.verdict.target_x + 2.0), 0.05);
    out.gate("basin -2 peak err", std::fabs(left.runs.back().peak_x + 2.0), 0.05);
  });

  criterion(7, "balance identity", 30.0, [&](Outcome& out) {
    double worst = 0.0;
    for (const PerturbedRun& run : main_sweep.runs)
      worst = std::max(worst, std::fabs(run.ps_residual) / run.ps_scale);
    out.flag("runs present", !main_sweep.runs.empty());
    out.gate("worst balance rel", worst, 1e-6);
  });

  criterion(8, "subdifferential hull", 10.0, [&](Outcome& out) {
    std::vector<double> z, kink, smooth;
    for (double t = -1.0; t <= 1.0 + 1e-12; t += 0.002) {
      z.push_back(t);
      kink.push_back(std::fabs(t));
    }
    ClarkeHull hk = clarke_hull_1d(z, kink, 0.0, 0.1);
    out.flag("kink hull covers [-0.9, 0.9]", hk.lo <= -0.9 && hk.hi >= 0.9 && hk.contains_zero);

    std::vector<double> zs;
    for (double t = 0.2; t <= 0.4 + 1e-12; t += 0.0005) {
      zs.push_back(t);
      smooth.push_back(t * t);
    }
    ClarkeHull hs = clarke_hull_1d(zs, smooth, 0.3, 0.01);
    out.flag("smooth hull brackets slope", hs.lo <= 0.6 && 0.6 <= hs.hi);
    out.gate("smooth hull width", hs.hi - hs.lo, 0.05);
  });

  criterion(9, "mesh convergence", 30.0, [&](Outcome& out) {
    RadialGrid coarse = make_radial_grid(1, 2001, 20.0);
    RadialGrid fine = make_radial_grid(1, 4001, 20.0);
    double err_c = std::fabs(solve_canonical(coarse, p33).gamma - 8.0 / 3.0);
    double err_f = std::fabs(solve_canonical(fine, p33).gamma - 8.0 / 3.0);
    double ratio = err_c / err_f;
    out.flag(fmt::format("halving h cuts the error by {:.3g}", ratio),
             ratio >= 3.2 && ratio <= 4.8);
  });

  criterion(10, "lipschitz evidence", 30.0, [&](Outcome& out) {
    ScalingExponents ex = bump.exponents();
    const PotentialTriple& pot = bump.potentials();
    int npts = 201;
    std::vector<double> sig(static_cast<std::size_t>(npts)), bnd(static_cast<std::size_t>(npts));
    double lo = -2.0, hi = 2.0;
    for (int i = 0; i < npts; ++i) {
      double z = lo + (hi - lo) * i / (npts - 1);
      Vec3 zz{z, 0.0, 0.0};
      double K, Q, V;
      bump.coefficients_at(zz, K, Q, V);
      sig[static_cast<std::size_t>(i)] = bump.sigma_at(zz);
      ExprGrad gk = pot.K.grad(zz), gq = pot.Q.grad(zz), gv = pot.V.grad(zz);
      bnd[static_cast<std::size_t>(i)] =
          sig[static_cast<std::size_t>(i)] *
          (ex.thetaK * std::fabs(gk.g[0]) / K + ex.thetaQ * std::fabs(gq.g[0]) / Q +
           ex.thetaV * std::fabs(gv.g[0]) / V);
    }
    double step = (hi - lo) / (npts - 1);
    double worst = 0.0;
    for (int i = 0; i + 1 < npts; ++i) {
      auto ii = static_cast<std::size_t>(i);
      double quot = std::fabs(sig[ii + 1] - sig[ii]) / step;
      double cap = std::max(bnd[ii], bnd[ii + 1]);
      if (cap > 0.0) worst = std::max(worst, quot / cap);
    }
    out.gate("worst quotient over bound", worst, 1.05);
  });

  if (g_failures > 0) {
    fmt::print("acceptance: {} criteria failed\n", g_failures);
    return 1;
  }
  fmt::print("acceptance: all criteria passed\n");
  return 0;
}
