// Command-line front end: groundstate, sigma-map, locate, epsilon-sweep,
// check. Exit codes: 0 success, 2 invalid input, 3 solver divergence,
// 4 a produced verdict failed.
#include <fmt/format.h>

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <thread>

#include "spikeloc/config.hpp"
#include "spikeloc/dualenergy.hpp"
#include "spikeloc/errors.hpp"
#include "spikeloc/io.hpp"
#include "spikeloc/landscape.hpp"
#include "spikeloc/perturb.hpp"
#include "spikeloc/version.hpp"

namespace sl = spikeloc;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  int jobs = 1;
  long long seed_override = -1;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_override, "output directory (overrides [output] dir)");
  cmd->add_option("--jobs", args.jobs, "worker threads for independent solves")
      ->check(CLI::Range(1, 256));
  cmd->add_option("--seed", args.seed_override, "override [solver] seed");
  cmd->add_flag("--verbose", args.verbose, "progress notes on stderr");
}

struct Setup {
  sl::RunConfig cfg;
  std::filesystem::path out;
  std::uint64_t seed;
};

Setup make_setup(const CommonArgs& args) {
  Setup s{sl::RunConfig::load(args.config_path), {}, 0};
  s.out = args.out_override.empty() ? std::filesystem::path(s.cfg.out_dir)
                                    : std::filesystem::path(args.out_override);
  s.seed = args.seed_override >= 0 ? static_cast<std::uint64_t>(args.seed_override)
                                   : s.cfg.seed;
  return s;
}

void note(const CommonArgs& args, const std::string& line) {
  if (args.verbose) std::fputs((line + "\n").c_str(), stderr);
}

std::vector<std::pair<std::string, std::string>> common_meta(const Setup& s,
                                                             const char* command) {
  return {{"spikeloc", sl::kVersion},
          {"command", command},
          {"config_hash", fmt::format("{:016x}", s.cfg.hash())},
          {"n", fmt::format("{}", s.cfg.n)},
          {"p", sl::format_g(s.cfg.p, 17)},
          {"q", sl::format_g(s.cfg.q, 17)}};
}

sl::SolverOptions solver_options(const sl::RunConfig& cfg) {
  sl::SolverOptions opts;
  opts.tol = cfg.newton_tol;
  opts.max_iter = cfg.newton_max_iter;
  opts.steps_per_unit = cfg.steps_per_unit;
  return opts;
}

const char* kind_name(sl::Candidate::Kind k) {
  switch (k) {
    case sl::Candidate::Kind::Minimum: return "minimum";
    case sl::Candidate::Kind::Maximum: return "maximum";
    case sl::Candidate::Kind::Saddle: return "saddle";
    default: return "flat";
  }
}

// ---------------------------------------------------------------- groundstate

int run_groundstate(const CommonArgs& args) {
  Setup s = make_setup(args);
  sl::ProblemParams params = s.cfg.problem();
  sl::RadialGrid grid = sl::make_radial_grid(params.n, s.cfg.m, s.cfg.R);
  note(args, fmt::format("solving canonical branch on m = {}, R = {}", s.cfg.m, s.cfg.R));
  sl::GroundState gs = sl::solve_canonical(grid, params, solver_options(s.cfg));

  int pr = s.cfg.precision;
  sl::CsvDoc profile;
  profile.meta = common_meta(s, "groundstate");
  profile.columns = {"r", "u", "v"};
  for (std::size_t i = 0; i < grid.r.size(); ++i)
    profile.rows.push_back({sl::format_g(grid.r[i], pr), sl::format_g(gs.u[i], pr),
                            sl::format_g(gs.v[i], pr)});
  sl::write_csv_atomic(s.out / "groundstate_profile.csv", profile);

  sl::CsvDoc meta;
  meta.meta = common_meta(s, "groundstate");
  meta.columns = {"key", "value"};
  auto put = [&](const char* k, const std::string& v) { meta.rows.push_back({k, v}); };
  put("gamma", sl::format_g(gs.gamma, pr));
  put("theta", sl::format_g(gs.theta, pr));
  put("u0", sl::format_g(gs.u0, pr));
  put("v0", sl::format_g(gs.v0, pr));
  put("residual", sl::format_g(gs.residual, 3));
  put("newton_iters", fmt::format("{}", gs.iters));
  put("margin", sl::format_g(params.margin, pr));
  put("R", sl::format_g(grid.R, pr));
  put("m", fmt::format("{}", grid.m));
  put("tail_ok", gs.tail_ok ? "1" : "0");
  put("monotone", gs.monotone ? "1" : "0");
  sl::write_csv_atomic(s.out / "groundstate_meta.csv", meta);

  fmt::print("groundstate: gamma = {}  u0 = {}  v0 = {}  theta = {}\n",
             sl::format_g(gs.gamma, pr), sl::format_g(gs.u0, pr), sl::format_g(gs.v0, pr),
             sl::format_g(gs.theta, 6));
  fmt::print("groundstate: residual = {}  iters = {}  tail_ok = {}  monotone = {}\n",
             sl::format_g(gs.residual, 3), gs.iters, gs.tail_ok, gs.monotone);
  fmt::print("wrote {} and {}\n", (s.out / "groundstate_profile.csv").string(),
             (s.out / "groundstate_meta.csv").string());
  return 0;
}

// ------------------------------------------------------------------ sigma-map

int run_sigma_map(const CommonArgs& args) {
  Setup s = make_setup(args);
  sl::ProblemParams params = s.cfg.problem();
  sl::PotentialTriple pot = s.cfg.potentials();
  sl::check_potential_bounds(pot, s.cfg.box, std::min(s.cfg.samples, 101));
  sl::RadialGrid grid = sl::make_radial_grid(params.n, s.cfg.m, s.cfg.R);
  note(args, "solving canonical branch");
  sl::Landscape ls(params, pot, grid, solver_options(s.cfg));

  const int dim = params.n;
  const int mp = s.cfg.map_points;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(mp);

  auto point_at = [&](std::size_t flat) {
    sl::Vec3 z{0.0, 0.0, 0.0};
    std::size_t rest = flat;
    for (int d = dim - 1; d >= 0; --d) {
      auto dd = static_cast<std::size_t>(d);
      std::size_t i = rest % static_cast<std::size_t>(mp);
      rest /= static_cast<std::size_t>(mp);
      z[dd] = s.cfg.box.lo[dd] +
              (s.cfg.box.hi[dd] - s.cfg.box.lo[dd]) * static_cast<double>(i) /
                  static_cast<double>(mp - 1);
    }
    return z;
  };

  struct DirectRow {
    std::size_t flat;
    double sigma;
    sl::Vec3 grad;
  };
  std::vector<std::size_t> direct_idx;
  if (s.cfg.validate_stride > 0)
    for (std::size_t f = 0; f < total; f += static_cast<std::size_t>(s.cfg.validate_stride))
      direct_idx.push_back(f);
  std::vector<DirectRow> direct_rows(direct_idx.size());

  if (!direct_idx.empty()) {
    note(args, fmt::format("direct validation at {} points on {} threads", direct_idx.size(),
                           args.jobs));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t k = next.fetch_add(1);
        if (k >= direct_idx.size()) return;
        sl::Vec3 z = point_at(direct_idx[k]);
        double K, Q, V;
        ls.coefficients_at(z, K, Q, V);
        sl::GroundState local =
            sl::solve_scaled(grid, params, K, Q, V, ls.canonical(), solver_options(s.cfg));
        direct_rows[k] = {direct_idx[k], local.gamma,
                          ls.grad_sigma_formula(z, local.u, local.v)};
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < args.jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int pr = s.cfg.precision;
  sl::CsvDoc doc;
  doc.meta = common_meta(s, "sigma-map");
  doc.columns = {};
  for (int d = 0; d < dim; ++d) doc.columns.push_back(fmt::format("z{}", d + 1));
  doc.columns.push_back("sigma");
  for (int d = 0; d < dim; ++d) doc.columns.push_back(fmt::format("dsigma_dz{}", d + 1));
  doc.columns.push_back("nonsmooth");
  doc.columns.push_back("method");

  double worst = 0.0;
  std::size_t di = 0;
  for (std::size_t f = 0; f < total; ++f) {
    sl::Vec3 z = point_at(f);
    double sigma = ls.sigma_at(z);
    sl::SigmaGrad sg = ls.grad_sigma_at(z);
    std::vector<std::string> row;
    for (int d = 0; d < dim; ++d) row.push_back(sl::format_g(z[static_cast<std::size_t>(d)], pr));
    row.push_back(sl::format_g(sigma, pr));
    for (int d = 0; d < dim; ++d)
      row.push_back(sl::format_g(sg.g[static_cast<std::size_t>(d)], pr));
    row.push_back(sg.nonsmooth ? "1" : "0");
    row.push_back("scaling");
    doc.rows.push_back(std::move(row));
    if (di < direct_idx.size() && direct_idx[di] == f) {
      const DirectRow& dr = direct_rows[di];
      std::vector<std::string> drow;
      for (int d = 0; d < dim; ++d)
        drow.push_back(sl::format_g(z[static_cast<std::size_t>(d)], pr));
      drow.push_back(sl::format_g(dr.sigma, pr));
      for (int d = 0; d < dim; ++d)
        drow.push_back(sl::format_g(dr.grad[static_cast<std::size_t>(d)], pr));
      drow.push_back("0");
      drow.push_back("direct");
      doc.rows.push_back(std::move(drow));
      worst = std::max(worst, std::fabs(dr.sigma - sigma) / std::fabs(sigma));
      ++di;
    }
  }
  sl::write_csv_atomic(s.out / "sigma_map.csv", doc);
  fmt::print("sigma-map: {} points ({} with direct validation) -> {}\n", total,
             direct_idx.size(), (s.out / "sigma_map.csv").string());
  if (!direct_idx.empty()) {
    fmt::print("sigma-map: max relative deviation scaling vs direct = {}\n",
               sl::format_g(worst, 3));
    if (worst > 1e-5) {
      fmt::print("sigma-map: FAIL deviation above 1e-5\n");
      return 4;
    }
  }
  return 0;
}

// --------------------------------------------------------------------- locate

int run_locate(const CommonArgs& args) {
  Setup s = make_setup(args);
  sl::ProblemParams params = s.cfg.problem();
  sl::PotentialTriple pot = s.cfg.potentials();
  sl::check_potential_bounds(pot, s.cfg.box, std::min(s.cfg.samples, 101));
  sl::RadialGrid grid = sl::make_radial_grid(params.n, s.cfg.m, s.cfg.R);
  note(args, "solving canonical branch");
  sl::Landscape ls(params, pot, grid, solver_options(s.cfg));
  sl::CandidateSearch search =
      sl::find_spike_candidates(ls, s.cfg.box, s.cfg.multistart, s.seed);

  int pr = s.cfg.precision;
  sl::CsvDoc doc;
  doc.meta = common_meta(s, "locate");
  doc.meta.emplace_back("degenerate", search.degenerate ? "1" : "0");
  const int dim = params.n;
  for (int d = 0; d < dim; ++d) doc.columns.push_back(fmt::format("z{}", d + 1));
  doc.columns.push_back("sigma");
  doc.columns.push_back("grad_norm");
  doc.columns.push_back("kind");
  for (const sl::Candidate& c : search.candidates) {
    std::vector<std::string> row;
    for (int d = 0; d < dim; ++d)
      row.push_back(sl::format_g(c.z[static_cast<std::size_t>(d)], pr));
    row.push_back(sl::format_g(c.sigma, pr));
    row.push_back(sl::format_g(c.grad_norm, 3));
    row.push_back(kind_name(c.kind));
    doc.rows.push_back(std::move(row));
  }
  sl::write_csv_atomic(s.out / "locate.csv", doc);

  if (search.degenerate) {
    fmt::print("locate: landscape is flat over the box; no isolated candidates\n");
  } else {
    fmt::print("locate: {} stationary points\n", search.candidates.size());
    for (const sl::Candidate& c : search.candidates) {
      std::string zs;
      for (int d = 0; d < dim; ++d) {
        if (d) zs += ", ";
        zs += sl::format_g(c.z[static_cast<std::size_t>(d)], 6);
      }
      fmt::print("  z = ({})  sigma = {}  |grad| = {}  {}\n", zs, sl::format_g(c.sigma, 9),
                 sl::format_g(c.grad_norm, 3), kind_name(c.kind));
    }
  }
  fmt::print("wrote {}\n", (s.out / "locate.csv").string());
  return 0;
}

// -------------------------------------------------------------- epsilon-sweep

int run_epsilon_sweep(const CommonArgs& args) {
  Setup s = make_setup(args);
  sl::ProblemParams params = s.cfg.problem();
  sl::PotentialTriple pot = s.cfg.potentials();
  sl::RadialGrid grid = sl::make_radial_grid(params.n, s.cfg.m, s.cfg.R);
  note(args, "solving canonical branch");
  sl::Landscape ls(params, pot, grid, solver_options(s.cfg));

  sl::SweepOptions sopts;
  sopts.solve.L = s.cfg.L;
  sopts.solve.mesh_factor = s.cfg.mesh_factor;
  sopts.solve.newton = solver_options(s.cfg);
  sopts.solve.relax_budget = s.cfg.relax_budget;
  sopts.peak_tol = s.cfg.peak_tol;
  sopts.gap_tol = s.cfg.gap_tol;
  sopts.jitter = s.cfg.jitter;
  sopts.multistarts = s.cfg.multistart;
  sopts.seed = s.seed;

  note(args, fmt::format("ladder of {} eps values from {}", s.cfg.epsilons.size(),
                         s.cfg.epsilons.front()));
  sl::SweepResult res = sl::epsilon_sweep(ls, s.cfg.epsilons, s.cfg.init_center, sopts);

  int pr = s.cfg.precision;
  for (const sl::PerturbedRun& run : res.runs) {
    sl::CsvDoc doc;
    doc.meta = common_meta(s, "epsilon-sweep");
    doc.meta.emplace_back("eps", sl::format_g(run.eps, 9));
    doc.columns = {"x", "u", "v"};
    for (std::size_t i = 0; i < run.mesh.x.size(); ++i)
      doc.rows.push_back({sl::format_g(run.mesh.x[i], pr), sl::format_g(run.u[i], pr),
                          sl::format_g(run.v[i], pr)});
    sl::write_csv_atomic(s.out / "runs" / fmt::format("eps_{}.csv", sl::format_g(run.eps, 9)),
                         doc);
  }

  sl::CsvDoc summary;
  summary.meta = common_meta(s, "epsilon-sweep");
  summary.meta.emplace_back("target_x", sl::format_g(res.verdict.target_x, pr));
  summary.meta.emplace_back("sigma_ref", sl::format_g(res.verdict.sigma_ref, pr));
  summary.meta.emplace_back("landscape_degenerate", res.landscape_degenerate ? "1" : "0");
  summary.columns = {"eps",     "peak_x",      "peak_height", "energy",       "peak_dist",
                     "gap_rel", "ps_residual", "ps_rel",      "newton_iters", "relax_sweeps",
                     "residual"};
  for (const sl::PerturbedRun& run : res.runs) {
    double dist = std::fabs(run.peak_x - res.verdict.target_x);
    double gap = std::fabs(run.energy - res.verdict.sigma_ref) / std::fabs(res.verdict.sigma_ref);
    double ps_rel = run.ps_scale > 0.0
                        ? std::fabs(run.ps_residual) / run.ps_scale
                        : (run.ps_residual == 0.0 ? 0.0 : INFINITY);
    summary.rows.push_back(
        {sl::format_g(run.eps, 9), sl::format_g(run.peak_x, pr),
         sl::format_g(run.peak_height, pr), sl::format_g(run.energy, pr),
         sl::format_g(dist, 3), sl::format_g(gap, 3), sl::format_g(run.ps_residual, 3),
         sl::format_g(ps_rel, 3), fmt::format("{}", run.newton_iters),
         fmt::format("{}", run.relax_sweeps), sl::format_g(run.residual, 3)});
  }
  sl::write_csv_atomic(s.out / "sweep_summary.csv", summary);

  fmt::print("epsilon-sweep: target z* = {}  sigma(z*) = {}{}\n",
             sl::format_g(res.verdict.target_x, 9), sl::format_g(res.verdict.sigma_ref, 9),
             res.landscape_degenerate ? "  (flat landscape, target = init)" : "");
  for (const sl::PerturbedRun& run : res.runs)
    fmt::print("  eps = {:<6} peak = {:<14} energy = {:<14} iters = {}+{}\n",
               sl::format_g(run.eps, 4), sl::format_g(run.peak_x, 9),
               sl::format_g(run.energy, 9), run.newton_iters, run.relax_sweeps);
  fmt::print("verdict: peak {} (dist = {})  gap {} (rel = {})  trends {}\n",
             res.verdict.peak_ok ? "PASS" : "FAIL", sl::format_g(res.verdict.final_peak_dist, 3),
             res.verdict.gap_ok ? "PASS" : "FAIL", sl::format_g(res.verdict.final_gap, 3),
             res.verdict.peaks_monotone && res.verdict.gaps_monotone ? "PASS" : "FAIL");
  fmt::print("wrote {}\n", (s.out / "sweep_summary.csv").string());
  return res.verdict.pass() ? 0 : 4;
}

// ---------------------------------------------------------------------- check

int run_check(const CommonArgs& args) {
  Setup s = make_setup(args);
  struct Line {
    std::string name;
    double measured;
    double tol;
    bool pass;
  };
  std::vector<Line> lines;
  auto gate = [&](const std::string& name, double measured, double tol) {
    lines.push_back({name, measured, tol, std::fabs(measured) <= tol});
  };

  sl::ProblemParams params = s.cfg.problem();
  sl::PotentialTriple pot = s.cfg.potentials();
  sl::BoundsReport bounds = sl::check_potential_bounds(pot, s.cfg.box, std::min(s.cfg.samples, 101));
  fmt::print("margin = {}  K in [{}, {}]  Q in [{}, {}]  V in [{}, {}]\n",
             sl::format_g(params.margin, 6), sl::format_g(bounds.kmin, 6),
             sl::format_g(bounds.kmax, 6), sl::format_g(bounds.qmin, 6),
             sl::format_g(bounds.qmax, 6), sl::format_g(bounds.vmin, 6),
             sl::format_g(bounds.vmax, 6));

  sl::RadialGrid grid = sl::make_radial_grid(params.n, s.cfg.m, s.cfg.R);
  note(args, "solving canonical branch");
  sl::SolverOptions sopts = solver_options(s.cfg);
  sl::Landscape ls(params, pot, grid, sopts);
  const sl::GroundState& gs = ls.canonical();

  gate("newton_residual", gs.residual, 1e-8);
  gate("tail_ok", gs.tail_ok ? 0.0 : 1.0, 0.5);
  gate("monotone_profiles", gs.monotone ? 0.0 : 1.0, 0.5);

  // energy identity: direct functional vs dual functional at the transform
  sl::DualPair eta = sl::dual_transform(gs.u, gs.v, 1.0, 1.0, params.p, params.q);
  double ident = std::fabs(gs.gamma - sl::dual_energy(grid, eta, 1.0, 1.0, params.p, params.q)) /
                 std::fabs(gs.gamma);
  gate("energy_identity_rel", ident, 1e-8);
  double centered = sl::direct_energy_centered(grid, gs.u, gs.v, 1.0, 1.0, 1.0, params.p,
                                               params.q);
  fmt::print("mesh diagnostic: centered-difference energy offset = {}\n",
             sl::format_g((centered - gs.gamma) / std::fabs(gs.gamma), 3));

  gate("nehari_time_minus_1", sl::nehari_time(grid, eta, 1.0, 1.0, params.p, params.q) - 1.0,
       1e-8);
  {
    double lam = 2.0;
    sl::DualPair scaled{eta.eta1, eta.eta2};
    for (double& x : scaled.eta1) x *= lam;
    for (double& x : scaled.eta2) x *= lam;
    double t0 = sl::nehari_time(grid, eta, 1.0, 1.0, params.p, params.q);
    double t1 = sl::nehari_time(grid, scaled, 1.0, 1.0, params.p, params.q);
    gate("fiber_scaling_rel", t1 * lam / t0 - 1.0, 1e-10);
  }

  // scaling identity vs direct re-solve at interior sample points
  {
    double worst = 0.0;
    bool any = false;
    for (double frac : {0.35, 0.5, 0.65}) {
      sl::Vec3 z{0.0, 0.0, 0.0};
      for (int d = 0; d < params.n; ++d) {
        auto dd = static_cast<std::size_t>(d);
        z[dd] = s.cfg.box.lo[dd] + frac * (s.cfg.box.hi[dd] - s.cfg.box.lo[dd]);
      }
      double sig = ls.sigma_at(z);
      double direct = ls.sigma_direct(z);
      worst = std::max(worst, std::fabs(direct - sig) / std::fabs(sig));
      any = true;
    }
    if (any) gate("sigma_scaling_vs_direct_rel", worst, 1e-5);
  }

  // representation-formula gradient vs centered differences of sigma_at
  {
    sl::Vec3 z{0.0, 0.0, 0.0};
    for (int d = 0; d < params.n; ++d) {
      auto dd = static_cast<std::size_t>(d);
      z[dd] = s.cfg.box.lo[dd] + 0.6 * (s.cfg.box.hi[dd] - s.cfg.box.lo[dd]);
    }
    if (!ls.grad_sigma_at(z).nonsmooth) {
      auto [u, v] = ls.local_profile(z);
      sl::Vec3 g = ls.grad_sigma_formula(z, u, v);
      double worst = 0.0, scale = 0.0;
      for (int d = 0; d < params.n; ++d) {
        auto dd = static_cast<std::size_t>(d);
        double hstep = 1e-5 * (s.cfg.box.hi[dd] - s.cfg.box.lo[dd]);
        sl::Vec3 zp = z, zm = z;
        zp[dd] += hstep;
        zm[dd] -= hstep;
        double fd = (ls.sigma_at(zp) - ls.sigma_at(zm)) / (2.0 * hstep);
        worst = std::max(worst, std::fabs(g[dd] - fd));
        scale = std::max(scale, std::fabs(fd));
      }
      gate("grad_formula_vs_fd_rel", scale > 0.0 ? worst / scale : worst, 1e-6);
    }
  }

  // fiber maps stay unimodal on seeded dual pairs
  {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    bool ok = true;
    for (int trial = 0; trial < 3; ++trial) {
      double a = unif(rng), b = unif(rng), w = unif(rng);
      std::vector<double> e1(grid.r.size()), e2(grid.r.size());
      for (std::size_t i = 0; i < grid.r.size(); ++i) {
        double bump = std::exp(-w * grid.r[i] * grid.r[i]);
        e1[i] = a * bump;
        e2[i] = b * bump;
      }
      sl::DualPair pair{std::move(e1), std::move(e2)};
      sl::FiberScalars fs =
          sl::fiber_scalars(grid, pair, 1.0, 1.0, params.p, params.q);
      if (!(fs.s > 0.0)) continue;
      double t = sl::nehari_time(grid, pair, 1.0, 1.0, params.p, params.q);
      double at_root = sl::fiber_value(fs, params.p, params.q, t);
      ok = ok && at_root >= sl::fiber_value(fs, params.p, params.q, 0.5 * t) &&
           at_root >= sl::fiber_value(fs, params.p, params.q, 2.0 * t);
    }
    gate("fiber_unimodal", ok ? 0.0 : 1.0, 0.5);
  }

  if (params.n == 1) {
    note(args, "single perturbed solve for the balance check");
    sl::PerturbOptions popts;
    popts.L = s.cfg.L;
    popts.mesh_factor = std::min(s.cfg.mesh_factor, 10.0);
    popts.newton = sopts;
    popts.relax_budget = s.cfg.relax_budget;
    sl::PerturbedRun run =
        sl::solve_perturbed(ls, s.cfg.epsilons.front(), s.cfg.init_center, popts);
    double ps_rel = run.ps_scale > 0.0 ? std::fabs(run.ps_residual) / run.ps_scale
                                       : std::fabs(run.ps_residual);
    gate("balance_residual_rel", ps_rel, 1e-6);
  }

  sl::CsvDoc doc;
  doc.meta = common_meta(s, "check");
  doc.columns = {"name", "measured", "tolerance", "pass"};
  bool all = true;
  for (const Line& ln : lines) {
    doc.rows.push_back({ln.name, sl::format_g(ln.measured, 6), sl::format_g(ln.tol, 3),
                        ln.pass ? "1" : "0"});
    all = all && ln.pass;
  }
  sl::write_csv_atomic(s.out / "check_report.csv", doc);

  for (const Line& ln : lines)
    fmt::print("{:<32} {:>14}  tol {:>8}  {}\n", ln.name, sl::format_g(ln.measured, 6),
               sl::format_g(ln.tol, 3), ln.pass ? "PASS" : "FAIL");
  fmt::print("check: {}\n", all ? "PASS" : "FAIL");
  return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spike concentration toolkit for weakly coupled elliptic systems"};
  app.set_version_flag("--version", sl::kVersion);
  app.require_subcommand(1);

  CommonArgs gs_args, map_args, loc_args, sweep_args, check_args;
  CLI::App* cmd_gs = app.add_subcommand("groundstate", "canonical ground-state branch");
  add_common(cmd_gs, gs_args);
  CLI::App* cmd_map = app.add_subcommand("sigma-map", "ground-energy landscape over the box");
  add_common(cmd_map, map_args);
  CLI::App* cmd_loc = app.add_subcommand("locate", "stationary points of the landscape");
  add_common(cmd_loc, loc_args);
  CLI::App* cmd_sweep =
      app.add_subcommand("epsilon-sweep", "perturbed solves along a descending eps ladder");
  add_common(cmd_sweep, sweep_args);
  CLI::App* cmd_check = app.add_subcommand("check", "internal consistency suite");
  add_common(cmd_check, check_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_gs) return run_groundstate(gs_args);
    if (*cmd_map) return run_sigma_map(map_args);
    if (*cmd_loc) return run_locate(loc_args);
    if (*cmd_sweep) return run_epsilon_sweep(sweep_args);
    if (*cmd_check) return run_check(check_args);
  } catch (const sl::DivergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const sl::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const sl::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 2;
}
