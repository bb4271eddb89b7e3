#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikeloc/errors.hpp"
#include "spikeloc/groundstate.hpp"
#include "testutil.hpp"

using namespace spikeloc;

TEST_SUITE("groundstate") {

TEST_CASE("scalar branch matches the soliton family") {
  const RadialGrid& g = testutil::grid_1d();
  // p = 3: sqrt(2) sech r;  p = 2: (3/2) sech^2(r/2)
  std::vector<double> w3 = scalar_ground_state(g, 3.0);
  CHECK(std::fabs(w3[0] - std::sqrt(2.0)) < 2e-5);
  std::vector<double> w2 = scalar_ground_state(g, 2.0);
  CHECK(std::fabs(w2[0] - 1.5) < 2e-5);
  double s = 1.0 / std::cosh(0.5 * g.r[400]);
  CHECK(std::fabs(w2[400] - 1.5 * s * s) < 2e-5);
}

TEST_CASE("symmetric canonical branch reproduces the closed form") {
  const GroundState& gs = testutil::canonical_33();
  CHECK(std::fabs(gs.u0 - std::sqrt(2.0)) < 2e-5);
  CHECK(std::fabs(gs.v0 - std::sqrt(2.0)) < 2e-5);
  CHECK(std::fabs(gs.gamma - 8.0 / 3.0) < 5e-5);
  CHECK(gs.tail_ok);
  CHECK(gs.monotone);
  CHECK(gs.residual < 1e-8);
  double uverr = 0.0;
  for (std::size_t i = 0; i < gs.u.size(); ++i)
    uverr = std::max(uverr, std::fabs(gs.u[i] - gs.v[i]));
  CHECK(uverr < 1e-12);  // p = q forces u = v
}

TEST_CASE("decay rate matches the mass") {
  const RadialGrid& g = testutil::grid_1d();
  const GroundState& gs = testutil::canonical_33();
  double theta = estimate_decay_rate(g, gs.u, gs.v, 7.5, 11.0);
  CHECK(std::fabs(theta - 1.0) < 1e-3);
  CHECK(std::fabs(gs.theta - 1.0) < 1e-3);
}

TEST_CASE("three dimensional branch matches the shooting value") {
  RadialGrid g = make_radial_grid(3, 3001, 15.0);
  GroundState gs = solve_canonical(g, validate_params(3, 3.0, 3.0));
  // center height bracketed by a shooting dichotomy on the radial ODE
  CHECK(std::fabs(gs.u0 - 4.33766335) < 1e-3);
  CHECK(gs.monotone);
  CHECK(gs.tail_ok);
}

TEST_CASE("asymmetric exponents reach the target by continuation") {
  const RadialGrid& g = testutil::grid_1d();
  GroundState gs = solve_canonical(g, validate_params(1, 3.0, 2.0));
  CHECK(gs.p == 3.0);
  CHECK(gs.q == 2.0);
  CHECK(gs.residual < 1e-8);
  CHECK(gs.monotone);
  CHECK(gs.u0 > 1.0);
  CHECK(gs.v0 > 1.0);
  double uverr = 0.0;
  for (std::size_t i = 0; i < gs.u.size(); ++i)
    uverr = std::max(uverr, std::fabs(gs.u[i] - gs.v[i]));
  CHECK(uverr > 1e-3);  // p != q separates the components
}

TEST_CASE("local scaling factors at a reference triple") {
  ProblemParams params = validate_params(1, 3.0, 3.0);
  LocalScaling sc = local_scaling(params, 2.0, 0.5, 1.0);
  CHECK(sc.mu == 1.0);
  CHECK(std::fabs(sc.w1 - std::pow(2.0, 0.25)) < 1e-14);
  CHECK(std::fabs(sc.w2 - std::pow(2.0, -0.25)) < 1e-14);
  LocalScaling sc4 = local_scaling(params, 1.0, 1.0, 4.0);
  CHECK(sc4.mu == 2.0);
}

TEST_CASE("rescaled branch solves the scaled system exactly when V is one") {
  const RadialGrid& g = testutil::grid_1d();
  const GroundState& canon = testutil::canonical_33();
  ProblemParams params = validate_params(1, 3.0, 3.0);
  GroundState gs = solve_scaled(g, params, 2.0, 0.5, 1.0, canon);
  LocalScaling sc = local_scaling(params, 2.0, 0.5, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < gs.u.size(); ++i)
    err = std::max(err, std::fabs(gs.u[i] - sc.w1 * canon.u[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("rescaled branch with dilation converges near the prediction") {
  const RadialGrid& g = testutil::grid_1d();
  const GroundState& canon = testutil::canonical_33();
  ProblemParams params = validate_params(1, 3.0, 3.0);
  GroundState gs = solve_scaled(g, params, 1.0, 1.0, 4.0, canon);
  // amplitude prediction w1 = V^{(q+1)/(pq-1)} = 4^{1/2} = 2 at the center
  CHECK(std::fabs(gs.u0 - 2.0 * canon.u0) < 1e-3);
  CHECK(gs.residual < 1e-8);
  CHECK(gs.monotone);
}

TEST_CASE("identity triple returns the canonical branch") {
  const RadialGrid& g = testutil::grid_1d();
  const GroundState& canon = testutil::canonical_33();
  ProblemParams params = validate_params(1, 3.0, 3.0);
  GroundState gs = solve_scaled(g, params, 1.0, 1.0, 1.0, canon);
  double err = 0.0;
  for (std::size_t i = 0; i < gs.u.size(); ++i)
    err = std::max(err, std::fabs(gs.u[i] - canon.u[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("decay window validation") {
  const RadialGrid& g = testutil::grid_1d();
  const GroundState& gs = testutil::canonical_33();
  CHECK_THROWS_AS(estimate_decay_rate(g, gs.u, gs.v, 7.5, 7.52), WindowTooCoarse);
  std::vector<double> noise(g.r.size());
  for (std::size_t i = 0; i < noise.size(); ++i)
    noise[i] = (i % 2 == 0) ? 1.0 : 1e-6;
  CHECK_THROWS_AS(estimate_decay_rate(g, noise, noise, 7.5, 11.0), WindowTooNoisy);
}

}  // TEST_SUITE
