#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spikeloc/errors.hpp"
#include "spikeloc/radial.hpp"

using namespace spikeloc;

TEST_SUITE("radialkernel") {

TEST_CASE("grid layout") {
  RadialGrid g = make_radial_grid(1, 1501, 15.0);
  CHECK(g.r.size() == 1501);
  CHECK(g.r.front() == 0.0);
  CHECK(g.r.back() == 15.0);
  CHECK(std::fabs(g.h - 0.01) < 1e-15);
  CHECK_THROWS_AS(make_radial_grid(1, 8, 15.0), GridTooCoarse);
  CHECK_THROWS_AS(make_radial_grid(4, 1501, 15.0), ValidationError);
  CHECK_THROWS_AS(make_radial_grid(1, 1501, -1.0), ValidationError);
}

TEST_CASE("quadrature integrates sech^2 on the line") {
  RadialGrid g = make_radial_grid(1, 2001, 20.0);
  std::vector<double> f(g.r.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = 1.0 / std::cosh(g.r[i]);
    f[i] = 2.0 * s * s;  // even extension accounted by the weight
  }
  // integral over the whole line of 2 sech^2 = 4 tanh(inf) = 4; radial
  // weight sigma_0 = 2 doubles the half-line integral
  CHECK(std::fabs(quad_radial(g, f) - 4.0) < 1e-8);
}

TEST_CASE("quadrature integrates a gaussian in three dimensions") {
  RadialGrid g = make_radial_grid(3, 3001, 15.0);
  std::vector<double> f(g.r.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g.r[i] * g.r[i]);
  double exact = std::pow(std::numbers::pi, 1.5);
  CHECK(std::fabs(quad_radial(g, f) - exact) < 1e-7);
}

TEST_CASE("quadrature in the plane") {
  RadialGrid g = make_radial_grid(2, 2001, 15.0);
  std::vector<double> f(g.r.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g.r[i] * g.r[i]);
  CHECK(std::fabs(quad_radial(g, f) - std::numbers::pi) < 1e-8);
}

TEST_CASE("laplacian is exact on quadratics") {
  for (int n : {1, 2, 3}) {
    RadialGrid g = make_radial_grid(n, 501, 10.0);
    std::vector<double> f(g.r.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = g.r[i] * g.r[i];
    std::vector<double> lap = radial_laplacian(g, f);
    for (std::size_t i = 0; i < lap.size(); ++i) {
      CAPTURE(n);
      CAPTURE(i);
      CHECK(std::fabs(lap[i] - 2.0 * n) < 1e-9);
    }
  }
}

TEST_CASE("helmholtz solve reproduces the soliton resolvent") {
  // -w'' + w = 2 sech^3(r) has the decaying even solution w = sech(r)
  RadialGrid g = make_radial_grid(1, 4001, 20.0);
  std::vector<double> rhs(g.r.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    double s = 1.0 / std::cosh(g.r[i]);
    rhs[i] = 2.0 * s * s * s;
  }
  HelmholtzOp op(g, 1.0);
  std::vector<double> w = op.solve(rhs);
  double werr = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    werr = std::max(werr, std::fabs(w[i] - 1.0 / std::cosh(g.r[i])));
  CHECK(werr < 5e-6);
  CHECK(std::fabs(w[0] - 1.0) < 5e-6);
}

TEST_CASE("apply is the inverse of solve") {
  RadialGrid g = make_radial_grid(3, 1001, 12.0);
  HelmholtzOp op(g, 2.0);
  std::vector<double> rhs(g.r.size());
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = std::exp(-0.5 * g.r[i] * g.r[i]) * (1.0 + 0.3 * g.r[i]);
  std::vector<double> w = op.solve(rhs);
  std::vector<double> back = op.apply(w);
  double err = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i)
    err = std::max(err, std::fabs(back[i] - rhs[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("solver rejects mismatched sizes") {
  RadialGrid g = make_radial_grid(1, 501, 10.0);
  HelmholtzOp op(g);
  std::vector<double> rhs(500, 1.0);
  CHECK_THROWS_AS(op.solve(rhs), ValidationError);
}

TEST_CASE("tail flag distinguishes decayed from truncated profiles") {
  RadialGrid g = make_radial_grid(1, 2001, 20.0);
  std::vector<double> decayed(g.r.size()), fat(g.r.size());
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    decayed[i] = 1.0 / std::cosh(g.r[i]);
    fat[i] = 1.0 / (1.0 + g.r[i]);
  }
  CHECK(tail_decayed(decayed));
  CHECK_FALSE(tail_decayed(fat));
}

}  // TEST_SUITE
