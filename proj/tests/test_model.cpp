#include <doctest.h>

#include <cmath>

#include "spikeloc/errors.hpp"
#include "spikeloc/model.hpp"

using namespace spikeloc;

TEST_SUITE("model") {

TEST_CASE("subcriticality margins") {
  CHECK(std::fabs(validate_params(3, 3.0, 3.0).margin - 1.0 / 6.0) < 1e-15);
  CHECK(std::fabs(validate_params(1, 3.0, 3.0).margin - 1.5) < 1e-15);
  CHECK(std::fabs(validate_params(3, 3.0, 2.0).margin - 0.25) < 1e-15);
  CHECK(std::fabs(validate_params(2, 2.0, 2.0).margin - 2.0 / 3.0) < 1e-15);
}

TEST_CASE("critical and supercritical pairs are rejected") {
  CHECK_THROWS_AS(validate_params(3, 5.0, 5.0), SupercriticalPair);  // exactly critical
  CHECK_THROWS_AS(validate_params(3, 6.0, 6.0), SupercriticalPair);
  CHECK_THROWS_AS(validate_params(3, 5.0, 14.0), SupercriticalPair);
  CHECK_NOTHROW(validate_params(3, 4.9, 4.9));
  CHECK_NOTHROW(validate_params(1, 9.0, 9.0));  // no hyperbola below n = 2
}

TEST_CASE("exponents must be superlinear") {
  CHECK_THROWS_AS(validate_params(1, 1.0, 3.0), ExponentTooSmall);
  CHECK_THROWS_AS(validate_params(1, 3.0, 0.5), ExponentTooSmall);
  CHECK_THROWS_AS(validate_params(1, -2.0, 3.0), ExponentTooSmall);
}

TEST_CASE("dimension is bounded") {
  CHECK_THROWS_AS(validate_params(0, 3.0, 3.0), BadDimension);
  CHECK_THROWS_AS(validate_params(4, 3.0, 3.0), BadDimension);
}

TEST_CASE("potential triple parses with a shared dimension") {
  PotentialTriple pot = PotentialTriple::parse("1 + 0.5*exp(-x1^2)", "1", "1", 1);
  CHECK(pot.dim == 1);
  CHECK(std::fabs(pot.K.eval(Vec3{0.0, 0.0, 0.0}) - 1.5) < 1e-15);
  CHECK(pot.Q.eval(Vec3{2.0, 0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(PotentialTriple::parse("x2", "1", "1", 1), UnknownIdentifier);
}

TEST_CASE("bounds check reports extrema over the box") {
  PotentialTriple pot = PotentialTriple::parse("1 + 0.5*exp(-x1^2)", "2", "1", 1);
  Box box;
  box.dim = 1;
  box.lo[0] = -2.0;
  box.hi[0] = 2.0;
  BoundsReport rep = check_potential_bounds(pot, box, 81);
  CHECK(std::fabs(rep.kmax - 1.5) < 1e-12);           // lattice hits z = 0
  CHECK(rep.kmin > 1.0);
  CHECK(rep.kmin < 1.02);
  CHECK(rep.qmin == 2.0);
  CHECK(rep.qmax == 2.0);
  CHECK(rep.vmin == 1.0);
  CHECK_FALSE(rep.any_nonsmooth);
  CHECK(rep.growth_coeff < 1.0);
}

TEST_CASE("nonpositive coefficient names the offending point") {
  PotentialTriple pot = PotentialTriple::parse("x1", "1", "1", 1);
  Box box;
  box.dim = 1;
  box.lo[0] = -1.0;
  box.hi[0] = 1.0;
  CHECK_THROWS_AS(check_potential_bounds(pot, box, 21), NonpositivePotential);
}

TEST_CASE("kinked coefficients set the nonsmooth flag") {
  PotentialTriple pot = PotentialTriple::parse("1 + abs(x1)", "1", "1", 1);
  Box box;
  box.dim = 1;
  box.lo[0] = -1.0;
  box.hi[0] = 1.0;
  BoundsReport rep = check_potential_bounds(pot, box, 21);  // odd count hits the kink
  CHECK(rep.any_nonsmooth);
}

TEST_CASE("bounds check needs at least two samples per axis") {
  PotentialTriple pot = PotentialTriple::parse("1", "1", "1", 1);
  CHECK_THROWS_AS(check_potential_bounds(pot, Box{}, 1), ValidationError);
}

}  // TEST_SUITE
