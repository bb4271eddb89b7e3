// Shared fixtures: solves are cached per process so the suite stays fast.
#pragma once

#include "spikeloc/groundstate.hpp"
#include "spikeloc/radial.hpp"

namespace testutil {

inline const spikeloc::RadialGrid& grid_1d() {
  static const spikeloc::RadialGrid g = spikeloc::make_radial_grid(1, 1501, 15.0);
  return g;
}

inline const spikeloc::RadialGrid& grid_3d() {
  static const spikeloc::RadialGrid g = spikeloc::make_radial_grid(3, 1501, 15.0);
  return g;
}

// n = 1, p = q = 3 canonical branch on grid_1d.
inline const spikeloc::GroundState& canonical_33() {
  static const spikeloc::GroundState gs = spikeloc::solve_canonical(
      grid_1d(), spikeloc::validate_params(1, 3.0, 3.0));
  return gs;
}

}  // namespace testutil
