// Run configuration: INI-style file with sections problem, potentials,
// grids, solver, sweep, output. Unknown sections or keys are rejected so
// typos fail loudly. The canonical serialization (sorted keys, full
// precision) feeds a stable 64-bit hash that output files embed, tying
// every artifact to the exact configuration that produced it.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeloc/model.hpp"

namespace spikeloc {

struct RunConfig {
  // [problem]
  int n = 1;
  double p = 3.0, q = 3.0;

  // [potentials]
  std::string K = "1", Q = "1", V = "1";
  Box box;             // defaults to [-5, 5]^n
  int samples = 201;   // per axis, for the bounds check

  // [grids]
  double R = 20.0;     // n = 1 default; 15 for n >= 2 unless set
  int m = 4001;        // n = 1 default; 3001 for n >= 2 unless set
  double L = 8.0;
  double mesh_factor = 20.0;
  int map_points = 101;
  int validate_stride = 0;  // 0 disables direct re-solves in sigma-map

  // [solver]
  double newton_tol = 1e-10;
  int newton_max_iter = 80;
  int relax_budget = 1000;
  int steps_per_unit = 10;
  int multistart = 32;
  std::uint64_t seed = 12345;

  // [sweep]
  std::vector<double> epsilons{0.4, 0.3, 0.2, 0.1, 0.05};
  double init_center = 0.3;
  double peak_tol = 0.05;
  double gap_tol = 0.01;
  double jitter = 0.10;

  // [output]
  std::string out_dir = "out";
  int precision = 9;

  static RunConfig load(const std::string& path);
  static RunConfig parse_text(std::string_view text, std::string_view origin);

  // Sorted full-precision dump; identical configurations hash identically
  // regardless of key order in the file.
  std::string canonical() const;
  std::uint64_t hash() const;

  ProblemParams problem() const;      // validated exponent data
  PotentialTriple potentials() const; // parsed coefficient fields
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace spikeloc
