#include "spikeloc/model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "spikeloc/errors.hpp"

namespace spikeloc {

ProblemParams validate_params(int n, double p, double q) {
  if (n < 1 || n > 3)
    throw BadDimension(fmt::format("model.validate_params: n = {} not in 1..3", n));
  if (!(p > 1.0))
    throw ExponentTooSmall(fmt::format("model.validate_params: p = {} must exceed 1", p));
  if (!(q > 1.0))
    throw ExponentTooSmall(fmt::format("model.validate_params: q = {} must exceed 1", q));
  double a = 1.0 / (p + 1.0);
  double b = 1.0 / (q + 1.0);
  double c = static_cast<double>(n - 2) / static_cast<double>(n);
  double margin = a + b - c;
  // Equality sits on the critical hyperbola and is rejected. The computed
  // margin of an exactly-critical pair can land on either side of zero by
  // a few ulp, so reject anything below the roundoff of the three terms.
  double fuzz = 4.0 * std::numeric_limits<double>::epsilon() *
                (std::fabs(a) + std::fabs(b) + std::fabs(c));
  if (margin <= fuzz)
    throw SupercriticalPair(fmt::format(
        "model.validate_params: (p, q) = ({}, {}) not subcritical for n = {} (margin = {:.3e})",
        p, q, n, margin));
  return ProblemParams{n, p, q, margin};
}

PotentialTriple PotentialTriple::parse(std::string_view k, std::string_view q,
                                       std::string_view v, int dim) {
  return PotentialTriple{Expr::parse(k, dim), Expr::parse(q, dim), Expr::parse(v, dim), dim};
}

BoundsReport check_potential_bounds(const PotentialTriple& pot, const Box& box,
                                    int samples_per_axis) {
  if (samples_per_axis < 2)
    throw ValidationError(fmt::format(
        "model.check_potential_bounds: samples_per_axis = {} must be at least 2",
        samples_per_axis));
  if (box.dim != pot.dim)
    throw BadDimension(fmt::format(
        "model.check_potential_bounds: box dimension {} vs potential dimension {}", box.dim,
        pot.dim));

  BoundsReport rep{};
  rep.kmin = rep.qmin = rep.vmin = std::numeric_limits<double>::infinity();
  rep.kmax = rep.qmax = rep.vmax = -std::numeric_limits<double>::infinity();
  rep.growth_coeff = 0.0;
  rep.any_nonsmooth = false;

  const int dim = box.dim;
  const int s = samples_per_axis;
  std::array<int, 3> counts{1, 1, 1};
  for (int d = 0; d < dim; ++d) counts[static_cast<std::size_t>(d)] = s;

  Vec3 z{0.0, 0.0, 0.0};
  for (int i = 0; i < counts[0]; ++i) {
    for (int j = 0; j < counts[1]; ++j) {
      for (int k = 0; k < counts[2]; ++k) {
        std::array<int, 3> idx{i, j, k};
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) {
          auto dd = static_cast<std::size_t>(d);
          z[dd] = box.lo[dd] +
                  (box.hi[dd] - box.lo[dd]) * idx[dd] / static_cast<double>(s - 1);
          r2 += z[dd] * z[dd];
        }
        double gauge = std::exp(std::sqrt(r2));

        struct Entry {
          const Expr* e;
          const char* name;
          double* mn;
          double* mx;
        };
        Entry entries[3] = {{&pot.K, "K", &rep.kmin, &rep.kmax},
                            {&pot.Q, "Q", &rep.qmin, &rep.qmax},
                            {&pot.V, "V", &rep.vmin, &rep.vmax}};
        for (auto& ent : entries) {
          double val = ent.e->eval(z);
          if (!(val > 0.0))
            throw NonpositivePotential(fmt::format(
                "model.check_potential_bounds: {} = {} at z = ({}, {}, {})", ent.name, val,
                z[0], z[1], z[2]));
          *ent.mn = std::min(*ent.mn, val);
          *ent.mx = std::max(*ent.mx, val);
          ExprGrad g = ent.e->grad(z);
          rep.any_nonsmooth = rep.any_nonsmooth || g.nonsmooth;
          double norm = std::sqrt(g.g[0] * g.g[0] + g.g[1] * g.g[1] + g.g[2] * g.g[2]);
          rep.growth_coeff = std::max(rep.growth_coeff, norm / gauge);
        }
      }
    }
  }
  return rep;
}

}  // namespace spikeloc
