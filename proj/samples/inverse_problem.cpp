// Builds a multiplier for a harmonic-map system from a conformal factor and
// checks it against the Helmholtz conditions, then breaks the fibre
// connection and watches the same checks fail.

#include <cmath>
#include <cstdio>

#include "geovar/geovar.hpp"

int main() {
  using namespace geovar;
  const DerivativeEngine e = DerivativeEngine::dual();

  const ChartDomain base({{-1, 1}, {-1, 1}}, "R2");
  const ChartDomain fibre({{0.3, 2.84}, {-1.2, 1.2}}, "S2 chart");

  // psi(x, y) = 0.2 + x - 0.3 y^2
  const ScalarField psi = catalog::quadratic_scalar(base, 0.2, {1.0, 0.0}, {0.0, -0.3});
  const SolutionFamily fam = construct_solution_family(e, psi, catalog::round_sphere_metric(fibre));
  const MappingProblem& p = fam.problem;

  const auto grid = condition_grid(p.base, p.fibre, 4, 1, 0.1);
  const ConstructionCheck c = multiplier_conditions(e, fam.multiplier, p, grid);
  std::printf("conditions on %zu grid points: hp21 %.2e  hp22 %.2e\n", c.points, c.hp21, c.hp22);

  const SourceForm form = dynamical_form(fam.multiplier, p);
  const VariationalityVerdict v = variationality_verdict(e, form, 50, 7, kHelmholtzToleranceDual);
  std::printf("helmholtz: %s, worst %.2e over %zu jets\n", v.pass ? "pass" : "fail", v.worst, v.samples);

  // Same multiplier, fibre connection shifted by a constant.
  MappingProblem broken = p;
  broken.gamma_n = with_constant_offset(p.gamma_n, 0, 0, 0, 0.1);
  const ConstructionCheck cb = multiplier_conditions(e, fam.multiplier, broken, grid);
  const VariationalityVerdict vb =
      variationality_verdict(e, dynamical_form(fam.multiplier, broken), 50, 7, kHelmholtzToleranceDual);
  std::printf("offset 0.1: hp22 %.2e, helmholtz %s (worst %.2e in %s)\n", cb.hp22, vb.pass ? "pass" : "fail",
              vb.worst, vb.worst_condition.c_str());
  return v.pass && !vb.pass ? 0 : 1;
}
