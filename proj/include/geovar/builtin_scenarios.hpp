#pragma once

// Built-in scenarios, in the same JSON format accepted by --config.

#include <string>
#include <vector>

#include "geovar/scenario.hpp"

namespace geovar {

inline const char* builtin_scenario_json() {
  return R"json({"scenarios": [
{
  "name": "flat-identity",
  "description": "Euclidean plane to itself; straight maps against a bent one",
  "base": {"label": "R2", "bounds": [[-1, 1], [-1, 1]], "metric": {"type": "flat"}},
  "fibre": {"label": "R2", "bounds": [[-3, 3], [-3, 3]], "metric": {"type": "flat"}},
  "maps": [
    {"name": "identity", "type": "identity", "sample_bounds": [[-0.6, 0.6], [-0.6, 0.6]]},
    {"name": "bent", "type": "bent", "c": 0.5, "sample_bounds": [[-0.6, 0.6], [-0.6, 0.6]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "identity", "provenance": "closed form: second derivatives vanish"},
    {"check": "harmonic_residual", "map": "identity", "provenance": "closed form: second derivatives vanish"},
    {"check": "image_defect", "map": "identity", "provenance": "lines map to lines"},
    {"check": "geodesic_residual", "map": "bent", "expect": "fail", "provenance": "closed form: phi^2_11 = 2c"},
    {"check": "harmonic_residual", "map": "bent", "expect": "fail", "provenance": "closed form: Laplacian is 2c"},
    {"check": "image_defect", "map": "bent", "expect": "fail", "provenance": "image of a line is a parabola"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_weighted", "provenance": "energy variation"},
    {"check": "euler_lagrange_unweighted", "provenance": "energy variation with constant det g"},
    {"check": "trace_identity", "provenance": "constant metric"},
    {"check": "hp21", "provenance": "product multiplier of flat metrics"},
    {"check": "hp22", "provenance": "product multiplier of flat metrics"},
    {"check": "helmholtz", "provenance": "sampled evidence: Laplace operator is variational"},
    {"check": "helmholtz_energy", "provenance": "sampled evidence: Euler-Lagrange forms are variational"}
  ]
},
{
  "name": "flat-linear",
  "description": "Affine map of the plane into three-space",
  "base": {"label": "R2", "bounds": [[-2, 2], [-2, 2]], "metric": {"type": "flat"}},
  "fibre": {"label": "R3", "bounds": [[-10, 10], [-10, 10], [-10, 10]], "metric": {"type": "flat"}},
  "maps": [
    {"name": "affine", "type": "linear", "matrix": [[1, 0.5], [-0.3, 1], [0.2, 0.7]], "offset": [0.1, -0.2, 0.3],
     "sample_bounds": [[-1.5, 1.5], [-1.5, 1.5]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "affine", "provenance": "closed form: affine maps are totally geodesic"},
    {"check": "harmonic_residual", "map": "affine", "provenance": "closed form: affine maps are harmonic"},
    {"check": "image_defect", "map": "affine", "provenance": "lines map to lines"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_unweighted", "provenance": "energy variation with constant det g"},
    {"check": "hp21", "provenance": "product multiplier of flat metrics"},
    {"check": "hp22", "provenance": "product multiplier of flat metrics"},
    {"check": "hp31", "provenance": "product multiplier of flat metrics"},
    {"check": "hp33", "provenance": "product multiplier of flat metrics"},
    {"check": "hp34", "provenance": "product multiplier of flat metrics"},
    {"check": "helmholtz", "samples": 40, "provenance": "sampled evidence: Laplace operator is variational"}
  ]
},
{
  "name": "line-to-manifold",
  "description": "Curves in the unit sphere chart",
  "base": {"label": "I", "bounds": [[-1, 1]], "sample_bounds": [[-0.6, 0.6]], "metric": {"type": "flat"}},
  "fibre": {"label": "S2 chart", "bounds": [[0.2, 2.94], [-1.4, 1.4]], "metric": {"type": "round_sphere"}},
  "maps": [
    {"name": "great_circle", "type": "great_circle", "tilt": 0.5, "sample_bounds": [[-0.6, 0.6]]},
    {"name": "latitude", "type": "latitude_circle", "theta": 1.0, "sample_bounds": [[-0.6, 0.6]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "great_circle", "provenance": "great circles are geodesics"},
    {"check": "harmonic_residual", "map": "great_circle", "provenance": "geodesics are harmonic"},
    {"check": "image_defect", "map": "great_circle", "provenance": "great circles are geodesics"},
    {"check": "geodesic_residual", "map": "latitude", "expect": "fail", "provenance": "closed form: -sin cos of theta0"},
    {"check": "harmonic_residual", "map": "latitude", "expect": "fail", "provenance": "closed form: -sin cos of theta0"},
    {"check": "image_defect", "map": "latitude", "expect": "fail", "provenance": "only the equator is a geodesic"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_weighted", "provenance": "energy variation"},
    {"check": "euler_lagrange_unweighted", "provenance": "energy variation with constant det g"},
    {"check": "hp21", "provenance": "product multiplier, flat base"},
    {"check": "hp22", "provenance": "product multiplier with Levi-Civita fibre connection"},
    {"check": "hp31", "provenance": "product multiplier, flat base"},
    {"check": "hp32", "provenance": "Levi-Civita curvature has pair symmetry"},
    {"check": "hp33", "provenance": "product multiplier, flat base"},
    {"check": "hp34", "provenance": "product multiplier, flat base"},
    {"check": "helmholtz", "provenance": "sampled evidence: geodesic equation is variational"},
    {"check": "helmholtz_energy", "samples": 40, "provenance": "sampled evidence: Euler-Lagrange forms are variational"}
  ]
},
{
  "name": "manifold-to-line",
  "description": "Scalar functions on the plane",
  "base": {"label": "R2", "bounds": [[-1, 1], [-1, 1]], "metric": {"type": "flat"}},
  "fibre": {"label": "R", "bounds": [[-5, 5]], "metric": {"type": "flat"}},
  "maps": [
    {"name": "saddle", "type": "harmonic_quadratic", "sample_bounds": [[-0.8, 0.8], [-0.8, 0.8]]},
    {"name": "paraboloid", "type": "paraboloid", "sample_bounds": [[-0.8, 0.8], [-0.8, 0.8]]}
  ],
  "checks": [
    {"check": "harmonic_residual", "map": "saddle", "provenance": "closed form: x^2 - y^2 is harmonic"},
    {"check": "harmonic_residual", "map": "paraboloid", "expect": "fail", "provenance": "closed form: Laplacian is 4"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_unweighted", "provenance": "energy variation with constant det g"},
    {"check": "helmholtz", "provenance": "sampled evidence: Laplace operator is variational"}
  ]
},
{
  "name": "sphere-gnomonic",
  "description": "Unit sphere chart onto the plane carrying the pulled-back round metric",
  "base": {"label": "S2 chart", "bounds": [[0.1, 3.0415926535897931], [-1.4707963267948966, 1.4707963267948966]],
           "metric": {"type": "round_sphere"}},
  "fibre": {"label": "gnomonic plane", "bounds": [[-10, 10], [-10, 10]], "metric": {"type": "gnomonic_sphere"}},
  "maps": [
    {"name": "gnomonic", "type": "gnomonic", "sample_bounds": [[0.8, 2.34], [-0.7, 0.7]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "gnomonic", "provenance": "isometry onto the target chart"},
    {"check": "harmonic_residual", "map": "gnomonic", "provenance": "isometry onto the target chart"},
    {"check": "image_defect", "map": "gnomonic", "provenance": "great circles map to target geodesics"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_weighted", "provenance": "energy variation with the volume weight"},
    {"check": "euler_lagrange_unweighted", "expect": "fail", "provenance": "det g = sin^2 theta is not constant"},
    {"check": "trace_identity", "expect": "fail", "provenance": "det g = sin^2 theta is not constant"},
    {"check": "hp21", "expect": "fail", "provenance": "product multiplier without the volume weight"},
    {"check": "helmholtz", "expect": "fail", "samples": 40, "provenance": "sampled evidence: unweighted product multiplier"}
  ]
},
{
  "name": "sphere-stereographic",
  "description": "Stereographic projection of the unit sphere chart to the flat plane",
  "base": {"label": "S2 chart", "bounds": [[0.1, 3.0415926535897931], [-1.4707963267948966, 1.4707963267948966]],
           "metric": {"type": "round_sphere"}},
  "fibre": {"label": "R2", "bounds": [[-10, 10], [-10, 10]], "metric": {"type": "flat"}},
  "maps": [
    {"name": "stereographic", "type": "stereographic", "sample_bounds": [[0.8, 2.34], [-0.7, 0.7]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "stereographic", "expect": "fail", "provenance": "great circles map to circles"},
    {"check": "harmonic_residual", "map": "stereographic", "provenance": "conformal in two dimensions"},
    {"check": "image_defect", "map": "stereographic", "expect": "fail", "provenance": "great circles map to circles"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"}
  ]
},
{
  "name": "shear-identity",
  "description": "Identity of a non-diagonal unimodular metric on the plane",
  "base": {"label": "shear plane", "bounds": [[-1, 1], [-1, 1]], "metric": {"type": "shear", "amplitude": 0.5}},
  "fibre": {"label": "shear plane", "bounds": [[-1.5, 1.5], [-1.5, 1.5]], "sample_bounds": [[-0.9, 0.9], [-0.9, 0.9]],
            "metric": {"type": "shear", "amplitude": 0.5}},
  "maps": [
    {"name": "identity", "type": "identity", "sample_bounds": [[-0.6, 0.6], [-0.6, 0.6]]}
  ],
  "checks": [
    {"check": "geodesic_residual", "map": "identity", "provenance": "identity between equal connections"},
    {"check": "harmonic_residual", "map": "identity", "provenance": "identity between equal connections"},
    {"check": "image_defect", "map": "identity", "provenance": "identity between equal connections"},
    {"check": "trace_relation", "provenance": "harmonic residual is the g-trace of the mapping residual"},
    {"check": "euler_lagrange_weighted", "provenance": "energy variation"},
    {"check": "euler_lagrange_unweighted", "provenance": "det g = 1"},
    {"check": "trace_identity", "provenance": "det g = 1"},
    {"check": "hp21", "provenance": "product multiplier with unimodular g"},
    {"check": "hp22", "provenance": "product multiplier with Levi-Civita fibre connection"},
    {"check": "hp32", "provenance": "Levi-Civita curvature has pair symmetry"},
    {"check": "riemann_pair", "provenance": "HP32 equals g^ij times the pair-exchange defect"},
    {"check": "pair_symmetry", "provenance": "Levi-Civita curvature has pair symmetry"},
    {"check": "fibre_metricity", "provenance": "Levi-Civita connection"},
    {"check": "helmholtz", "samples": 40, "provenance": "sampled evidence: product multiplier with det g = 1"}
  ]
},
{
  "name": "conformal-family-1x2",
  "description": "Solution family h = exp(psi) hhat over a line, hhat the round metric",
  "kind": "solution_family",
  "base": {"label": "I", "bounds": [[-1, 1]]},
  "fibre": {"label": "S2 chart", "bounds": [[0.3, 2.84], [-1.2, 1.2]], "metric": {"type": "round_sphere"}},
  "psi": {"linear": [1.0]},
  "checks": [
    {"check": "hp21", "provenance": "construction"},
    {"check": "hp22", "provenance": "construction"},
    {"check": "hp31", "provenance": "solution family"},
    {"check": "hp32", "provenance": "solution family"},
    {"check": "hp33", "provenance": "solution family"},
    {"check": "hp34", "provenance": "solution family"},
    {"check": "riemann_pair", "provenance": "HP32 equals g^ij times the pair-exchange defect"},
    {"check": "pair_symmetry", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "fibre_metricity", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "dependency_hp34", "provenance": "structural identity"},
    {"check": "dependency_hp33", "provenance": "structural identity"},
    {"check": "s_trace_with_factor", "provenance": "S-trace with the 1/n factor"},
    {"check": "s_trace_without_factor", "expect": "fail", "provenance": "without 1/n the trace leaves (n - 1) d psi, n = dim N"},
    {"check": "conformality", "provenance": "h is conformal to hhat in x"},
    {"check": "helmholtz", "provenance": "sampled evidence: solution multiplier"}
  ]
},
{
  "name": "conformal-family-2x2",
  "description": "Solution family over the plane into the sphere chart",
  "kind": "solution_family",
  "base": {"label": "R2", "bounds": [[-1, 1], [-1, 1]]},
  "fibre": {"label": "S2 chart", "bounds": [[0.3, 2.84], [-1.2, 1.2]], "metric": {"type": "round_sphere"}},
  "psi": {"linear": [1.0, 0.5]},
  "checks": [
    {"check": "hp21", "provenance": "construction"},
    {"check": "hp22", "provenance": "construction"},
    {"check": "hp31", "provenance": "solution family"},
    {"check": "hp31_symmetrized", "expect": "fail", "provenance": "the symmetrized reading does not hold for metric connections"},
    {"check": "hp32", "provenance": "solution family"},
    {"check": "hp33", "provenance": "solution family"},
    {"check": "hp34", "provenance": "solution family"},
    {"check": "riemann_pair", "provenance": "HP32 equals g^ij times the pair-exchange defect"},
    {"check": "pair_symmetry", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "fibre_metricity", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "dependency_hp34", "provenance": "structural identity"},
    {"check": "dependency_hp33", "provenance": "structural identity"},
    {"check": "s_trace_with_factor", "provenance": "S-trace with the 1/n factor"},
    {"check": "s_trace_without_factor", "expect": "fail", "provenance": "without 1/n the trace leaves (n - 1) d psi, n = dim N"},
    {"check": "conformality", "provenance": "h is conformal to hhat in x"},
    {"check": "helmholtz", "provenance": "sampled evidence: solution multiplier"}
  ]
},
{
  "name": "conformal-family-2x3",
  "description": "Solution family over the plane with a warped three-dimensional fibre metric",
  "kind": "solution_family",
  "base": {"label": "R2", "bounds": [[-1, 1], [-1, 1]]},
  "fibre": {"label": "warped R3", "bounds": [[-1, 1], [-1, 1], [-1, 1]], "metric": {"type": "warped"}},
  "psi": {"linear": [0.3, -0.7], "quadratic": [0.2, 0.0]},
  "checks": [
    {"check": "hp21", "provenance": "construction"},
    {"check": "hp22", "provenance": "construction"},
    {"check": "hp31", "provenance": "solution family"},
    {"check": "hp31_symmetrized", "expect": "fail", "provenance": "the symmetrized reading does not hold for metric connections"},
    {"check": "hp32", "provenance": "solution family"},
    {"check": "hp33", "provenance": "solution family"},
    {"check": "hp34", "provenance": "solution family"},
    {"check": "riemann_pair", "provenance": "HP32 equals g^ij times the pair-exchange defect"},
    {"check": "pair_symmetry", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "fibre_metricity", "provenance": "NGamma is Levi-Civita for each slice"},
    {"check": "dependency_hp34", "provenance": "structural identity"},
    {"check": "dependency_hp33", "provenance": "structural identity"},
    {"check": "s_trace_with_factor", "provenance": "S-trace with the 1/n factor"},
    {"check": "s_trace_without_factor", "expect": "fail", "provenance": "without 1/n the trace leaves (n - 1) d psi, n = dim N"},
    {"check": "conformality", "provenance": "h is conformal to hhat in x"},
    {"check": "helmholtz", "samples": 40, "provenance": "sampled evidence: solution multiplier"}
  ]
},
{
  "name": "metricity-control",
  "description": "Plane family with a constant offset on one fibre Christoffel symbol",
  "kind": "solution_family",
  "base": {"label": "R2", "bounds": [[-1, 1], [-1, 1]]},
  "fibre": {"label": "S2 chart", "bounds": [[0.3, 2.84], [-1.2, 1.2]], "metric": {"type": "round_sphere"},
            "connection_offset": {"index": [0, 0, 0], "value": 0.1}},
  "psi": {"linear": [1.0, 0.5]},
  "checks": [
    {"check": "hp21", "provenance": "HP21 does not involve NGamma"},
    {"check": "hp22", "expect": "fail", "tol": 0.01, "provenance": "offset breaks metricity"},
    {"check": "fibre_metricity", "expect": "fail", "tol": 0.01, "provenance": "offset breaks metricity"},
    {"check": "dependency_hp34", "provenance": "structural identity holds for any symmetric multiplier"},
    {"check": "dependency_hp33", "provenance": "structural identity holds for any symmetric multiplier"},
    {"check": "helmholtz", "expect": "fail", "tol": 0.01, "samples": 40, "provenance": "sampled evidence: multiplier no longer solves HP22"}
  ]
}
]})json";
}

inline const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> all = load_scenarios(builtin_scenario_json(), "builtin");
  return all;
}

inline const Scenario& find_scenario(const std::vector<Scenario>& pool, const std::string& name) {
  for (const auto& s : pool)
    if (s.name == name) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace geovar
