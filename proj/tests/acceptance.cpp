// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "geovar/geovar.hpp"
#include "random_lagrangian.hpp"

namespace {

using namespace geovar;

const DerivativeEngine kDual = DerivativeEngine::dual();
const DerivativeEngine kFd = DerivativeEngine::fd();
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) { return format_residual(v); }

std::vector<ScenarioInstance> instances(const std::function<bool(const Scenario&)>& keep) {
  std::vector<ScenarioInstance> out;
  for (const auto& s : builtin_scenarios())
    if (keep(s)) out.push_back(instantiate(s, kDual));
  return out;
}

bool is_family(const Scenario& s) { return s.kind == ScenarioKind::solution_family && s.name != "metricity-control"; }

// 1. Trace relation: harmonic residual as the g-trace of the mapping residual
// against the direct assembly.
Outcome trace_relation() {
  double worst = 0.0;
  std::size_t jets = 0, scenarios = 0;
  for (const auto& inst : instances([](const Scenario&) { return true; })) {
    const MappingProblem& p = inst.problem;
    if (!p.g || !p.h) continue;
    ++scenarios;
    for (const auto& j : random_jets(inst.base_sample, inst.fibre_sample, 100, kSeed + scenarios)) {
      const auto a = harmonic_residual(p, j);
      const auto b = harmonic_residual_direct(p, j);
      const double scale = std::max(1.0, max_norm(std::span<const double>(a)));
      worst = std::max(worst, max_abs_diff(std::span<const double>(a), std::span<const double>(b)) / scale);
      ++jets;
    }
  }
  return {worst < 1e-12, "max relative gap " + sci(worst) + " over " + std::to_string(jets) + " jets in " +
                             std::to_string(scenarios) + " scenarios (< 1e-12)"};
}

// 2. Euler-Lagrange forms of random Lagrangians are variational; the crossed
// counterexample is not.
Outcome variational_soundness() {
  double worst = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto [m, n] = testing::lagrangian_dims(k);
    const SourceForm e = euler_lagrange_form(testing::random_lagrangian(m, n, 1000 + k).density(), kDual);
    worst = std::max(worst, variationality_verdict(kDual, e, 100, 7 + k, 1e-7).worst);
  }
  const SourceForm counter(ChartDomain::box(1, -2, 2, "R"), ChartDomain::box(2, -2, 2, "R2"),
                           []<class T>(const JetPoint<T>& j) { return std::vector<T>{j.phi2(1, 0, 0), T(0.0)}; });
  double least_h1 = 1e300;
  for (const auto& j : random_jets(counter.base_domain(), counter.fibre_domain(), 100, kSeed))
    least_h1 = std::min(least_h1, helmholtz_residuals(kDual, counter, j).norm1);
  return {worst < 1e-7 && least_h1 >= 1.0, "20 Lagrangians x 100 jets: worst " + sci(worst) +
                                               " (< 1e-7); counterexample min H1 " + sci(least_h1) + " (>= 1)"};
}

// 3. Gnomonic projection is a geodesic mapping; stereographic is not.
Outcome geodesic_oracle() {
  const auto& pool = builtin_scenarios();
  const ScenarioInstance gn = instantiate(find_scenario(pool, "sphere-gnomonic"), kDual);
  const ScenarioInstance st = instantiate(find_scenario(pool, "sphere-stereographic"), kDual);
  const NamedMap& gmap = gn.map("gnomonic");
  double residual = 0.0;
  for (const auto& x : sample_points(gmap.sample_box, 50, kSeed))
    residual = std::max(residual, max_norm(geodesic_map_residual(gn.problem, prolong(kDual, gmap.rule, 2, x))));
  double defect = 0.0, control = 0.0;
  SampleStream s(kSeed);
  for (int k = 0; k < 10; ++k) {
    const std::vector<double> x0 = sample_point(gmap.sample_box.shrunk(0.2), s);
    const double a = s.uniform(0.0, 2.0 * std::numbers::pi);
    const GeodesicState s0{x0, {std::cos(a), std::sin(a) / std::sin(x0[0])}, 0.0};
    defect = std::max(defect, geodesic_image_defect(kDual, gn.problem, gmap.rule, s0, 0.3, 1e-3).defect);
    control = std::max(control,
                       geodesic_image_defect(kDual, st.problem, st.map("stereographic").rule, s0, 0.3, 1e-3).defect);
  }
  return {residual < 1e-8 && defect < 1e-5 && control > 1e-2,
          "gnomonic residual " + sci(residual) + " (< 1e-8), image defect " + sci(defect) +
              " (< 1e-5); stereographic defect " + sci(control) + " (> 1e-2)"};
}

std::vector<std::vector<double>> grid5(const ScenarioInstance& inst) {
  return grid_points(product_domain(inst.base_sample, inst.fibre_sample), 5, kSeed);
}

// Jets at the (x, phi) grid points with seeded derivative data.
std::vector<JetPoint<double>> grid_jets(const ScenarioInstance& inst, std::size_t stride) {
  const auto grid = grid5(inst);
  const std::size_t m = inst.problem.m();
  const auto jets = random_jets(inst.base_sample, inst.fibre_sample, grid.size(), kSeed);
  std::vector<JetPoint<double>> out;
  for (std::size_t k = 0; k < grid.size(); k += stride) {
    JetPoint<double> j = jets[k];
    j.x.assign(grid[k].begin(), grid[k].begin() + static_cast<std::ptrdiff_t>(m));
    j.phi.assign(grid[k].begin() + static_cast<std::ptrdiff_t>(m), grid[k].end());
    out.push_back(std::move(j));
  }
  return out;
}

// 4. Solution families satisfy every multiplier condition and Helmholtz.
Outcome inverse_closure() {
  double hp = 0.0, helm = 0.0;
  std::size_t points = 0, jets = 0;
  std::string dims;
  for (const auto& inst : instances(is_family)) {
    const MappingProblem& p = inst.problem;
    const MultiplierField& b = inst.require_multiplier();
    const std::size_t m = p.m();
    dims += (dims.empty() ? "" : ", ") + std::to_string(m) + "x" + std::to_string(p.n());
    for (const auto& z : grid5(inst)) {
      const std::span<const double> zs(z);
      const auto x = zs.first(m), phi = zs.subspan(m);
      const Hp3Residuals h3 = hp3x_residuals(kDual, b, p, x, phi);
      hp = std::max({hp, max_norm(hp21_residual(kDual, b, p.gamma_m, x, phi)),
                     max_norm(hp22_residual(kDual, b, p.gamma_n, x, phi)), max_norm(h3.hp31), max_norm(h3.hp32),
                     max_norm(h3.hp33), max_norm(h3.hp34)});
      ++points;
    }
    const SourceForm e = dynamical_form(b, p);
    // Helmholtz on every fifth grid point of the five-dimensional grid.
    for (const auto& j : grid_jets(inst, p.m() + p.n() >= 5 ? 5 : 1)) {
      helm = std::max(helm, helmholtz_residuals(kDual, e, j).max_norm());
      ++jets;
    }
  }
  return {hp < 1e-7 && helm < 1e-6, "families " + dims + ": HP21-HP34 max " + sci(hp) + " on " +
                                        std::to_string(points) + " grid points (< 1e-7), Helmholtz max " + sci(helm) +
                                        " on " + std::to_string(jets) + " jets (< 1e-6)"};
}

// 5. A constant offset on one fibre Christoffel symbol is detected.
Outcome metricity_detection() {
  const ScenarioInstance inst = instantiate(find_scenario(builtin_scenarios(), "metricity-control"), kDual);
  const MappingProblem& p = inst.problem;
  const MultiplierField& b = inst.require_multiplier();
  double hp22 = 0.0;
  for (const auto& z : grid5(inst)) {
    const std::span<const double> zs(z);
    hp22 = std::max(hp22, max_norm(hp22_residual(kDual, b, p.gamma_n, zs.first(p.m()), zs.subspan(p.m()))));
  }
  const VariationalityVerdict v = variationality_verdict(kDual, dynamical_form(b, p), 40, kSeed, 0.01,
                                                         JetSampling{inst.base_sample, inst.fibre_sample, 1.0});
  return {hp22 >= 0.01 && v.worst >= 0.01,
          "offset 0.1: HP22 " + sci(hp22) + ", Helmholtz worst " + sci(v.worst) + " (" + v.worst_condition + "), both >= 0.01"};
}

// 6. HP32 is g^ij times the lowered-curvature pair-exchange defect.
Outcome riemann_identity() {
  double mismatch = 0.0, hp32 = 0.0, pair = 0.0;
  for (const auto& inst : instances(is_family)) {
    const MappingProblem& p = inst.problem;
    const MultiplierField& b = inst.require_multiplier();
    const std::size_t m = p.m();
    for (const auto& z : grid_points(product_domain(inst.base_sample, inst.fibre_sample), 3, kSeed)) {
      const std::span<const double> zs(z);
      const auto x = zs.first(m), phi = zs.subspan(m);
      mismatch = std::max(mismatch, hp32_riemann_mismatch(kDual, b, p, x, phi));
      hp32 = std::max(hp32, max_norm(hp3x_residuals(kDual, b, p, x, phi).hp32));
      pair = std::max(pair, lowered_riemann_pair_symmetry_defect(kDual, p.h->slice({x.begin(), x.end()}), p.gamma_n, phi).defect);
    }
  }
  return {mismatch < 1e-6 && hp32 < 1e-6 && pair < 1e-6,
          "mismatch " + sci(mismatch) + " (< 1e-6); HP32 " + sci(hp32) + ", pair defect " + sci(pair) + " (both ~0)"};
}

// 7. HP34 and HP33 follow from HP21 and HP31 for any symmetric multiplier.
Outcome dependencies() {
  double d34 = 0.0, d33 = 0.0;
  std::size_t scenarios = 0;
  for (const auto& inst : instances([](const Scenario&) { return true; })) {
    if (!inst.multiplier) continue;
    const auto grid = grid_points(product_domain(inst.base_sample, inst.fibre_sample), 3, kSeed);
    const DependencyReport r = dependency_checks(kDual, *inst.multiplier, inst.problem, grid);
    d34 = std::max(d34, r.hp34_defect);
    d33 = std::max(d33, r.hp33_defect);
    ++scenarios;
  }
  return {d34 < 1e-5 && d33 < 1e-6, "over " + std::to_string(scenarios) + " scenarios: HP34 defect " + sci(d34) +
                                        " (< 1e-5), HP33 defect " + sci(d33) + " (< 1e-6)"};
}

// 8. Both readings of the two disputed formulas behave as predicted.
Outcome discrepancies() {
  RunSettings settings;
  const DiscrepancyReport rep = run_discrepancies(builtin_scenarios(), kDual, settings);
  double with = 0.0, gap = 0.0, least_without = 1e300, const_defect = 0.0, sphere_defect = 0.0;
  for (const auto& r : rep.s_trace) {
    with = std::max(with, r.with_factor);
    gap = std::max(gap, r.prediction_gap);
    if (r.n >= 2) least_without = std::min(least_without, r.without_factor);
  }
  for (const auto& r : rep.trace_identity) {
    if (r.constant_det) const_defect = std::max(const_defect, r.defect);
    if (r.scenario.rfind("sphere", 0) == 0) sphere_defect = std::max(sphere_defect, r.defect);
  }
  const bool ok = rep.consistent() && with < 1e-8 && gap < 1e-8 && least_without > 1e-2 && const_defect < 1e-8 &&
                  sphere_defect > 1e-2;
  return {ok, "1/n trace " + sci(with) + ", no-factor min " + sci(least_without) + " (gap to (n-1) psi^l " + sci(gap) +
                  "); trace identity " + sci(const_defect) + " on constant det, " + sci(sphere_defect) + " on the sphere"};
}

// 9. Dual and finite-difference engines agree on every reported residual.
Outcome engine_agreement() {
  RunSettings settings;
  settings.engine = EngineChoice::both;
  double worst = 0.0;
  std::size_t records = 0, unexpected = 0;
  std::string where;
  for (const auto& s : builtin_scenarios()) {
    const ResidualReport rep = run_scenario(s, settings);
    for (const auto& r : rep.results) {
      if (!r.matches()) ++unexpected;
      if (r.engine != "agreement") continue;
      ++records;
      if (r.residual > worst || !std::isfinite(r.residual)) {
        worst = std::isfinite(r.residual) ? r.residual : 1e300;
        where = s.name + ":" + r.check;
      }
    }
  }
  return {worst < kEngineAgreementTolerance && unexpected == 0,
          std::to_string(records) + " residuals, worst relative gap " + sci(worst) + " at " + where + " (< 1e-4); " +
              std::to_string(unexpected) + " unexpected verdicts"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"trace relation", trace_relation},         {"variational soundness", variational_soundness},
      {"geodesic mapping oracle", geodesic_oracle}, {"inverse-problem closure", inverse_closure},
      {"metricity detection", metricity_detection}, {"Riemann identity", riemann_identity},
      {"dependency claims", dependencies},         {"discrepancy adjudication", discrepancies},
      {"engine agreement", engine_agreement},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %zu  %-26s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
