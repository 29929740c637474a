// Pushes great circles through the gnomonic and stereographic charts and
// reports how far the images are from straight lines.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "geovar/geovar.hpp"

int main() {
  using namespace geovar;
  const DerivativeEngine e = DerivativeEngine::dual();
  const auto& pool = builtin_scenarios();

  for (const char* name : {"sphere-gnomonic", "sphere-stereographic"}) {
    const ScenarioInstance inst = instantiate(find_scenario(pool, name), e);
    const NamedMap& map = inst.maps.front();
    std::printf("%s (%s)\n", name, map.name.c_str());
    for (int k = 0; k < 4; ++k) {
      const double a = k * std::numbers::pi / 4;
      const std::vector<double> x0{1.2, 0.1};
      const GeodesicState s0{x0, {std::cos(a), std::sin(a) / std::sin(x0[0])}, 0.0};
      const ImageDefect d = geodesic_image_defect(e, inst.problem, map.rule, s0, 0.5, 1e-3);
      std::printf("  heading %4.2f rad: defect %.3e\n", a, d.defect);
    }
  }
}
