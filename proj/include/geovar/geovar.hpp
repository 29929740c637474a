#pragma once

#include "geovar/errors.hpp"
#include "geovar/dual.hpp"
#include "geovar/tensor.hpp"
#include "geovar/rule.hpp"
#include "geovar/engine.hpp"
#include "geovar/chart.hpp"
#include "geovar/geometry.hpp"
#include "geovar/jet.hpp"
#include "geovar/maps.hpp"
#include "geovar/helmholtz.hpp"
#include "geovar/inverse.hpp"
#include "geovar/catalog.hpp"
#include "geovar/scenario.hpp"
#include "geovar/builtin_scenarios.hpp"
#include "geovar/report.hpp"
#include "geovar/discrepancies.hpp"
