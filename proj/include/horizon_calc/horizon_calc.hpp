#ifndef HORIZON_CALC_HORIZON_CALC_HPP
#define HORIZON_CALC_HORIZON_CALC_HPP

#include "horizon_calc/errors.hpp"
#include "horizon_calc/grid_paths.hpp"
#include "horizon_calc/interval_sets.hpp"
#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/integration.hpp"
#include "horizon_calc/calculus.hpp"
#include "horizon_calc/laws.hpp"
#include "horizon_calc/market.hpp"
#include "horizon_calc/gallery.hpp"

namespace hcalc {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
