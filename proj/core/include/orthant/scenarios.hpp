#pragma once

#include "orthant/model.hpp"

namespace orthant {

/// Four independent fBm coordinates (Sigma = Id) with nu = (1, 1, t0, 1) and
/// mu = (1, 0.5, -1, -2/t0), where t0 is the stationary time of g_{1,2}.
/// Coordinate 3 meets its threshold exactly at t0 (weakly essential) and
/// coordinate 4 is strictly inside (unessential). For H > 1/2 the stationary
/// time lies strictly between the scalar times of coordinates 1 and 2, so
/// case (ii) applies.
ModelSpec example_four_dim(double hurst = 0.75);

/// Stationary time of g_{1,2} used by example_four_dim.
double example_four_dim_t0(double hurst);

}  // namespace orthant
