#pragma once

#include "interlace/rng.h"

#include <vector>

namespace interlace::simulate::internal {

// In-place Dyson step; y must be strictly increasing on entry and is on exit.
void dyson_advance(std::vector<double>& y, double dt, rng::PathRng& rng);

// Minimum of a Brownian bridge from g0 to g1 with the given variance over the
// step, sampled exactly given the endpoints. Skips the draw when the
// crossing probability of zero is below 1e-17.
double bridge_min_for_crossing(double g0, double g1, double variance, rng::PathRng& rng);

} // namespace interlace::simulate::internal
