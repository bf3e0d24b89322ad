#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rotornav/flight_gen.hpp"

namespace rotornav {

// The canonical synthetic flight suite used for training and evaluation:
// hover, square, circle, and two random-waypoint flights, 100 Hz, noiseless,
// 320 s combined. All seeds fixed so regeneration is byte-identical.
std::vector<std::pair<std::string, TrajectoryPlan>> fixture_suite();

// Large, fast trajectories whose targets stress an unconstrained network.
std::vector<std::pair<std::string, TrajectoryPlan>> stress_suite();

}  // namespace rotornav
