#pragma once

#include <cstdint>

#include "rotornav/flightlog.hpp"
#include "rotornav/uav_sim.hpp"

namespace rotornav {

enum class PlanKind { Hover, Square, Circle, RandomWaypoint };

struct TrajectoryPlan {
    PlanKind kind = PlanKind::Hover;
    double duration_s = 30.0;
    double altitude_m = 1.5;
    double radius_m = 2.0;    // circle
    double side_m = 2.0;      // square
    double speed_mps = 0.5;   // cruise speed for square/circle/waypoints
    double box_m = 2.0;       // half-extent of the random-waypoint box
    std::uint64_t seed = 0;   // waypoint draw
    double dt_physics = 1e-3;
    double log_rate_hz = 100.0;

    void validate() const;
};

struct NoiseConfig {
    double position_sigma_m = 0.0;  // additive Gaussian on logged positions
    std::uint64_t seed = 0;
};

// Cascaded PD position -> attitude -> rotor-speed controller gains.
struct ControllerGains {
    double kp_pos = 8.0;
    double kd_pos = 5.0;
    double k_rot = 1.2;        // attitude error gain, N m per rad (scaled by J below)
    double k_omega = 0.25;     // body-rate damping
    double max_pos_error_m = 10.0;  // divergence guard
};

// Flies the plan closed loop and logs timestamp, normalized rotor speeds,
// position (with optional noise), and attitude quaternion at log_rate_hz.
// Throws NumericalError when the controller diverges.
FlightLog generate_flight(const TrajectoryPlan& plan, const UavParams& params,
                          const NoiseConfig& noise = {}, const ControllerGains& gains = {});

}  // namespace rotornav
