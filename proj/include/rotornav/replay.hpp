#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "rotornav/ekf.hpp"
#include "rotornav/flightlog.hpp"
#include "rotornav/mnn.hpp"

namespace rotornav {

enum class FeedbackMode { Prediction, Fused };

struct ReplayConfig {
    int gps_divisor = 10;  // pseudo-GPS every N log steps
    Eigen::Vector3d meas_sigma_m = Eigen::Vector3d::Constant(0.1);
    double accel_noise_sigma = 0.0;  // added to the synthesized IMU
    std::uint64_t noise_seed = 0;
    FeedbackMode feedback = FeedbackMode::Prediction;
    double gate_sigma = 5.0;
    double q_accel = 0.5;       // process noise: white-acceleration PSD, (m/s^2)^2 s
    double p0_pos = 1e-4;       // initial position variance
    double p0_vel = 1e-2;       // initial velocity variance
    double gravity_mps2 = 9.81;
};

struct FusionReport {
    std::vector<double> t;
    std::vector<Eigen::Vector3d> truth;
    std::vector<Eigen::Vector3d> pred;   // measurement-source position per step
    std::vector<Eigen::Vector3d> fused;
    double rmse_pred = 0.0;
    double rmse_fused = 0.0;
    int rejected_count = 0;
    double nis_mean = 0.0;
    int nis_count = 0;
};

// Measurement source for the replay: returns the ENU position handed to the
// filter at step k, or nothing when the step carries no measurement.
using MeasurementFn =
    std::function<std::optional<Eigen::Vector3d>(std::size_t k, const LogRow& row)>;

// Called after each step with the filter state the step ended in.
using StepHook = std::function<void(std::size_t k, const EkfState& state)>;

// Core fusion loop over a uniformly sampled log: IMU synthesized by
// differentiating the logged positions, predict at every step, position
// update whenever the source yields a measurement.
FusionReport replay_with_measurements(const FlightLog& log, const MeasurementFn& source,
                                      const GeodeticCoord& origin, const ReplayConfig& cfg,
                                      const StepHook& after_step = {});

// Full pipeline replay: the network predicts position from its own previous
// output (or the fused estimate), the prediction is converted to geodetic
// coordinates and fused back as a pseudo-GPS fix.
FusionReport replay(const FlightLog& log, const MnnNetwork& net, const GeodeticCoord& origin,
                    const ReplayConfig& cfg);

void write_fusion_csv(const FusionReport& report, std::ostream& out);
void write_fusion_csv(const FusionReport& report, const std::filesystem::path& path);

}  // namespace rotornav
