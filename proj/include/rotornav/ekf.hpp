#pragma once

#include <Eigen/Dense>

#include "rotornav/geodesy.hpp"

namespace rotornav {

using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Position + velocity filter state with covariance. Attitude is consumed
// from the log, not estimated.
struct EkfState {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Matrix6d P = Matrix6d::Identity();
};

struct ImuSample {
    double t = 0.0;
    Eigen::Vector3d accel_body = Eigen::Vector3d::Zero();  // specific force, m/s^2
    Eigen::Vector4d quat = Eigen::Vector4d(1, 0, 0, 0);    // body -> world (w, x, y, z)
};

struct GpsMeasurement {
    double t = 0.0;
    GeodeticCoord zeta;
    Eigen::Vector3d sigma_m = Eigen::Vector3d::Constant(1.0);  // per-axis std dev
};

// Measurement std devs above this are capped (an uninformative measurement).
inline constexpr double kSigmaCap = 1e12;

// Strapdown prediction: rotates the specific force to the world frame, adds
// gravity (-z up), and applies the exact constant-acceleration discretization
//   p += v dt + a dt^2/2,  v += a dt,  P = F P F^T + Q.
EkfState predict(const EkfState& s, const ImuSample& imu, double dt, const Matrix6d& q_process,
                 double gravity_mps2 = 9.81);

struct GpsUpdateResult {
    EkfState state;
    bool accepted = false;
    double nis = 0.0;  // innovation^T S^-1 innovation (3 dof)
};

// Position update from a pseudo-GPS fix: converts the geodetic measurement
// back to ENU at the origin, then a Joseph-form Kalman update. Measurements
// with Mahalanobis distance above gate_sigma (or non-finite innovations) are
// rejected and leave the state unchanged.
GpsUpdateResult update_gps(const EkfState& s, const GpsMeasurement& z,
                           const GeodeticCoord& origin, double gate_sigma = 5.0);

}  // namespace rotornav
