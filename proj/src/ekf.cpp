#include "rotornav/ekf.hpp"

#include <cmath>

#include "rotornav/errors.hpp"
#include "rotornav/uav_sim.hpp"

namespace rotornav {

EkfState predict(const EkfState& s, const ImuSample& imu, double dt, const Matrix6d& q_process,
                 double gravity_mps2) {
    if (!(dt > 0.0 && dt <= 0.1)) throw DomainError("predict: dt must lie in (0, 0.1]");

    const Eigen::Matrix3d r = quat_to_rotation(imu.quat);
    const Eigen::Vector3d a = r * imu.accel_body + Eigen::Vector3d(0, 0, -gravity_mps2);

    EkfState out;
    out.p = s.p + s.v * dt + 0.5 * dt * dt * a;
    out.v = s.v + dt * a;

    Matrix6d f = Matrix6d::Identity();
    f.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
    out.P = f * s.P * f.transpose() + q_process;
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

GpsUpdateResult update_gps(const EkfState& s, const GpsMeasurement& z,
                           const GeodeticCoord& origin, double gate_sigma) {
    GpsUpdateResult result;
    result.state = s;

    const EnuCoord enu = geodetic_to_enu(z.zeta, origin);
    const Eigen::Vector3d meas(enu.e, enu.n, enu.u);
    const Eigen::Vector3d innovation = meas - s.p;
    if (!innovation.allFinite()) return result;  // rejected, state unchanged

    Eigen::Matrix3d r_meas = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::min(std::max(z.sigma_m[i], 0.0), kSigmaCap);
        if (!(sigma > 0.0)) throw DomainError("update_gps: sigma must be positive");
        r_meas(i, i) = sigma * sigma;
    }

    const Eigen::Matrix3d s_innov = s.P.topLeftCorner<3, 3>() + r_meas;
    const Eigen::Matrix3d s_inv = s_innov.inverse();
    result.nis = innovation.dot(s_inv * innovation);
    if (!std::isfinite(result.nis)) return result;
    if (result.nis > gate_sigma * gate_sigma) return result;  // gated out

    Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
    h.leftCols<3>() = Eigen::Matrix3d::Identity();

    const Eigen::Matrix<double, 6, 3> k = s.P * h.transpose() * s_inv;
    const Eigen::Matrix<double, 6, 1> dx = k * innovation;
    result.state.p = s.p + dx.head<3>();
    result.state.v = s.v + dx.tail<3>();

    const Matrix6d i_kh = Matrix6d::Identity() - k * h;
    result.state.P = i_kh * s.P * i_kh.transpose() + k * r_meas * k.transpose();
    result.state.P = 0.5 * (result.state.P + result.state.P.transpose());
    result.accepted = true;
    return result;
}

}  // namespace rotornav
