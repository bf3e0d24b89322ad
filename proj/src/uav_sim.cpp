#include "rotornav/uav_sim.hpp"

#include <cmath>

#include "rotornav/errors.hpp"

namespace rotornav {

namespace {

Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
    Eigen::Matrix3d m;
    m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return m;
}

struct Derivative {
    Eigen::Vector3d dx, dv, domega;
    Eigen::Matrix3d dR;
};

Derivative dynamics(const UavState& s, const Eigen::Vector4d& omega, const UavParams& p,
                    const Disturbance& dist, double t) {
    const auto [f_t, tau] = thrust_torque(omega, p);
    Derivative d;
    d.dx = s.v;
    d.dv = Eigen::Vector3d(0, 0, -p.g) +
           (s.R.col(2) * f_t + dist.force_at(t)) / p.m;
    d.dR = s.R * hat(s.omega_body);
    d.domega = p.J.inverse() *
               (tau + dist.torque_at(t) - s.omega_body.cross(p.J * s.omega_body));
    return d;
}

UavState advance(const UavState& s, const Derivative& d, double h) {
    UavState out;
    out.x = s.x + h * d.dx;
    out.v = s.v + h * d.dv;
    out.R = s.R + h * d.dR;
    out.omega_body = s.omega_body + h * d.domega;
    return out;
}

}  // namespace

void UavParams::validate() const {
    if (!(m > 0.0)) throw DomainError("uav mass must be positive");
    if (!(l > 0.0 && k_omega > 0.0 && k_d > 0.0 && omega_max > 0.0)) {
        throw DomainError("uav geometry/coefficients must be positive");
    }
    if ((J - J.transpose()).norm() > 1e-12) throw DomainError("inertia matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(J);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw DomainError("inertia matrix must be positive definite");
    }
}

double UavParams::hover_rotor_speed() const { return std::sqrt(m * g / (4.0 * k_omega)); }

double UavState::so3_error() const {
    return (R.transpose() * R - Eigen::Matrix3d::Identity()).norm();
}

Disturbance Disturbance::none() { return Disturbance{}; }

Eigen::Vector3d Disturbance::force_at(double t) const {
    if (!force) return Eigen::Vector3d::Zero();
    Eigen::Vector3d f = force(t);
    if (!f.allFinite()) throw NumericalError("disturbance force non-finite");
    return f.cwiseMax(-force_cap).cwiseMin(force_cap);
}

Eigen::Vector3d Disturbance::torque_at(double t) const {
    if (!torque) return Eigen::Vector3d::Zero();
    Eigen::Vector3d tq = torque(t);
    if (!tq.allFinite()) throw NumericalError("disturbance torque non-finite");
    return tq.cwiseMax(-torque_cap).cwiseMin(torque_cap);
}

std::pair<double, Eigen::Vector3d> thrust_torque(const Eigen::Vector4d& omega,
                                                 const UavParams& params) {
    for (int i = 0; i < 4; ++i) {
        if (!(omega[i] >= 0.0 && omega[i] <= params.omega_max)) {
            throw DomainError("rotor speed " + std::to_string(i + 1) + " outside [0, omega_max]");
        }
    }
    const Eigen::Vector4d w2 = omega.array().square();
    const double f_t = params.k_omega * w2.sum();
    Eigen::Vector3d tau;
    tau.x() = params.k_omega * params.l * (w2[2] - w2[0]);
    tau.y() = params.k_omega * params.l * (w2[3] - w2[1]);
    tau.z() = params.k_d * (w2[1] + w2[3] - w2[0] - w2[2]);
    return {f_t, tau};
}

Eigen::Vector4d mix_rotor_speeds(double f_t, const Eigen::Vector3d& tau,
                                 const UavParams& params) {
    const double base = f_t / (4.0 * params.k_omega);
    const double roll = tau.x() / (2.0 * params.k_omega * params.l);
    const double pitch = tau.y() / (2.0 * params.k_omega * params.l);
    const double yaw = tau.z() / (4.0 * params.k_d);
    Eigen::Vector4d w2;
    w2[0] = base - roll - yaw;
    w2[1] = base - pitch + yaw;
    w2[2] = base + roll - yaw;
    w2[3] = base + pitch + yaw;
    Eigen::Vector4d omega;
    for (int i = 0; i < 4; ++i) {
        omega[i] = std::sqrt(std::max(w2[i], 0.0));
        omega[i] = std::min(omega[i], params.omega_max);
    }
    return omega;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
    // Gram-Schmidt on the columns, then rebuild the third as a cross product
    // so the result has determinant +1.
    Eigen::Vector3d c0 = r.col(0).normalized();
    Eigen::Vector3d c1 = (r.col(1) - c0 * c0.dot(r.col(1))).normalized();
    Eigen::Vector3d c2 = c0.cross(c1);
    Eigen::Matrix3d out;
    out << c0, c1, c2;
    return out;
}

UavState step(const UavState& state, const Eigen::Vector4d& omega, const UavParams& params,
              const Disturbance& disturbance, double t, double dt) {
    if (!(dt > 0.0 && dt <= 0.1)) throw DomainError("step: dt must lie in (0, 0.1]");

    const Derivative k1 = dynamics(state, omega, params, disturbance, t);
    const Derivative k2 =
        dynamics(advance(state, k1, dt / 2), omega, params, disturbance, t + dt / 2);
    const Derivative k3 =
        dynamics(advance(state, k2, dt / 2), omega, params, disturbance, t + dt / 2);
    const Derivative k4 = dynamics(advance(state, k3, dt), omega, params, disturbance, t + dt);

    UavState next;
    next.x = state.x + dt / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
    next.v = state.v + dt / 6.0 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
    next.R = state.R + dt / 6.0 * (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR);
    next.omega_body =
        state.omega_body + dt / 6.0 * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega);
    next.R = orthonormalize(next.R);

    if (!next.x.allFinite() || !next.v.allFinite() || !next.R.allFinite() ||
        !next.omega_body.allFinite()) {
        throw NumericalError("step: state became non-finite");
    }
    return next;
}

Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& r) {
    Eigen::Quaterniond q(r);
    q.normalize();
    Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
    if (out[0] < 0.0) out = -out;
    return out;
}

Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q) {
    return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
}

}  // namespace rotornav
