#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

namespace rotornav {

// Rigid-body quadrotor parameters. The world frame is East-North-Up with z
// positive up: gravity acts along -z and rotor thrust along the body +z
// axis. Rotor layout implied by the torque map: rotors 1/3 sit on the -y/+y
// arms, rotors 2/4 on +x/-x, with 2 and 4 producing positive yaw reaction.
struct UavParams {
    double m = 1.1;                                    // kg
    Eigen::Matrix3d J = Eigen::Vector3d(0.010, 0.010, 0.018).asDiagonal();  // kg m^2
    double l = 0.125;                                  // arm length, m
    double k_omega = 1.84e-6;                          // thrust coefficient, N s^2
    double k_d = 3.0e-8;                               // yaw drag coefficient, N m s^2
    double g = 9.81;                                   // m/s^2
    double omega_max = 2200.0;                         // rad/s

    void validate() const;
    double hover_rotor_speed() const;  // per-rotor speed balancing gravity
};

struct UavState {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();       // position, m
    Eigen::Vector3d v = Eigen::Vector3d::Zero();       // velocity, m/s
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();   // body -> world
    Eigen::Vector3d omega_body = Eigen::Vector3d::Zero();  // angular velocity, rad/s

    // Frobenius deviation of R^T R from identity.
    double so3_error() const;
};

// Time-dependent external force (N) and torque (N m), clamped to caps.
struct Disturbance {
    std::function<Eigen::Vector3d(double)> force;
    std::function<Eigen::Vector3d(double)> torque;
    double force_cap = 50.0;
    double torque_cap = 5.0;

    static Disturbance none();
    Eigen::Vector3d force_at(double t) const;
    Eigen::Vector3d torque_at(double t) const;
};

// Total thrust and body torque from the four rotor speeds (rad/s):
//   f_t  = k_omega * sum(w_i^2)
//   tau  = [ k_omega*l*(w3^2 - w1^2),
//            k_omega*l*(w4^2 - w2^2),
//            k_d*(w2^2 + w4^2 - w1^2 - w3^2) ]
// Throws DomainError when any speed is outside [0, omega_max].
std::pair<double, Eigen::Vector3d> thrust_torque(const Eigen::Vector4d& omega,
                                                 const UavParams& params);

// Inverse of the rotor map: speeds achieving (f_t, tau), clamped to
// [0, omega_max].
Eigen::Vector4d mix_rotor_speeds(double f_t, const Eigen::Vector3d& tau,
                                 const UavParams& params);

// One RK4 step of the rigid-body dynamics with per-step re-orthonormalization
// of R. Throws NumericalError if the state becomes non-finite.
UavState step(const UavState& state, const Eigen::Vector4d& omega, const UavParams& params,
              const Disturbance& disturbance, double t, double dt);

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

// Rotation matrix -> unit quaternion (w, x, y, z), w >= 0.
Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& r);
Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q);

}  // namespace rotornav
