#include "rotornav/flight_gen.hpp"

#include <cmath>
#include <vector>

#include "rotornav/errors.hpp"
#include "rotornav/rng.hpp"

namespace rotornav {

namespace {

struct Reference {
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
};

// Piecewise-linear waypoint path traversed at constant speed.
class WaypointPath {
public:
    WaypointPath(std::vector<Eigen::Vector3d> points, double speed, bool closed)
        : points_(std::move(points)), speed_(speed), closed_(closed) {
        cumulative_.push_back(0.0);
        const std::size_t n = points_.size();
        const std::size_t segs = closed_ ? n : n - 1;
        for (std::size_t i = 0; i < segs; ++i) {
            const double len = (points_[(i + 1) % n] - points_[i]).norm();
            cumulative_.push_back(cumulative_.back() + len);
        }
    }

    Reference at(double t) const {
        const double total = cumulative_.back();
        Reference ref;
        if (total <= 0.0) {
            ref.pos = points_.front();
            return ref;
        }
        double s = speed_ * t;
        if (closed_) {
            s = std::fmod(s, total);
        } else if (s >= total) {
            ref.pos = points_.back();
            return ref;
        }
        std::size_t seg = 0;
        while (seg + 1 < cumulative_.size() && cumulative_[seg + 1] <= s) ++seg;
        const std::size_t n = points_.size();
        const Eigen::Vector3d& a = points_[seg % n];
        const Eigen::Vector3d& b = points_[(seg + 1) % n];
        const double len = cumulative_[seg + 1] - cumulative_[seg];
        const double frac = len > 0.0 ? (s - cumulative_[seg]) / len : 0.0;
        ref.pos = a + frac * (b - a);
        ref.vel = speed_ * (b - a).normalized();
        return ref;
    }

private:
    std::vector<Eigen::Vector3d> points_;
    double speed_;
    bool closed_;
    std::vector<double> cumulative_;
};

class ReferenceGenerator {
public:
    ReferenceGenerator(const TrajectoryPlan& plan) : plan_(plan) {
        switch (plan.kind) {
            case PlanKind::Hover:
                break;
            case PlanKind::Square: {
                const double h = plan.side_m / 2.0;
                std::vector<Eigen::Vector3d> pts = {
                    {h, h, plan.altitude_m},
                    {-h, h, plan.altitude_m},
                    {-h, -h, plan.altitude_m},
                    {h, -h, plan.altitude_m},
                };
                path_.emplace_back(std::move(pts), plan.speed_mps, true);
                break;
            }
            case PlanKind::Circle:
                break;
            case PlanKind::RandomWaypoint: {
                Rng rng(plan.seed);
                std::vector<Eigen::Vector3d> pts;
                const int count = 3 + static_cast<int>(plan.duration_s * plan.speed_mps /
                                                       (1.5 * plan.box_m) + 1);
                for (int i = 0; i < count; ++i) {
                    pts.emplace_back(rng.uniform(-plan.box_m, plan.box_m),
                                     rng.uniform(-plan.box_m, plan.box_m),
                                     plan.altitude_m + rng.uniform(-0.5, 0.5));
                }
                path_.emplace_back(std::move(pts), plan.speed_mps, false);
                break;
            }
        }
    }

    Reference at(double t) const {
        Reference ref;
        switch (plan_.kind) {
            case PlanKind::Hover:
                ref.pos = Eigen::Vector3d(0, 0, plan_.altitude_m);
                break;
            case PlanKind::Circle: {
                const double w = plan_.speed_mps / plan_.radius_m;
                const double th = w * t;
                ref.pos = Eigen::Vector3d(plan_.radius_m * std::cos(th),
                                          plan_.radius_m * std::sin(th), plan_.altitude_m);
                ref.vel = Eigen::Vector3d(-plan_.radius_m * w * std::sin(th),
                                          plan_.radius_m * w * std::cos(th), 0);
                ref.acc = Eigen::Vector3d(-plan_.radius_m * w * w * std::cos(th),
                                          -plan_.radius_m * w * w * std::sin(th), 0);
                break;
            }
            case PlanKind::Square:
            case PlanKind::RandomWaypoint:
                ref = path_.front().at(t);
                break;
        }
        return ref;
    }

private:
    TrajectoryPlan plan_;
    std::vector<WaypointPath> path_;
};

Eigen::Vector3d attitude_error(const Eigen::Matrix3d& r_des, const Eigen::Matrix3d& r) {
    const Eigen::Matrix3d e = 0.5 * (r_des.transpose() * r - r.transpose() * r_des);
    return Eigen::Vector3d(e(2, 1), e(0, 2), e(1, 0));
}

Eigen::Vector4d control(const UavState& s, const Reference& ref, const UavParams& p,
                        const ControllerGains& g) {
    const Eigen::Vector3d a_cmd = ref.acc + g.kp_pos * (ref.pos - s.x) +
                                  g.kd_pos * (ref.vel - s.v);
    Eigen::Vector3d f_world = p.m * (a_cmd + Eigen::Vector3d(0, 0, p.g));
    // Never command a downward or vanishing thrust axis.
    f_world.z() = std::max(f_world.z(), 0.2 * p.m * p.g);

    const double f_t = f_world.dot(s.R.col(2));

    const Eigen::Vector3d b3 = f_world.normalized();
    const Eigen::Vector3d b1_hint(1, 0, 0);
    Eigen::Vector3d b2 = b3.cross(b1_hint);
    if (b2.norm() < 1e-6) b2 = b3.cross(Eigen::Vector3d(0, 1, 0));
    b2.normalize();
    const Eigen::Vector3d b1 = b2.cross(b3);
    Eigen::Matrix3d r_des;
    r_des << b1, b2, b3;

    const Eigen::Vector3d e_rot = attitude_error(r_des, s.R);
    const Eigen::Vector3d tau = -g.k_rot * e_rot - g.k_omega * s.omega_body +
                                s.omega_body.cross(p.J * s.omega_body);
    return mix_rotor_speeds(std::max(f_t, 0.0), tau, p);
}

}  // namespace

void TrajectoryPlan::validate() const {
    if (!(duration_s > 0.0)) throw DomainError("plan duration must be positive");
    if (!(dt_physics > 0.0 && dt_physics <= 0.1)) throw DomainError("dt_physics out of (0, 0.1]");
    if (!(log_rate_hz > 0.0)) throw DomainError("log rate must be positive");
    if (log_rate_hz > 1.0 / dt_physics + 1e-9) {
        throw DomainError("log rate exceeds the physics rate");
    }
    if (kind == PlanKind::Circle && !(radius_m > 0.0)) throw DomainError("radius must be positive");
    if (kind == PlanKind::Square && !(side_m > 0.0)) throw DomainError("side must be positive");
    if (!(speed_mps > 0.0)) throw DomainError("speed must be positive");
}

FlightLog generate_flight(const TrajectoryPlan& plan, const UavParams& params,
                          const NoiseConfig& noise, const ControllerGains& gains) {
    plan.validate();
    params.validate();

    ReferenceGenerator refs(plan);
    Rng noise_rng(noise.seed);

    UavState state;
    const Reference r0 = refs.at(0.0);
    state.x = r0.pos;
    state.v = r0.vel;

    FlightLog log;
    log.source = "sim";

    const long steps_per_log =
        std::lround(1.0 / (plan.log_rate_hz * plan.dt_physics));
    const long total_steps = std::lround(plan.duration_s / plan.dt_physics);
    const Disturbance dist = Disturbance::none();

    Eigen::Vector4d omega = Eigen::Vector4d::Constant(params.hover_rotor_speed());
    for (long i = 0; i <= total_steps; ++i) {
        const double t = static_cast<double>(i) * plan.dt_physics;
        const Reference ref = refs.at(t);

        if ((ref.pos - state.x).norm() > gains.max_pos_error_m) {
            throw NumericalError("controller diverged at step " + std::to_string(i) +
                                 " (position error exceeds bound)");
        }

        if (i % steps_per_log == 0) {
            LogRow row;
            row.t = static_cast<double>(i / steps_per_log) / plan.log_rate_hz;
            row.omega_bar = omega / params.omega_max;
            row.position = state.x;
            if (noise.position_sigma_m > 0.0) {
                for (int j = 0; j < 3; ++j) {
                    row.position[j] += noise.position_sigma_m * noise_rng.gaussian();
                }
            }
            row.quat = rotation_to_quat(state.R);
            log.rows.push_back(row);
        }

        omega = control(state, ref, params, gains);
        try {
            state = step(state, omega, params, dist, t, plan.dt_physics);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at step " + std::to_string(i));
        }
    }
    return log;
}

}  // namespace rotornav
