#include "rotornav/replay.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rotornav/errors.hpp"
#include "rotornav/rng.hpp"
#include "rotornav/uav_sim.hpp"

namespace rotornav {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double uniform_dt(const FlightLog& log) {
    if (log.rows.size() < 3) throw DomainError("replay: log must span at least 3 samples");
    const double dt = (log.rows.back().t - log.rows.front().t) /
                      static_cast<double>(log.rows.size() - 1);
    for (std::size_t i = 1; i < log.rows.size(); ++i) {
        if (std::abs(log.rows[i].t - log.rows[i - 1].t - dt) > 1e-6) {
            throw DomainError("replay: log is not uniformly sampled; resample it first");
        }
    }
    return dt;
}

// Second central differences of the logged positions; ends copied inward.
std::vector<Eigen::Vector3d> synthesize_accel(const FlightLog& log, double dt) {
    const std::size_t n = log.rows.size();
    std::vector<Eigen::Vector3d> accel(n, Eigen::Vector3d::Zero());
    for (std::size_t k = 1; k + 1 < n; ++k) {
        accel[k] = (log.rows[k + 1].position - 2.0 * log.rows[k].position +
                    log.rows[k - 1].position) /
                   (dt * dt);
    }
    if (n >= 3) {
        accel[0] = accel[1];
        accel[n - 1] = accel[n - 2];
    }
    return accel;
}

Matrix6d white_accel_q(double q_accel, double dt) {
    Matrix6d q = Matrix6d::Zero();
    const double dt2 = dt * dt;
    q.topLeftCorner<3, 3>() = (q_accel * dt2 * dt2 / 4.0) * Eigen::Matrix3d::Identity();
    q.topRightCorner<3, 3>() = (q_accel * dt2 * dt / 2.0) * Eigen::Matrix3d::Identity();
    q.bottomLeftCorner<3, 3>() = q.topRightCorner<3, 3>();
    q.bottomRightCorner<3, 3>() = (q_accel * dt2) * Eigen::Matrix3d::Identity();
    return q;
}

}  // namespace

FusionReport replay_with_measurements(const FlightLog& log, const MeasurementFn& source,
                                      const GeodeticCoord& origin, const ReplayConfig& cfg,
                                      const StepHook& after_step) {
    const double dt = uniform_dt(log);
    origin.validate();
    if (cfg.gps_divisor < 1) throw DomainError("replay: gps_divisor must be >= 1");

    const std::vector<Eigen::Vector3d> accel = synthesize_accel(log, dt);
    Rng imu_rng(cfg.noise_seed);

    EkfState state;
    state.p = log.rows.front().position;
    state.v = (log.rows[1].position - log.rows[0].position) / dt;
    state.P = Matrix6d::Zero();
    state.P.topLeftCorner<3, 3>() = cfg.p0_pos * Eigen::Matrix3d::Identity();
    state.P.bottomRightCorner<3, 3>() = cfg.p0_vel * Eigen::Matrix3d::Identity();

    const Matrix6d q_process = white_accel_q(cfg.q_accel, dt);
    const Eigen::Vector3d g_world(0, 0, -cfg.gravity_mps2);

    FusionReport report;
    double pred_sq = 0.0;
    std::size_t pred_count = 0;
    double fused_sq = 0.0;
    double nis_sum = 0.0;

    for (std::size_t k = 1; k < log.rows.size(); ++k) {
        const LogRow& row = log.rows[k];

        ImuSample imu;
        imu.t = log.rows[k - 1].t;
        imu.quat = log.rows[k - 1].quat;
        const Eigen::Matrix3d r = quat_to_rotation(imu.quat);
        Eigen::Vector3d f_body = r.transpose() * (accel[k - 1] - g_world);
        if (cfg.accel_noise_sigma > 0.0) {
            for (int i = 0; i < 3; ++i) f_body[i] += cfg.accel_noise_sigma * imu_rng.gaussian();
        }
        imu.accel_body = f_body;
        state = predict(state, imu, dt, q_process, cfg.gravity_mps2);

        const std::optional<Eigen::Vector3d> est = source(k, row);
        Eigen::Vector3d pred_point = est.value_or(state.p);
        if (est) {
            pred_sq += (*est - row.position).squaredNorm();
            ++pred_count;
            if (k % static_cast<std::size_t>(cfg.gps_divisor) == 0) {
                GpsMeasurement z;
                z.t = row.t;
                z.zeta = enu_to_geodetic(EnuCoord{est->x(), est->y(), est->z()}, origin);
                z.sigma_m = cfg.meas_sigma_m;
                const GpsUpdateResult res = update_gps(state, z, origin, cfg.gate_sigma);
                if (res.accepted) {
                    state = res.state;
                    nis_sum += res.nis;
                    ++report.nis_count;
                } else {
                    ++report.rejected_count;
                }
            }
        }

        report.t.push_back(row.t);
        report.truth.push_back(row.position);
        report.pred.push_back(pred_point);
        report.fused.push_back(state.p);
        fused_sq += (state.p - row.position).squaredNorm();
        if (after_step) after_step(k, state);
    }

    const double steps = static_cast<double>(report.t.size());
    report.rmse_fused = std::sqrt(fused_sq / steps);
    report.rmse_pred =
        pred_count > 0 ? std::sqrt(pred_sq / static_cast<double>(pred_count)) : 0.0;
    report.nis_mean = report.nis_count > 0 ? nis_sum / report.nis_count : 0.0;
    return report;
}

FusionReport replay(const FlightLog& log, const MnnNetwork& net, const GeodeticCoord& origin,
                    const ReplayConfig& cfg) {
    MnnNetwork model = net;
    model.reset_memory();
    if (log.rows.empty()) throw DomainError("replay: empty log");

    Eigen::Vector3d prev_pos = log.rows.front().position;
    auto source = [&model, &prev_pos, &cfg](std::size_t, const LogRow& row) {
        InputVector in;
        in.prev_position = prev_pos;
        in.rpm_normalized = row.omega_bar;
        in.orientation = row.quat;
        const Eigen::Vector3d y = model.forward(in);
        if (cfg.feedback == FeedbackMode::Prediction) prev_pos = y;
        return std::optional<Eigen::Vector3d>(y);
    };

    if (cfg.feedback == FeedbackMode::Prediction) {
        return replay_with_measurements(log, source, origin, cfg);
    }

    // Fused feedback: the next input takes the filter position this step
    // ended in.
    auto take_fused = [&prev_pos](std::size_t, const EkfState& state) { prev_pos = state.p; };
    return replay_with_measurements(log, source, origin, cfg, take_fused);
}

void write_fusion_csv(const FusionReport& report, std::ostream& out) {
    out << "t,truth_x,truth_y,truth_z,pred_x,pred_y,pred_z,fused_x,fused_y,fused_z\n";
    for (std::size_t i = 0; i < report.t.size(); ++i) {
        out << fmt(report.t[i]);
        for (int j = 0; j < 3; ++j) out << ',' << fmt(report.truth[i][j]);
        for (int j = 0; j < 3; ++j) out << ',' << fmt(report.pred[i][j]);
        for (int j = 0; j < 3; ++j) out << ',' << fmt(report.fused[i][j]);
        out << '\n';
    }
    out << "# rmse_pred_m," << fmt(report.rmse_pred) << '\n';
    out << "# rmse_fused_m," << fmt(report.rmse_fused) << '\n';
    out << "# rejected_count," << report.rejected_count << '\n';
    out << "# nis_mean," << fmt(report.nis_mean) << '\n';
}

void write_fusion_csv(const FusionReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_fusion_csv(report, out);
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace rotornav
