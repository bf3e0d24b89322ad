#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rotornav/mnn.hpp"

namespace rotornav {

// One log record: timestamp, four normalized rotor speeds, position, and
// orientation quaternion (w, x, y, z). Twelve CSV columns:
//   t,w1,w2,w3,w4,x,y,z,qw,qx,qy,qz
struct LogRow {
    double t = 0.0;
    Eigen::Vector4d omega_bar = Eigen::Vector4d::Zero();
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector4d quat = Eigen::Vector4d(1, 0, 0, 0);
};

struct FlightLog {
    std::vector<LogRow> rows;
    std::string source;  // file name or plan label, for diagnostics

    std::size_t size() const { return rows.size(); }
    double duration() const { return rows.empty() ? 0.0 : rows.back().t - rows.front().t; }
    // Average sample rate over the log span.
    double native_rate_hz() const;

    void validate() const;  // monotonic t, omega_bar in [0,1], unit quats
};

struct ParseOptions {
    // When > 0, the rotor-speed columns hold raw rad/s and are divided by
    // this value at ingestion.
    double raw_rpm_omega_max = 0.0;
};

FlightLog parse_flight_log(std::istream& in, const std::string& source_name,
                           const ParseOptions& opts = {});
FlightLog parse_flight_log(const std::filesystem::path& path, const ParseOptions& opts = {});

void write_flight_log(const FlightLog& log, std::ostream& out);
void write_flight_log(const FlightLog& log, const std::filesystem::path& path);

// Interpolated row at time t (must lie inside the log span): linear for
// position and rotor speeds, slerp for quaternions. Exact hits return the
// stored row.
LogRow sample_at(const FlightLog& log, double t);

// Resamples onto a uniform grid starting at the first timestamp using
// sample_at. rate_hz must not exceed the native rate.
FlightLog resample(const FlightLog& log, double rate_hz);

// Unit-quaternion spherical interpolation, shortest arc, s in [0, 1].
Eigen::Vector4d quat_slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b, double s);

// One supervised pair: input at step k, target = position at step k+1 within
// the same contiguous segment.
struct Sample {
    InputVector input;
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
};

// A contiguous run of samples; memory state is reset at its start.
struct Sequence {
    std::vector<Sample> samples;
    std::string source;
};

struct DatasetMeta {
    std::vector<std::string> sources;
    double sample_rate_hz = 0.0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

struct Dataset {
    std::vector<Sequence> train;
    std::vector<Sequence> test;
    DatasetMeta meta;
};

// Splits every log contiguously 3:2 by row count (first part train, rest
// test) and builds one-step-ahead pairs per segment. The seed shuffles the
// order of the training segments; rows within a segment stay temporal.
Dataset build_dataset(const std::vector<FlightLog>& logs, std::uint64_t seed);

}  // namespace rotornav
