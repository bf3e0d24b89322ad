#include "rotornav/flightlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rotornav/errors.hpp"
#include "rotornav/rng.hpp"

namespace rotornav {

namespace {

constexpr const char* kHeader = "t,w1,w2,w3,w4,x,y,z,qw,qx,qy,qz";
constexpr int kColumns = 12;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

double parse_double(const std::string& s, std::size_t line, int col) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw ParseError(ParseError::Kind::BadNumber, line,
                         "column " + std::to_string(col + 1) + ": not a number: '" + s + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(ParseError::Kind::BadNumber, line,
                         "column " + std::to_string(col + 1) + ": non-finite value");
    }
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double FlightLog::native_rate_hz() const {
    if (rows.size() < 2) return 0.0;
    const double span = rows.back().t - rows.front().t;
    if (span <= 0.0) return 0.0;
    return static_cast<double>(rows.size() - 1) / span;
}

void FlightLog::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const LogRow& row = rows[i];
        const std::size_t line = i + 2;  // header is line 1
        if (i > 0 && !(row.t > rows[i - 1].t)) {
            throw ParseError(ParseError::Kind::NonMonotonicTime, line,
                             "timestamp not strictly increasing");
        }
        for (int j = 0; j < 4; ++j) {
            if (row.omega_bar[j] < 0.0 || row.omega_bar[j] > 1.0) {
                throw ParseError(ParseError::Kind::RpmRange, line,
                                 "normalized rotor speed w" + std::to_string(j + 1) +
                                     " = " + format_double(row.omega_bar[j]) +
                                     " outside [0, 1]");
            }
        }
        if (std::abs(row.quat.norm() - 1.0) > 1e-6) {
            throw ParseError(ParseError::Kind::QuatNorm, line, "quaternion not unit norm");
        }
    }
}

FlightLog parse_flight_log(std::istream& in, const std::string& source_name,
                           const ParseOptions& opts) {
    FlightLog log;
    log.source = source_name;

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(ParseError::Kind::Schema, 1, "empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw ParseError(ParseError::Kind::Schema, 1,
                         std::string("expected header '") + kHeader + "'");
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (static_cast<int>(fields.size()) != kColumns) {
            throw ParseError(ParseError::Kind::MissingColumn, line_no,
                             "expected " + std::to_string(kColumns) + " columns, got " +
                                 std::to_string(fields.size()));
        }
        LogRow row;
        row.t = parse_double(fields[0], line_no, 0);
        for (int j = 0; j < 4; ++j) row.omega_bar[j] = parse_double(fields[1 + j], line_no, 1 + j);
        for (int j = 0; j < 3; ++j) row.position[j] = parse_double(fields[5 + j], line_no, 5 + j);
        for (int j = 0; j < 4; ++j) row.quat[j] = parse_double(fields[8 + j], line_no, 8 + j);
        if (opts.raw_rpm_omega_max > 0.0) row.omega_bar /= opts.raw_rpm_omega_max;
        log.rows.push_back(row);
    }

    log.validate();
    return log;
}

FlightLog parse_flight_log(const std::filesystem::path& path, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse_flight_log(in, path.filename().string(), opts);
}

void write_flight_log(const FlightLog& log, std::ostream& out) {
    out << kHeader << '\n';
    for (const LogRow& row : log.rows) {
        out << format_double(row.t);
        for (int j = 0; j < 4; ++j) out << ',' << format_double(row.omega_bar[j]);
        for (int j = 0; j < 3; ++j) out << ',' << format_double(row.position[j]);
        for (int j = 0; j < 4; ++j) out << ',' << format_double(row.quat[j]);
        out << '\n';
    }
}

void write_flight_log(const FlightLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_flight_log(log, out);
    if (!out) throw Error("write failed: " + path.string());
}

Eigen::Vector4d quat_slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b, double s) {
    Eigen::Vector4d q1 = b;
    double dot = a.dot(b);
    if (dot < 0.0) {
        q1 = -q1;
        dot = -dot;
    }
    dot = std::min(dot, 1.0);
    const double theta = std::acos(dot);
    Eigen::Vector4d out;
    if (theta < 1e-9) {
        out = (1.0 - s) * a + s * q1;
    } else {
        const double sin_theta = std::sin(theta);
        out = (std::sin((1.0 - s) * theta) / sin_theta) * a +
              (std::sin(s * theta) / sin_theta) * q1;
    }
    out.normalize();
    return out;
}

namespace {

LogRow interp_rows(const LogRow& a, const LogRow& b, double t) {
    LogRow row;
    row.t = t;
    if (std::abs(t - a.t) < 1e-12) {
        row = a;
        row.t = t;
    } else if (std::abs(t - b.t) < 1e-12) {
        row = b;
        row.t = t;
    } else {
        const double s = (t - a.t) / (b.t - a.t);
        row.omega_bar = (1.0 - s) * a.omega_bar + s * b.omega_bar;
        row.position = (1.0 - s) * a.position + s * b.position;
        row.quat = quat_slerp(a.quat, b.quat, s);
    }
    return row;
}

}  // namespace

LogRow sample_at(const FlightLog& log, double t) {
    if (log.rows.size() < 2) throw DomainError("sample_at: log must span at least 2 samples");
    if (t < log.rows.front().t - 1e-12 || t > log.rows.back().t + 1e-12) {
        throw DomainError("sample_at: time outside the log span");
    }
    std::size_t lo = 0, hi = log.rows.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (log.rows[mid].t <= t) lo = mid;
        else hi = mid;
    }
    return interp_rows(log.rows[lo], log.rows[hi], t);
}

FlightLog resample(const FlightLog& log, double rate_hz) {
    if (log.rows.size() < 2) throw DomainError("resample: log must span at least 2 samples");
    if (!(rate_hz > 0.0)) throw DomainError("resample: rate must be positive");
    const double native = log.native_rate_hz();
    if (rate_hz > native * (1.0 + 1e-9)) {
        throw DomainError("resample: requested rate exceeds native rate");
    }

    const double t0 = log.rows.front().t;
    const double span = log.rows.back().t - t0;
    const std::size_t count = static_cast<std::size_t>(std::floor(span * rate_hz + 1e-9)) + 1;
    if (count < 2) throw DomainError("resample: window too short for the requested rate");

    FlightLog out;
    out.source = log.source;
    out.rows.reserve(count);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t0 + static_cast<double>(i) / rate_hz;
        while (seg + 2 < log.rows.size() && log.rows[seg + 1].t <= t) ++seg;
        out.rows.push_back(interp_rows(log.rows[seg], log.rows[seg + 1], t));
    }
    return out;
}

Dataset build_dataset(const std::vector<FlightLog>& logs, std::uint64_t seed) {
    if (logs.empty()) throw DomainError("build_dataset: need at least one log");

    Dataset ds;
    for (const FlightLog& log : logs) {
        const std::size_t n = log.rows.size();
        if (n < 4) {
            throw DomainError("build_dataset: log '" + log.source +
                              "' too short to split (need at least 4 rows)");
        }
        // First 3/5 of the rows train, the rest test; the boundary starts a
        // new segment so no pair crosses it.
        const std::size_t train_rows =
            static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
        const auto make_sequence = [&](std::size_t begin, std::size_t end) {
            Sequence sq;
            sq.source = log.source;
            for (std::size_t k = begin + 1; k < end; ++k) {
                Sample s;
                s.input.prev_position = log.rows[k - 1].position;
                s.input.rpm_normalized = log.rows[k].omega_bar;
                s.input.orientation = log.rows[k].quat;
                s.target = log.rows[k].position;
                sq.samples.push_back(std::move(s));
            }
            return sq;
        };
        ds.train.push_back(make_sequence(0, train_rows));
        ds.test.push_back(make_sequence(train_rows, n));
        ds.meta.sources.push_back(log.source);
        ds.meta.train_rows += train_rows;
        ds.meta.test_rows += n - train_rows;
    }
    ds.meta.sample_rate_hz = logs.front().native_rate_hz();

    // Fisher-Yates over training segments, deterministic in the seed.
    Rng rng(seed);
    for (std::size_t i = ds.train.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(ds.train[i - 1], ds.train[j]);
    }
    return ds;
}

}  // namespace rotornav
