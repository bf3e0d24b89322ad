#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rotornav/errors.hpp"
#include "rotornav/flightlog.hpp"
#include "rotornav/rng.hpp"

using namespace rotornav;

namespace {

FlightLog make_log(std::size_t rows, double rate_hz, std::uint64_t seed) {
    Rng rng(seed);
    FlightLog log;
    log.source = "synthetic";
    Eigen::Vector4d q(0.9, 0.1, -0.2, 0.3);
    q.normalize();
    for (std::size_t i = 0; i < rows; ++i) {
        LogRow row;
        row.t = static_cast<double>(i) / rate_hz;
        for (int j = 0; j < 4; ++j) row.omega_bar[j] = rng.uniform(0.2, 0.8);
        row.position = Eigen::Vector3d(std::sin(0.01 * i), std::cos(0.01 * i), 1.0 + 1e-3 * i);
        row.quat = q;
        log.rows.push_back(row);
    }
    return log;
}

std::string to_csv(const FlightLog& log) {
    std::ostringstream out;
    write_flight_log(log, out);
    return out.str();
}

}  // namespace

TEST_CASE("well-formed fixture parses exactly") {
    const std::string csv =
        "t,w1,w2,w3,w4,x,y,z,qw,qx,qy,qz\n"
        "0,0.5,0.5,0.5,0.5,0,0,1,1,0,0,0\n"
        "0.01,0.6,0.5,0.4,0.5,0.001,0,1,1,0,0,0\n"
        "0.02,0.5,0.5,0.5,0.5,0.002,0,1,1,0,0,0\n";
    std::istringstream in(csv);
    const FlightLog log = parse_flight_log(in, "fixture");
    REQUIRE(log.size() == 3);
    CHECK(log.rows[1].t == 0.01);
    CHECK(log.rows[1].omega_bar[0] == 0.6);
    CHECK(log.rows[2].position.x() == 0.002);
    CHECK(log.rows[0].quat[0] == 1.0);
}

TEST_CASE("parse errors are distinct and name the row") {
    const std::string header = "t,w1,w2,w3,w4,x,y,z,qw,qx,qy,qz\n";
    const std::string good = "0,0.5,0.5,0.5,0.5,0,0,1,1,0,0,0\n";

    SUBCASE("rpm out of range") {
        std::istringstream in(header + good + "0.01,1.2,0.5,0.5,0.5,0,0,1,1,0,0,0\n");
        try {
            parse_flight_log(in, "x");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind == ParseError::Kind::RpmRange);
            CHECK(e.line == 3);
        }
    }
    SUBCASE("duplicate timestamp") {
        std::istringstream in(header + good + good);
        try {
            parse_flight_log(in, "x");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind == ParseError::Kind::NonMonotonicTime);
            CHECK(e.line == 3);
        }
    }
    SUBCASE("missing column") {
        std::istringstream in(header + "0,0.5,0.5,0.5,0.5,0,0,1,1,0,0\n");
        try {
            parse_flight_log(in, "x");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind == ParseError::Kind::MissingColumn);
        }
    }
    SUBCASE("bad number") {
        std::istringstream in(header + "0,0.5,0.5,oops,0.5,0,0,1,1,0,0,0\n");
        try {
            parse_flight_log(in, "x");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind == ParseError::Kind::BadNumber);
        }
    }
    SUBCASE("wrong header") {
        std::istringstream in("time,w1\n");
        CHECK_THROWS_AS(parse_flight_log(in, "x"), ParseError);
    }
    SUBCASE("non-unit quaternion") {
        std::istringstream in(header + "0,0.5,0.5,0.5,0.5,0,0,1,1,0.5,0,0\n");
        try {
            parse_flight_log(in, "x");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.kind == ParseError::Kind::QuatNorm);
        }
    }
}

TEST_CASE("raw rpm mode divides by omega_max") {
    const std::string csv =
        "t,w1,w2,w3,w4,x,y,z,qw,qx,qy,qz\n"
        "0,1100,1100,1100,1100,0,0,1,1,0,0,0\n"
        "0.01,2200,0,1100,1100,0,0,1,1,0,0,0\n";
    std::istringstream in(csv);
    ParseOptions opts;
    opts.raw_rpm_omega_max = 2200.0;
    const FlightLog log = parse_flight_log(in, "raw", opts);
    CHECK(log.rows[0].omega_bar[0] == 0.5);
    CHECK(log.rows[1].omega_bar[0] == 1.0);
    CHECK(log.rows[1].omega_bar[1] == 0.0);
}

TEST_CASE("write then parse is the identity, bit for bit") {
    const FlightLog log = make_log(200, 100.0, 77);
    std::istringstream in(to_csv(log));
    const FlightLog back = parse_flight_log(in, log.source);
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(back.rows[i].t == log.rows[i].t);
        CHECK(back.rows[i].omega_bar == log.rows[i].omega_bar);
        CHECK(back.rows[i].position == log.rows[i].position);
        CHECK(back.rows[i].quat == log.rows[i].quat);
    }
    // And the bytes are stable through a second round.
    CHECK(to_csv(back) == to_csv(log));
}

TEST_CASE("resample at the native rate is the identity") {
    const FlightLog log = make_log(150, 100.0, 3);
    const FlightLog out = resample(log, 100.0);
    REQUIRE(out.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(std::abs(out.rows[i].t - log.rows[i].t) < 1e-12);
        CHECK((out.rows[i].position - log.rows[i].position).norm() < 1e-12);
        CHECK((out.rows[i].omega_bar - log.rows[i].omega_bar).norm() < 1e-12);
    }
    CHECK(out.rows.front().position == log.rows.front().position);
    CHECK(out.rows.back().position == log.rows.back().position);
}

TEST_CASE("two samples interpolate at the arithmetic midpoint") {
    FlightLog log;
    LogRow a, b;
    a.t = 0.0;
    a.position = Eigen::Vector3d(1, 2, 3);
    a.omega_bar.setConstant(0.2);
    b.t = 0.1;
    b.position = Eigen::Vector3d(3, 2, 1);
    b.omega_bar.setConstant(0.6);
    log.rows = {a, b};
    const LogRow mid = sample_at(log, 0.05);
    CHECK((mid.position - Eigen::Vector3d(2, 2, 2)).norm() < 1e-12);
    CHECK(std::abs(mid.omega_bar[0] - 0.4) < 1e-12);
    CHECK_THROWS_AS(sample_at(log, 0.2), DomainError);
}

TEST_CASE("quaternion midpoint by slerp halves the rotation angle") {
    FlightLog log;
    LogRow a, b;
    a.t = 0.0;
    b.t = 0.1;
    a.quat = Eigen::Vector4d(1, 0, 0, 0);
    // 90 degrees about z.
    b.quat = Eigen::Vector4d(std::cos(M_PI / 4), 0, 0, std::sin(M_PI / 4));
    log.rows = {a, b};
    const LogRow mid = sample_at(log, 0.05);
    // Midpoint should be a 45 degree rotation about z.
    const Eigen::Vector4d want(std::cos(M_PI / 8), 0, 0, std::sin(M_PI / 8));
    CHECK((mid.quat - want).norm() < 1e-9);

    // Antipodal representations take the short way around.
    const Eigen::Vector4d flipped = quat_slerp(a.quat, -b.quat, 0.5);
    CHECK(std::min((flipped - want).norm(), (flipped + want).norm()) < 1e-9);
}

TEST_CASE("resample rejects upsampling and short windows") {
    const FlightLog log = make_log(50, 100.0, 9);
    CHECK_THROWS_AS(resample(log, 250.0), DomainError);
    FlightLog tiny;
    tiny.rows = {log.rows[0]};
    CHECK_THROWS_AS(resample(tiny, 100.0), DomainError);
}

TEST_CASE("build_dataset splits 3:2 by rows") {
    const FlightLog log = make_log(500, 100.0, 31);
    const Dataset ds = build_dataset({log}, 5);
    CHECK(ds.meta.train_rows == 300);
    CHECK(ds.meta.test_rows == 200);
    REQUIRE(ds.train.size() == 1);
    REQUIRE(ds.test.size() == 1);
    // Pairs: one fewer than rows per contiguous segment.
    CHECK(ds.train[0].samples.size() == 299);
    CHECK(ds.test[0].samples.size() == 199);
}

TEST_CASE("build_dataset is deterministic in the seed") {
    std::vector<FlightLog> logs;
    for (int i = 0; i < 5; ++i) logs.push_back(make_log(120 + 7 * i, 100.0, 1000 + i));
    const Dataset a = build_dataset(logs, 42);
    const Dataset b = build_dataset(logs, 42);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].source == b.train[i].source);
        CHECK(a.train[i].samples.size() == b.train[i].samples.size());
    }
}

TEST_CASE("every pair aligns input position with the one-step-ahead target") {
    std::vector<FlightLog> logs = {make_log(230, 100.0, 8), make_log(173, 100.0, 9)};
    const Dataset ds = build_dataset(logs, 3);
    auto audit = [&](const std::vector<Sequence>& part) {
        for (const Sequence& seq : part) {
            for (std::size_t k = 1; k < seq.samples.size(); ++k) {
                // The previous sample's target is this sample's input position:
                // consecutive rows of the same contiguous segment.
                CHECK(seq.samples[k].input.prev_position == seq.samples[k - 1].target);
            }
        }
    };
    audit(ds.train);
    audit(ds.test);

    // Targets sit one step ahead of the input position in the source log.
    const FlightLog& log = logs[0];
    for (const Sequence& seq : ds.test) {
        if (seq.source != log.source) continue;
    }
    const Dataset single = build_dataset({logs[0]}, 0);
    const std::size_t split = 138;  // round(0.6 * 230)
    CHECK(single.train[0].samples.front().input.prev_position == log.rows[0].position);
    CHECK(single.train[0].samples.front().target == log.rows[1].position);
    CHECK(single.test[0].samples.front().input.prev_position == log.rows[split].position);
    CHECK(single.test[0].samples.front().target == log.rows[split + 1].position);
}

TEST_CASE("build_dataset rejects too-short logs") {
    const FlightLog log = make_log(3, 100.0, 1);
    CHECK_THROWS_AS(build_dataset({log}, 0), DomainError);
    CHECK_THROWS_AS(build_dataset({}, 0), DomainError);
}
