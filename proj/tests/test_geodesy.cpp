#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rotornav/errors.hpp"
#include "rotornav/geodesy.hpp"
#include "rotornav/rng.hpp"

using namespace rotornav;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
}  // namespace

TEST_CASE("geodetic_to_ecef canonical points") {
    const EcefCoord equator = geodetic_to_ecef({0, 0, 0});
    CHECK(equator.x == doctest::Approx(Wgs84::a).epsilon(1e-12));
    CHECK(std::abs(equator.y) < 1e-9);
    CHECK(std::abs(equator.z) < 1e-9);

    // North pole at zero altitude sits at the semi-minor axis.
    const EcefCoord pole = geodetic_to_ecef({kPi / 2, 0.3, 0});
    CHECK(std::abs(pole.x) < 1e-8);
    CHECK(std::abs(pole.y) < 1e-8);
    CHECK(pole.z == doctest::Approx(Wgs84::b).epsilon(1e-12));
}

TEST_CASE("geodetic_to_ecef matches independent transcription") {
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        const GeodeticCoord g{rng.uniform(-1.5, 1.5), rng.uniform(-3.1, 3.1),
                              rng.uniform(-5000, 50000)};
        const EcefCoord c = geodetic_to_ecef(g);
        const auto ref = oracles::enu_to_ecef_reference(0, 0, 0, g.lat_rad, g.lon_rad, g.alt_m);
        CHECK(std::abs(c.x - ref[0]) < 1e-6);
        CHECK(std::abs(c.y - ref[1]) < 1e-6);
        CHECK(std::abs(c.z - ref[2]) < 1e-6);
    }
}

TEST_CASE("ecef_to_geodetic canonical points") {
    const GeodeticCoord g1 = ecef_to_geodetic({Wgs84::a, 0, 0});
    CHECK(std::abs(g1.lat_rad) < 1e-12);
    CHECK(std::abs(g1.lon_rad) < 1e-12);
    CHECK(std::abs(g1.alt_m) < 1e-8);

    const GeodeticCoord g2 = ecef_to_geodetic({0, Wgs84::a, 0});
    CHECK(std::abs(g2.lat_rad) < 1e-12);
    CHECK(g2.lon_rad == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(std::abs(g2.alt_m) < 1e-8);
}

TEST_CASE("round-trip geodetic -> ecef -> geodetic") {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        const GeodeticCoord g{rng.uniform(-kPi / 2, kPi / 2), rng.uniform(-kPi, kPi),
                              rng.uniform(-5000, 50000)};
        const GeodeticCoord back = ecef_to_geodetic(geodetic_to_ecef(g));
        CHECK(std::abs(back.lat_rad - g.lat_rad) < 1e-9);
        // Longitude is undefined at the exact poles.
        if (std::abs(g.lat_rad) < kPi / 2 - 1e-7) {
            double dlon = back.lon_rad - g.lon_rad;
            if (dlon > kPi) dlon -= 2 * kPi;
            if (dlon < -kPi) dlon += 2 * kPi;
            CHECK(std::abs(dlon) < 1e-9);
        }
        CHECK(std::abs(back.alt_m - g.alt_m) < 1e-6);
    }
}

TEST_CASE("half-angle longitude equals quadrant-correct arctangent") {
    // Points within ~0.01 rad of the +-pi branch cut are excluded: there the
    // half-angle denominator X + sqrt(X^2 + Y^2) cancels and the printed
    // formula itself loses precision.
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
        const GeodeticCoord g{rng.uniform(-1.4, 1.4), rng.uniform(-kPi + 0.01, kPi - 0.01),
                              rng.uniform(-5000, 50000)};
        const EcefCoord c = geodetic_to_ecef(g);
        const double lam_half = 2.0 * std::atan2(c.y, c.x + std::hypot(c.x, c.y));
        const double lam = ecef_to_geodetic(c).lon_rad;
        CHECK(std::abs(lam_half - lam) < 1e-12);
    }
}

TEST_CASE("enu_to_ecef zero offset returns the origin") {
    const GeodeticCoord origin{0.7, -1.1, 430.0};
    const EcefCoord o = geodetic_to_ecef(origin);
    const EcefCoord c = enu_to_ecef({0, 0, 0}, origin);
    CHECK(std::abs(c.x - o.x) < 1e-9);
    CHECK(std::abs(c.y - o.y) < 1e-9);
    CHECK(std::abs(c.z - o.z) < 1e-9);
}

TEST_CASE("up aligns with +X at the equator / prime meridian") {
    const EcefCoord base = geodetic_to_ecef({0, 0, 0});
    const EcefCoord c = enu_to_ecef({0, 0, 1}, {0, 0, 0});
    CHECK(c.x - base.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(c.y - base.y) < 1e-12);
    CHECK(std::abs(c.z - base.z) < 1e-12);
}

TEST_CASE("enu_to_ecef matches the textbook rotation") {
    const GeodeticCoord origin{45.0 * kDeg, 30.0 * kDeg, 100.0};
    const EcefCoord c = enu_to_ecef({100, 200, 50}, origin);
    const auto ref = oracles::enu_to_ecef_reference(100, 200, 50, origin.lat_rad,
                                                    origin.lon_rad, origin.alt_m);
    CHECK(std::abs(c.x - ref[0]) < 1e-6);
    CHECK(std::abs(c.y - ref[1]) < 1e-6);
    CHECK(std::abs(c.z - ref[2]) < 1e-6);
}

TEST_CASE("enu_to_ecef is rigid") {
    Rng rng(13);
    const GeodeticCoord origin{0.5, 2.0, 900.0};
    for (int i = 0; i < 1000; ++i) {
        const EnuCoord p1{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-50, 50)};
        const EnuCoord p2{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-50, 50)};
        const EcefCoord c1 = enu_to_ecef(p1, origin);
        const EcefCoord c2 = enu_to_ecef(p2, origin);
        const double d_enu = std::sqrt((p1.e - p2.e) * (p1.e - p2.e) +
                                       (p1.n - p2.n) * (p1.n - p2.n) +
                                       (p1.u - p2.u) * (p1.u - p2.u));
        const double d_ecef = std::sqrt((c1.x - c2.x) * (c1.x - c2.x) +
                                        (c1.y - c2.y) * (c1.y - c2.y) +
                                        (c1.z - c2.z) * (c1.z - c2.z));
        CHECK(std::abs(d_ecef - d_enu) <= 1e-9 * std::max(1.0, d_enu));
    }
}

TEST_CASE("enu_to_geodetic composition") {
    const GeodeticCoord origin{0.3, 1.2, 77.0};
    const GeodeticCoord same = enu_to_geodetic({0, 0, 0}, origin);
    CHECK(std::abs(same.lat_rad - origin.lat_rad) < 1e-12);
    CHECK(std::abs(same.lon_rad - origin.lon_rad) < 1e-12);
    CHECK(std::abs(same.alt_m - origin.alt_m) < 1e-8);

    // Pure up keeps the horizontal coordinates.
    const GeodeticCoord up = enu_to_geodetic({0, 0, 10}, origin);
    CHECK(std::abs(up.lat_rad - origin.lat_rad) < 1e-12);
    CHECK(std::abs(up.lon_rad - origin.lon_rad) < 1e-12);
    CHECK(up.alt_m - origin.alt_m == doctest::Approx(10.0).epsilon(1e-9));

    // 100 m east at the equator shifts longitude by ~100/a.
    const GeodeticCoord east = enu_to_geodetic({100, 0, 0}, {0, 0, 0});
    CHECK(std::abs(east.lon_rad - 100.0 / Wgs84::a) < 1e-9);
}

TEST_CASE("geodetic_to_enu inverts enu_to_geodetic") {
    Rng rng(17);
    const GeodeticCoord origin{-0.4, 2.9, 120.0};
    for (int i = 0; i < 1000; ++i) {
        const EnuCoord p{rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-100, 100)};
        const EnuCoord back = geodetic_to_enu(enu_to_geodetic(p, origin), origin);
        CHECK(std::abs(back.e - p.e) < 1e-6);
        CHECK(std::abs(back.n - p.n) < 1e-6);
        CHECK(std::abs(back.u - p.u) < 1e-6);
    }
}

TEST_CASE("latitude and longitude stay in range") {
    Rng rng(19);
    for (int i = 0; i < 5000; ++i) {
        const EcefCoord c{rng.uniform(-2 * Wgs84::a, 2 * Wgs84::a),
                          rng.uniform(-2 * Wgs84::a, 2 * Wgs84::a),
                          rng.uniform(-2 * Wgs84::a, 2 * Wgs84::a)};
        if (std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z) < 2e6) continue;
        const GeodeticCoord g = ecef_to_geodetic(c);
        CHECK(g.lat_rad >= -kPi / 2);
        CHECK(g.lat_rad <= kPi / 2);
        CHECK(g.lon_rad > -kPi - 1e-15);
        CHECK(g.lon_rad <= kPi);
    }
}

TEST_CASE("pole handling and geocenter rejection") {
    const GeodeticCoord north = ecef_to_geodetic({0, 0, Wgs84::b + 5.0});
    CHECK(north.lat_rad == doctest::Approx(kPi / 2));
    CHECK(north.lon_rad == 0.0);
    CHECK(north.alt_m == doctest::Approx(5.0).epsilon(1e-6));

    const GeodeticCoord south = ecef_to_geodetic({0, 0, -Wgs84::b - 2.0});
    CHECK(south.lat_rad == doctest::Approx(-kPi / 2));

    CHECK_THROWS_AS(ecef_to_geodetic({10.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(geodetic_to_ecef({2.0, 0.0, 0.0}), DomainError);  // latitude > pi/2
}
