#include "rotornav/geodesy.hpp"

#include <cmath>

#include "rotornav/errors.hpp"

namespace rotornav {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Below this distance from the Earth's spin axis the longitude is undefined
// and the point is treated as polar.
constexpr double kPoleAxisDistance = 1e-9;  // m

// Inputs closer to the geocenter than this are rejected; the closed-form
// reverse transform has a singular zone deep inside the ellipsoid.
constexpr double kMinGeocentricRadius = 1e6;  // m

double sq(double v) { return v * v; }

}  // namespace

void GeodeticCoord::validate() const {
    if (!(std::isfinite(lat_rad) && std::isfinite(lon_rad) && std::isfinite(alt_m))) {
        throw DomainError("geodetic coordinate has non-finite component");
    }
    if (lat_rad < -kPi / 2 - 1e-12 || lat_rad > kPi / 2 + 1e-12) {
        throw DomainError("latitude out of [-pi/2, pi/2]");
    }
    if (lon_rad <= -kPi - 1e-12 || lon_rad > kPi + 1e-12) {
        throw DomainError("longitude out of (-pi, pi]");
    }
}

EcefCoord geodetic_to_ecef(const GeodeticCoord& g) {
    g.validate();
    const double sin_lat = std::sin(g.lat_rad);
    const double cos_lat = std::cos(g.lat_rad);
    // Prime-vertical radius of curvature.
    const double n = Wgs84::a / std::sqrt(1.0 - Wgs84::e2 * sq(sin_lat));
    EcefCoord c;
    c.x = (n + g.alt_m) * cos_lat * std::cos(g.lon_rad);
    c.y = (n + g.alt_m) * cos_lat * std::sin(g.lon_rad);
    c.z = (n * (1.0 - Wgs84::e2) + g.alt_m) * sin_lat;
    return c;
}

// Vermeille's closed-form solution. The final expressions are
//   phi = 2 atan(Z / (D + sqrt(D^2 + Z^2)))
//   lam = 2 atan(Y / (X + sqrt(X^2 + Y^2)))  == atan2(Y, X)
//   alt = ((k + e^2 - 1) / k) sqrt(D^2 + Z^2)
// with D = k rad / (k + e^2). k is rearranged as uv / (sqrt(uv + w^2) + w)
// to avoid cancellation when u + v is small.
GeodeticCoord ecef_to_geodetic(const EcefCoord& c) {
    if (!(std::isfinite(c.x) && std::isfinite(c.y) && std::isfinite(c.z))) {
        throw DomainError("ecef coordinate has non-finite component");
    }
    const double rad = std::hypot(c.x, c.y);
    if (std::hypot(rad, c.z) < kMinGeocentricRadius) {
        throw DomainError("ecef point too close to the geocenter for the closed-form inverse");
    }

    const double e2 = Wgs84::e2;
    const double e4 = sq(e2);
    const double p = sq(rad / Wgs84::a);
    const double q = (1.0 - e2) * sq(c.z / Wgs84::a);
    const double r = (p + q - e4) / 6.0;

    // s and t scaled by r^3 and r to avoid division by zero at r ~ 0.
    const double big_s = e4 * p * q / 4.0;
    const double r3 = r * r * r;
    const double disc = big_s * (2.0 * r3 + big_s);

    double u = r;
    if (disc >= 0.0) {
        double t3 = r3 + big_s;
        t3 += (t3 < 0.0 ? -std::sqrt(disc) : std::sqrt(disc));
        const double t = std::cbrt(t3);
        u += t + (t != 0.0 ? r * r / t : 0.0);
    } else {
        // Complex cube root; the sum of roots is real.
        const double ang = std::atan2(std::sqrt(-disc), r3 + big_s);
        u += 2.0 * std::abs(r) * std::cos((2.0 * kPi + ang) / 3.0);
    }

    const double v = std::sqrt(sq(u) + e4 * q);
    const double uv = (u < 0.0 ? e4 * q / (v - u) : u + v);
    const double w = std::max(0.0, e2 * (uv - q) / (2.0 * v));
    const double k = uv / (std::sqrt(uv + sq(w)) + w);
    const double d = k * rad / (k + e2);

    GeodeticCoord g;
    const double hd = std::hypot(d, c.z);
    if (rad < kPoleAxisDistance) {
        g.lat_rad = (c.z >= 0.0 ? kPi / 2 : -kPi / 2);
        g.lon_rad = 0.0;
    } else {
        g.lat_rad = 2.0 * std::atan2(c.z, d + hd);
        g.lon_rad = std::atan2(c.y, c.x);
    }
    g.alt_m = (k + e2 - 1.0) / k * hd;
    return g;
}

EcefCoord enu_to_ecef(const EnuCoord& p, const GeodeticCoord& origin) {
    const EcefCoord o = geodetic_to_ecef(origin);
    const double sin_lat = std::sin(origin.lat_rad), cos_lat = std::cos(origin.lat_rad);
    const double sin_lon = std::sin(origin.lon_rad), cos_lon = std::cos(origin.lon_rad);
    EcefCoord c;
    c.x = o.x - sin_lon * p.e - sin_lat * cos_lon * p.n + cos_lat * cos_lon * p.u;
    c.y = o.y + cos_lon * p.e - sin_lat * sin_lon * p.n + cos_lat * sin_lon * p.u;
    c.z = o.z + cos_lat * p.n + sin_lat * p.u;
    return c;
}

EnuCoord ecef_to_enu(const EcefCoord& c, const GeodeticCoord& origin) {
    const EcefCoord o = geodetic_to_ecef(origin);
    const double dx = c.x - o.x, dy = c.y - o.y, dz = c.z - o.z;
    const double sin_lat = std::sin(origin.lat_rad), cos_lat = std::cos(origin.lat_rad);
    const double sin_lon = std::sin(origin.lon_rad), cos_lon = std::cos(origin.lon_rad);
    EnuCoord p;
    p.e = -sin_lon * dx + cos_lon * dy;
    p.n = -sin_lat * cos_lon * dx - sin_lat * sin_lon * dy + cos_lat * dz;
    p.u = cos_lat * cos_lon * dx + cos_lat * sin_lon * dy + sin_lat * dz;
    return p;
}

GeodeticCoord enu_to_geodetic(const EnuCoord& p, const GeodeticCoord& origin) {
    return ecef_to_geodetic(enu_to_ecef(p, origin));
}

EnuCoord geodetic_to_enu(const GeodeticCoord& g, const GeodeticCoord& origin) {
    return ecef_to_enu(geodetic_to_ecef(g), origin);
}

}  // namespace rotornav
