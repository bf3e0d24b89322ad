#pragma once

namespace rotornav {

// Local East-North-Up offsets (meters) from a geodetic origin.
struct EnuCoord {
    double e = 0.0;
    double n = 0.0;
    double u = 0.0;
};

// Earth-Centered Earth-Fixed coordinates, meters.
struct EcefCoord {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Latitude/longitude in radians, ellipsoidal altitude in meters.
struct GeodeticCoord {
    double lat_rad = 0.0;  // [-pi/2, pi/2]
    double lon_rad = 0.0;  // (-pi, pi]
    double alt_m = 0.0;

    void validate() const;  // throws DomainError if out of range
};

// WGS-84 datum constants.
struct Wgs84 {
    static constexpr double a = 6378137.0;               // semi-major axis, m
    static constexpr double f = 1.0 / 298.257223563;     // flattening
    static constexpr double e2 = f * (2.0 - f);          // first eccentricity squared
    static constexpr double b = a * (1.0 - f);           // semi-minor axis, m
};

EcefCoord geodetic_to_ecef(const GeodeticCoord& g);

// Closed-form ECEF -> geodetic (Vermeille's direct solution). Throws
// DomainError for inputs near the geocenter where the solution degenerates.
GeodeticCoord ecef_to_geodetic(const EcefCoord& c);

EcefCoord enu_to_ecef(const EnuCoord& p, const GeodeticCoord& origin);
EnuCoord ecef_to_enu(const EcefCoord& c, const GeodeticCoord& origin);

GeodeticCoord enu_to_geodetic(const EnuCoord& p, const GeodeticCoord& origin);
EnuCoord geodetic_to_enu(const GeodeticCoord& g, const GeodeticCoord& origin);

}  // namespace rotornav
