#pragma once

#include <cmath>

namespace uemr::geo {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kDeg = kPi / 180.0;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 unit() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
};

// Earth-centred Earth-fixed position, metres.
using EcefVector = Vec3;

struct GeodeticCoord {
  double lat_deg = 0.0;
  double lon_deg = 0.0;   // normalised to (-180, 180]
  double height_m = 0.0;  // ellipsoidal
};

struct Wgs84 {
  double a_m = 6378137.0;
  double f = 1.0 / 298.257223563;
  double b_m() const { return a_m * (1.0 - f); }
  double e2() const { return f * (2.0 - f); }
};

struct ObservatorySite {
  double lat_deg = -26.7039;
  double lon_deg = 116.6707;
  double height_m = 0.0;
  Wgs84 ellipsoid{};
  EcefVector ecef() const;
};

enum class IlluminationState { Illuminated, Eclipsed };

struct IlluminationTag {
  IlluminationState state = IlluminationState::Illuminated;
  double p_parallel_m = 0.0;  // projection of the satellite position on the Sun axis
  double p_perp_m = 0.0;      // distance from the Sun-Earth axis
  GeodeticCoord subsat{};     // sub-satellite point (ellipsoidal height = satellite altitude)
};

// Shadow cylinder radius: mean equatorial radius, not the ellipsoid.
inline constexpr double kEarthShadowRadiusM = 6378137.0;

// Topocentric az/el/range -> local east-north-up vector, km.
Vec3 enu_from_azel(double azimuth_deg, double elevation_deg, double range_km);

// Local ENU (km) at the site -> ECEF position (m).
EcefVector enu_to_ecef(const Vec3& enu_km, const ObservatorySite& site);

EcefVector geodetic_to_ecef(const GeodeticCoord& coord, const Wgs84& ell = {});

// Iterative inverse; converges to |dlat| < 1e-12 rad within 10 iterations for
// any LEO-scale input, throws otherwise.
GeodeticCoord ecef_to_geodetic(const EcefVector& ecef, const Wgs84& ell = {});

// Greenwich Mean Sidereal Time, radians in [0, 2pi). UT1 = UTC.
double gmst_rad(double epoch_unix);

// Apparent solar position in ECEF from the low-precision almanac series,
// scaled to metres (~1 AU). Direction good to ~0.01 deg over 1990-2060.
EcefVector solar_position_ecef(double epoch_unix);

// Cylindrical shadow test. Illuminated iff p_parallel > 0 or p_perp > radius;
// boundary equality counts as eclipsed. Scale-invariant in sun_ecef.
IlluminationTag illumination_state(const EcefVector& sat_ecef,
                                   const EcefVector& sun_ecef,
                                   double shadow_radius_m = kEarthShadowRadiusM);

struct TagParams {
  ObservatorySite site{};
  double shadow_radius_m = kEarthShadowRadiusM;
};

}  // namespace uemr::geo
