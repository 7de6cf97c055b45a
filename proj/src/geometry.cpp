#include "uemr/geometry.hpp"

#include <stdexcept>

#include "uemr/timeutil.hpp"

namespace uemr::geo {

EcefVector ObservatorySite::ecef() const {
  return geodetic_to_ecef({lat_deg, lon_deg, height_m}, ellipsoid);
}

Vec3 enu_from_azel(double azimuth_deg, double elevation_deg, double range_km) {
  if (range_km <= 0.0) throw std::invalid_argument("enu_from_azel: range must be > 0");
  const double a = azimuth_deg * kDeg;
  const double e = elevation_deg * kDeg;
  const double ce = std::cos(e);
  return {range_km * ce * std::sin(a), range_km * ce * std::cos(a),
          range_km * std::sin(e)};
}

EcefVector enu_to_ecef(const Vec3& enu_km, const ObservatorySite& site) {
  const double phi = site.lat_deg * kDeg;
  const double lam = site.lon_deg * kDeg;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double sl = std::sin(lam), cl = std::cos(lam);
  const double e = enu_km.x * 1000.0;
  const double n = enu_km.y * 1000.0;
  const double u = enu_km.z * 1000.0;
  const EcefVector obs = site.ecef();
  return {-sl * e - sp * cl * n + cp * cl * u + obs.x,
          cl * e - sp * sl * n + cp * sl * u + obs.y,
          cp * n + sp * u + obs.z};
}

EcefVector geodetic_to_ecef(const GeodeticCoord& c, const Wgs84& ell) {
  const double phi = c.lat_deg * kDeg;
  const double lam = c.lon_deg * kDeg;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double n = ell.a_m / std::sqrt(1.0 - ell.e2() * sp * sp);
  return {(n + c.height_m) * cp * std::cos(lam),
          (n + c.height_m) * cp * std::sin(lam),
          (n * (1.0 - ell.e2()) + c.height_m) * sp};
}

GeodeticCoord ecef_to_geodetic(const EcefVector& r, const Wgs84& ell) {
  const double p = std::hypot(r.x, r.y);
  GeodeticCoord out;
  if (p < 1e-9) {  // on the spin axis
    out.lat_deg = (r.z >= 0.0 ? 90.0 : -90.0);
    out.lon_deg = 0.0;
    out.height_m = std::abs(r.z) - ell.b_m();
    return out;
  }
  double lon = std::atan2(r.y, r.x);
  if (lon <= -kPi) lon += 2.0 * kPi;

  const double e2 = ell.e2();
  double phi = std::atan2(r.z, p * (1.0 - e2));
  double n = ell.a_m, h = 0.0;
  bool converged = false;
  for (int i = 0; i < 10; ++i) {
    const double sp = std::sin(phi);
    n = ell.a_m / std::sqrt(1.0 - e2 * sp * sp);
    h = p / std::cos(phi) - n;
    const double next = std::atan2(r.z, p * (1.0 - e2 * n / (n + h)));
    const bool done = std::abs(next - phi) < 1e-12;
    phi = next;
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("ecef_to_geodetic: no convergence");

  out.lat_deg = phi / kDeg;
  out.lon_deg = lon / kDeg;
  const double sp = std::sin(phi);
  n = ell.a_m / std::sqrt(1.0 - e2 * sp * sp);
  out.height_m = p / std::cos(phi) - n;
  return out;
}

double gmst_rad(double epoch_unix) {
  const double d = days_since_j2000(epoch_unix);
  const double t = d / 36525.0;
  double deg = 280.46061837 + 360.98564736629 * d + 0.000387933 * t * t -
               t * t * t / 38710000.0;
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg * kDeg;
}

EcefVector solar_position_ecef(double epoch_unix) {
  const double n = days_since_j2000(epoch_unix);
  // mean longitude and mean anomaly, degrees
  double big_l = std::fmod(280.460 + 0.9856474 * n, 360.0);
  double g = std::fmod(357.528 + 0.9856003 * n, 360.0);
  if (big_l < 0.0) big_l += 360.0;
  if (g < 0.0) g += 360.0;
  const double g_rad = g * kDeg;
  // apparent ecliptic longitude
  const double lambda =
      (big_l + 1.915 * std::sin(g_rad) + 0.020 * std::sin(2.0 * g_rad)) * kDeg;
  const double eps = (23.439 - 0.0000004 * n) * kDeg;
  const double dist_au =
      1.00014 - 0.01671 * std::cos(g_rad) - 0.00014 * std::cos(2.0 * g_rad);

  const double sl = std::sin(lambda), cl = std::cos(lambda);
  // equatorial, ECI
  const double xi = cl;
  const double yi = std::cos(eps) * sl;
  const double zi = std::sin(eps) * sl;

  const double theta = gmst_rad(epoch_unix);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double scale = dist_au * 1.495978707e11;
  return {(xi * ct + yi * st) * scale, (-xi * st + yi * ct) * scale, zi * scale};
}

IlluminationTag illumination_state(const EcefVector& sat_ecef,
                                   const EcefVector& sun_ecef,
                                   double shadow_radius_m) {
  const double sun_norm = sun_ecef.norm();
  if (sun_norm <= 0.0)
    throw std::invalid_argument("illumination_state: zero sun vector");
  const Vec3 s_hat = sun_ecef * (1.0 / sun_norm);
  const double p_par = sat_ecef.dot(s_hat);
  const double p_perp = (sat_ecef - s_hat * p_par).norm();

  IlluminationTag tag;
  tag.p_parallel_m = p_par;
  tag.p_perp_m = p_perp;
  tag.state = (p_par > 0.0 || p_perp > shadow_radius_m)
                  ? IlluminationState::Illuminated
                  : IlluminationState::Eclipsed;
  return tag;
}

}  // namespace uemr::geo
