#pragma once

// Geodetic <-> UTM conversions on the WGS-84 ellipsoid.
//
// The transverse Mercator mapping uses the sixth-order Krueger series in
// n = f/(2-f), which is accurate to nanometers across a UTM zone, so
// forward/inverse round trips hold to ~1e-9 m. The UTM zone is meant to be
// fixed per scenario; conversions never silently switch zones.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "navfuse/constants.hpp"

namespace navfuse {

struct GeodeticPosition {
  double lat = 0;  // rad, |lat| <= pi/2
  double lon = 0;  // rad, wrapped to (-pi, pi]
  double h = 0;    // m, ellipsoidal height
};

struct UtmPosition {
  double x = 0;  // m easting
  double y = 0;  // m northing
  double z = 0;  // m height (same as ellipsoidal h)
  int zone = 0;  // [1, 60]
  bool north = true;
};

template <typename T>
inline T wrap_longitude(T lon) {
  const T two_pi = T(2) * std::numbers::pi_v<T>;
  lon = std::fmod(lon, two_pi);
  if (lon > std::numbers::pi_v<T>) lon -= two_pi;
  if (lon <= -std::numbers::pi_v<T>) lon += two_pi;
  return lon;
}

template <typename T>
inline T wrap_two_pi(T angle) {
  const T two_pi = T(2) * std::numbers::pi_v<T>;
  angle = std::fmod(angle, two_pi);
  if (angle < T(0)) angle += two_pi;
  return angle;
}

inline int utm_zone_for(double lon_rad) {
  const double lon_deg = lon_rad * kRadToDeg<>;
  int zone = static_cast<int>(std::floor((lon_deg + 180.0) / 6.0)) + 1;
  if (zone < 1) zone = 1;
  if (zone > 60) zone = 60;
  return zone;
}

namespace detail {

// Krueger series coefficients for n = f/(2-f), forward (alpha) and
// inverse (beta), through n^6.
struct TmSeries {
  double n = 0, big_a = 0;
  double alpha[6] = {0, 0, 0, 0, 0, 0};
  double beta[6] = {0, 0, 0, 0, 0, 0};
};

inline const TmSeries& tm_series() {
  static const TmSeries s = [] {
    TmSeries o;
    const double f = kWgs84Flattening<>;
    const double n = f / (2.0 - f);
    const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
    o.n = n;
    o.big_a = kWgs84SemiMajor<> / (1.0 + n) *
              (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    o.alpha[0] = n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 -
                 127.0 / 288.0 * n5 + 7891.0 / 37800.0 * n6;
    o.alpha[1] = 13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 +
                 281.0 / 630.0 * n5 - 1983433.0 / 1935360.0 * n6;
    o.alpha[2] = 61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5 +
                 167603.0 / 181440.0 * n6;
    o.alpha[3] = 49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 +
                 6601661.0 / 7257600.0 * n6;
    o.alpha[4] = 34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6;
    o.alpha[5] = 212378941.0 / 319334400.0 * n6;
    o.beta[0] = n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4 -
                81.0 / 512.0 * n5 + 96199.0 / 604800.0 * n6;
    o.beta[1] = 1.0 / 48.0 * n2 + 1.0 / 15.0 * n3 - 437.0 / 1440.0 * n4 +
                46.0 / 105.0 * n5 - 1118711.0 / 3870720.0 * n6;
    o.beta[2] = 17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5 +
                5569.0 / 90720.0 * n6;
    o.beta[3] = 4397.0 / 161280.0 * n4 - 11.0 / 504.0 * n5 -
                830251.0 / 7257600.0 * n6;
    o.beta[4] = 4583.0 / 161280.0 * n5 - 108847.0 / 3991680.0 * n6;
    o.beta[5] = 20648693.0 / 638668800.0 * n6;
    return o;
  }();
  return s;
}

}  // namespace detail

// Forward mapping into a forced zone. Throws std::domain_error outside the
// UTM validity band |lat| <= 84 deg.
inline UtmPosition geodetic_to_utm(const GeodeticPosition& p, int zone, bool north) {
  if (std::abs(p.lat) > 84.0 * kDegToRad<>)
    throw std::domain_error("geodetic_to_utm: latitude outside UTM band (|lat| > 84 deg)");
  if (zone < 1 || zone > 60)
    throw std::domain_error("geodetic_to_utm: zone must be in [1, 60]");

  const auto& s = detail::tm_series();
  const double e = std::sqrt(kWgs84Ecc2<>);
  const double lon0 = (zone * 6 - 183) * kDegToRad<>;
  const double dlon = wrap_longitude(p.lon - lon0);

  const double t = std::tan(p.lat);
  const double sigma = std::sinh(e * std::atanh(e * t / std::sqrt(1.0 + t * t)));
  const double tp = t * std::sqrt(1.0 + sigma * sigma) - sigma * std::sqrt(1.0 + t * t);
  const double cd = std::cos(dlon);
  const double xip = std::atan2(tp, cd);
  const double etap = std::asinh(std::sin(dlon) / std::sqrt(tp * tp + cd * cd));

  double xi = xip, eta = etap;
  for (int j = 1; j <= 6; ++j) {
    xi += s.alpha[j - 1] * std::sin(2.0 * j * xip) * std::cosh(2.0 * j * etap);
    eta += s.alpha[j - 1] * std::cos(2.0 * j * xip) * std::sinh(2.0 * j * etap);
  }

  UtmPosition u;
  u.zone = zone;
  u.north = north;
  u.x = kUtmFalseEasting<> + kUtmScale<> * s.big_a * eta;
  u.y = kUtmScale<> * s.big_a * xi + (north ? 0.0 : kUtmFalseNorthing<>);
  u.z = p.h;
  return u;
}

inline UtmPosition geodetic_to_utm(const GeodeticPosition& p) {
  return geodetic_to_utm(p, utm_zone_for(p.lon), p.lat >= 0.0);
}

inline GeodeticPosition utm_to_geodetic(const UtmPosition& u) {
  if (u.zone < 1 || u.zone > 60)
    throw std::domain_error("utm_to_geodetic: zone must be in [1, 60]");

  const auto& s = detail::tm_series();
  const double e = std::sqrt(kWgs84Ecc2<>);
  const double lon0 = (u.zone * 6 - 183) * kDegToRad<>;

  const double y = u.north ? u.y : u.y - kUtmFalseNorthing<>;
  const double xi = y / (kUtmScale<> * s.big_a);
  const double eta = (u.x - kUtmFalseEasting<>) / (kUtmScale<> * s.big_a);

  double xip = xi, etap = eta;
  for (int j = 1; j <= 6; ++j) {
    xip -= s.beta[j - 1] * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    etap -= s.beta[j - 1] * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  const double sh = std::sinh(etap);
  const double cx = std::cos(xip);
  const double tp = std::sin(xip) / std::sqrt(sh * sh + cx * cx);
  const double dlon = std::atan2(sh, cx);

  // Invert tau' -> tau (geodetic tangent) by Newton iteration.
  const double e2 = kWgs84Ecc2<>;
  double tau = tp / (1.0 - e2);  // spherical-ish start
  for (int it = 0; it < 8; ++it) {
    const double sigma = std::sinh(e * std::atanh(e * tau / std::sqrt(1.0 + tau * tau)));
    const double taup = tau * std::sqrt(1.0 + sigma * sigma) -
                        sigma * std::sqrt(1.0 + tau * tau);
    const double dtaup = (std::sqrt((1.0 + sigma * sigma) * (1.0 + tau * tau)) -
                          sigma * tau) *
                         (1.0 - e2) * std::sqrt(1.0 + tau * tau) /
                         (1.0 + (1.0 - e2) * tau * tau);
    const double dtau = (tp - taup) / dtaup;
    tau += dtau;
    if (std::abs(dtau) < 1e-16 * std::max(1.0, std::abs(tau))) break;
  }

  GeodeticPosition p;
  p.lat = std::atan(tau);
  p.lon = wrap_longitude(lon0 + dlon);
  p.h = u.z;
  return p;
}

// Meridian (M) and normal (N) radii of curvature, m.
template <typename T>
inline void radii_of_curvature(T lat, T& m_radius, T& n_radius) {
  const T s2 = std::sin(lat) * std::sin(lat);
  const T den = std::sqrt(T(1) - kWgs84Ecc2<T> * s2);
  n_radius = kWgs84SemiMajor<T> / den;
  m_radius = kWgs84SemiMajor<T> * (T(1) - kWgs84Ecc2<T>) / (den * den * den);
}

// Somigliana normal gravity with a linear free-air height correction, m/s^2.
template <typename T>
inline T normal_gravity(T lat, T h) {
  const T s2 = std::sin(lat) * std::sin(lat);
  const T g0 = kGravityEquator<T> * (T(1) + kGravitySomigliana<T> * s2) /
               std::sqrt(T(1) - kWgs84Ecc2<T> * s2);
  const T a = kWgs84SemiMajor<T>;
  const T f = kWgs84Flattening<T>;
  const T m = kEarthRate<T> * kEarthRate<T> * a * a * (a * (T(1) - f)) / kWgs84Gm<T>;
  return g0 * (T(1) - T(2) / a * (T(1) + f + m - T(2) * f * s2) * h);
}

}  // namespace navfuse
