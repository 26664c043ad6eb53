#pragma once

#include <numbers>

namespace navfuse {

// Physical and WGS-84 ellipsoid constants as variable templates so that
// expressions stay in the caller's scalar type (double everywhere in the
// shipped tooling, long double / autodiff types in tests).

template <typename T = double>
inline constexpr T kSpeedOfLight = T(299792458);  // m/s, exact

template <typename T = double>
inline constexpr T kWgs84SemiMajor = T(6378137);  // m

template <typename T = double>
inline constexpr T kWgs84Flattening = T(1) / T(298.257223563);

template <typename T = double>
inline constexpr T kWgs84Ecc2 =
    kWgs84Flattening<T> * (T(2) - kWgs84Flattening<T>);  // first eccentricity squared

template <typename T = double>
inline constexpr T kEarthRate = T(7.292115e-5);  // rad/s

template <typename T = double>
inline constexpr T kWgs84Gm = T(3.986004418e14);  // m^3/s^2

// Somigliana normal-gravity coefficients (WGS-84).
template <typename T = double>
inline constexpr T kGravityEquator = T(9.7803253359);  // m/s^2

template <typename T = double>
inline constexpr T kGravitySomigliana = T(0.00193185265241);

template <typename T = double>
inline constexpr T kUtmScale = T(0.9996);

template <typename T = double>
inline constexpr T kUtmFalseEasting = T(500000);

template <typename T = double>
inline constexpr T kUtmFalseNorthing = T(10000000);  // southern hemisphere only

template <typename T = double>
inline constexpr T kDegToRad = std::numbers::pi_v<T> / T(180);

template <typename T = double>
inline constexpr T kRadToDeg = T(180) / std::numbers::pi_v<T>;

}  // namespace navfuse
