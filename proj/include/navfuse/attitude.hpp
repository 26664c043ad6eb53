#pragma once

// Attitude representations and quaternion algebra.
//
// Frames: l-frame is local-level east/north/up; b-frame is the vehicle frame
// with x to the right (transversal), y forward (longitudinal), z up. Azimuth
// is the heading of the forward axis, clockwise from north, so
//
//   R_b^l(p, r, a) = Rz(-a) * Rx(p) * Ry(r)
//
// and attitude (0, 0, 0) is the identity rotation. Quaternions are unit,
// scalar-first, and encode the b->l rotation.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "navfuse/geodesy.hpp"

namespace navfuse {

struct Attitude {
  double pitch = 0;    // rad, |p| <= pi/2
  double roll = 0;     // rad, |r| <= pi
  double azimuth = 0;  // rad, [0, 2*pi)
};

template <typename T>
struct Quaternion {
  T w = T(1), x = T(0), y = T(0), z = T(0);

  Eigen::Matrix<T, 4, 1> coeffs() const { return {w, x, y, z}; }
  static Quaternion from_coeffs(const Eigen::Matrix<T, 4, 1>& v) {
    return {v(0), v(1), v(2), v(3)};
  }

  T norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    const T n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }
};

using Quaterniond = Quaternion<double>;

template <typename T>
inline Quaternion<T> operator*(const Quaternion<T>& q, const Quaternion<T>& p) {
  return {q.w * p.w - q.x * p.x - q.y * p.y - q.z * p.z,
          q.w * p.x + q.x * p.w + q.y * p.z - q.z * p.y,
          q.w * p.y - q.x * p.z + q.y * p.w + q.z * p.x,
          q.w * p.z + q.x * p.y - q.y * p.x + q.z * p.w};
}

template <typename T>
inline Eigen::Matrix<T, 3, 3> rotation_matrix(const Quaternion<T>& q) {
  const T w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Matrix<T, 3, 3> r;
  r << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  return r;
}

template <typename T>
inline Eigen::Matrix<T, 3, 1> rotate(const Quaternion<T>& q,
                                     const Eigen::Matrix<T, 3, 1>& v) {
  return rotation_matrix(q) * v;
}

// Unit quaternion of a rotation vector (axis * angle).
template <typename T>
inline Quaternion<T> quat_exp(const Eigen::Matrix<T, 3, 1>& rv) {
  const T angle = rv.norm();
  if (angle < T(1e-12)) return {T(1), rv(0) / T(2), rv(1) / T(2), rv(2) / T(2)};
  const T half = angle / T(2);
  const T s = std::sin(half) / angle;
  return {std::cos(half), s * rv(0), s * rv(1), s * rv(2)};
}

// Rotation vector of a unit quaternion (inverse of quat_exp).
template <typename T>
inline Eigen::Matrix<T, 3, 1> quat_log(const Quaternion<T>& q_in) {
  Quaternion<T> q = q_in;
  if (q.w < T(0)) q = {-q.w, -q.x, -q.y, -q.z};
  const Eigen::Matrix<T, 3, 1> v{q.x, q.y, q.z};
  const T vn = v.norm();
  if (vn < T(1e-12)) return T(2) * v;
  const T angle = T(2) * std::atan2(vn, q.w);
  return (angle / vn) * v;
}

template <typename T>
inline Eigen::Matrix<T, 3, 3> skew(const Eigen::Matrix<T, 3, 1>& v) {
  Eigen::Matrix<T, 3, 3> s;
  s << T(0), -v(2), v(1), v(2), T(0), -v(0), -v(1), v(0), T(0);
  return s;
}

// 4x4 rate operator of a body angular rate, for qdot = 1/2 * Omega(w) * q
// with scalar-first quaternions (right multiplication by (0, w)).
template <typename T>
inline Eigen::Matrix<T, 4, 4> omega_matrix(const Eigen::Matrix<T, 3, 1>& w) {
  Eigen::Matrix<T, 4, 4> o;
  o << T(0), -w(0), -w(1), -w(2),
      w(0), T(0), w(2), -w(1),
      w(1), -w(2), T(0), w(0),
      w(2), w(1), -w(0), T(0);
  return o;
}

inline Quaterniond quat_from_attitude(const Attitude& a) {
  const auto half = [](double ang) { return ang / 2.0; };
  const Quaterniond qz{std::cos(half(-a.azimuth)), 0, 0, std::sin(half(-a.azimuth))};
  const Quaterniond qx{std::cos(half(a.pitch)), std::sin(half(a.pitch)), 0, 0};
  const Quaterniond qy{std::cos(half(a.roll)), 0, std::sin(half(a.roll)), 0};
  return (qz * qx * qy).normalized();
}

struct AttitudeExtraction {
  Attitude attitude;
  bool gimbal_lock = false;  // |pitch| within ~1e-6 of pi/2; roll forced to 0
};

inline AttitudeExtraction attitude_from_quat(const Quaterniond& q) {
  const Eigen::Matrix3d r = rotation_matrix(q);
  AttitudeExtraction out;
  const double sp = std::clamp(r(2, 1), -1.0, 1.0);
  out.attitude.pitch = std::asin(sp);
  if (std::abs(sp) > 1.0 - 1e-12 ||
      std::abs(std::abs(out.attitude.pitch) - std::numbers::pi / 2) < 1e-6) {
    // Azimuth and roll are not separable; pin roll and keep their combination.
    out.gimbal_lock = true;
    out.attitude.roll = 0.0;
    out.attitude.azimuth = wrap_two_pi(std::atan2(-r(0, 2), r(0, 0)));
    return out;
  }
  out.attitude.roll = std::atan2(-r(2, 0), r(2, 2));
  out.attitude.azimuth = wrap_two_pi(std::atan2(r(0, 1), r(1, 1)));
  return out;
}

inline Eigen::Matrix3d rotation_from_attitude(const Attitude& a) {
  return rotation_matrix(quat_from_attitude(a));
}

}  // namespace navfuse
