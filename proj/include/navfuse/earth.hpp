#pragma once

// Earth-rate, transport-rate and gravity terms needed by the mechanization
// and by the inverse (measurement-generating) mechanization.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "navfuse/attitude.hpp"
#include "navfuse/geodesy.hpp"

namespace navfuse {

struct EarthNavTerms {
  Eigen::Vector3d omega_ie_l = Eigen::Vector3d::Zero();  // Earth rate in l-frame, rad/s
  Eigen::Vector3d omega_el_l = Eigen::Vector3d::Zero();  // transport rate, rad/s
  Eigen::Vector3d g_l = Eigen::Vector3d::Zero();         // local gravity, m/s^2
  Eigen::Matrix3d r_b_l = Eigen::Matrix3d::Identity();   // b->l rotation
  double m_radius = 0;  // meridian radius of curvature, m
  double n_radius = 0;  // normal radius of curvature, m
};

// v_l is (v_e, v_n, v_u). Throws near the poles where the transport-rate
// tan(lat) term is singular.
inline EarthNavTerms compute_earth_terms(const GeodeticPosition& p,
                                         const Eigen::Vector3d& v_l) {
  if (std::abs(std::abs(p.lat) - std::numbers::pi / 2) < 1e-9)
    throw std::domain_error("compute_earth_terms: transport rate singular at the pole");
  if (!v_l.allFinite())
    throw std::domain_error("compute_earth_terms: non-finite velocity");

  EarthNavTerms t;
  radii_of_curvature(p.lat, t.m_radius, t.n_radius);

  const double sl = std::sin(p.lat);
  const double cl = std::cos(p.lat);
  t.omega_ie_l = kEarthRate<> * Eigen::Vector3d(0.0, cl, sl);
  t.omega_el_l = Eigen::Vector3d(-v_l(1) / (t.m_radius + p.h),
                                 v_l(0) / (t.n_radius + p.h),
                                 v_l(0) * std::tan(p.lat) / (t.n_radius + p.h));
  t.g_l = Eigen::Vector3d(0.0, 0.0, -normal_gravity(p.lat, p.h));
  return t;
}

inline EarthNavTerms compute_earth_terms(const GeodeticPosition& p,
                                         const Eigen::Vector3d& v_l,
                                         const Quaterniond& q_b_l) {
  EarthNavTerms t = compute_earth_terms(p, v_l);
  t.r_b_l = rotation_matrix(q_b_l);
  return t;
}

// One geodetic position step with curvature radii held at the current
// position. The mechanization and the synthetic track generator share this
// rule so that inverse/forward round trips close.
inline GeodeticPosition advance_position(const GeodeticPosition& p,
                                         const Eigen::Vector3d& v_mid, double dt) {
  double m_radius = 0, n_radius = 0;
  radii_of_curvature(p.lat, m_radius, n_radius);
  GeodeticPosition out;
  out.lat = p.lat + dt * v_mid(1) / (m_radius + p.h);
  out.lon = wrap_longitude(p.lon + dt * v_mid(0) / ((n_radius + p.h) * std::cos(p.lat)));
  out.h = p.h + dt * v_mid(2);
  return out;
}

}  // namespace navfuse
