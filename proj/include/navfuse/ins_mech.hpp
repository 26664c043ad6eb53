#pragma once

// Strapdown INS mechanization in the local-level (east/north/up) frame with
// a first-order quaternion attitude update:
//
//   q_k = q_{k-1} + dt/2 * Omega(w_lb^b) * q_{k-1},   then renormalize.
//
// Velocity integrates R_b^l f_b - (2 w_ie^l + w_el^l) x v_l + g_l; position
// integrates the curvature-scaled geodetic rates with the mid-step velocity.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/earth.hpp"
#include "navfuse/sensors.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

struct MechState {
  GeodeticPosition pos;
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();  // (v_e, v_n, v_u) m/s
  Quaterniond q;                                  // b->l
  double t = 0;
};

struct MechOptions {
  // Compensate Earth rotation and transport rate (off only in tests that
  // isolate pure body rotation).
  bool compensate_earth_terms = true;
};

MechState mechanize_step(const MechState& s, const ImuSample& imu,
                         const BiasState& bias, double dt,
                         const MechOptions& opts = {});

MechState make_mech_state(const TrajectoryEpoch& e);

struct StationarityThresholds {
  double gyro_std_max = 0.01;      // rad/s, std of |w| over the window
  double accel_dev_max = 0.15;     // m/s^2, |mean(|f|) - g|
  double speed_max = 0.05;         // m/s, mean odometer speed
  double min_window_s = 0.5;
};

// True iff gyro activity, specific-force deviation from gravity, and
// odometer speed are all below their thresholds over the window.
bool stationarity_detect(std::span<const ImuSample> imu_window,
                         std::span<const OdoSample> odo_window,
                         const WheelConfig& wheel,
                         const StationarityThresholds& th);

struct InsRunOptions {
  MechOptions mech;
  bool zupt_enabled = false;             // hold pose, zero velocity when stationary
  StationarityThresholds stationarity;
  double output_interval_s = 0.1;        // decimation of the emitted solution
};

struct InsSolutionEpoch {
  double t = 0;
  GeodeticPosition pos;
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();
  Attitude att;
};

// Free-inertial dead reckoning with zero assumed biases. The odometer stream
// may be empty; it is only consulted by the optional stationarity pause.
std::vector<InsSolutionEpoch> run_ins_standalone(
    const MechState& init, std::span<const ImuSample> imu,
    std::span<const OdoSample> odo, const WheelConfig& wheel,
    const InsRunOptions& opts = {});

}  // namespace navfuse
