#pragma once

// Plain sensor sample types shared by the simulator, the mechanization and
// the fusion filter. Body axes: x right, y forward, z up.

#include <Eigen/Dense>

namespace navfuse {

struct ImuSample {
  double t = 0;                                    // s
  Eigen::Vector3d f_b = Eigen::Vector3d::Zero();   // specific force, m/s^2
  Eigen::Vector3d w_b = Eigen::Vector3d::Zero();   // angular rate, rad/s
};

// One BS-to-UE observable set. truth_los is a simulation-only label;
// aod_degenerate marks the UE-above-BS geometry where the horizontal AOD is
// undefined (emitted as 0).
struct Meas5G {
  double t = 0;
  int bs_id = 0;
  double rtt_s = 0;
  double aod_h_rad = 0;       // bearing of UE from BS, clockwise from north
  double aod_v_rad = 0;       // asin((z_ue - z_bs) / r)
  double rx_power_dbm = 0;
  bool truth_los = true;
  bool aod_degenerate = false;
};

struct OdoSample {
  double t = 0;
  double wheel_rate_rps = 0;  // rev/s
};

struct WheelConfig {
  double radius_m = 0.3;
};

// v_Odo = 2 * pi * r_wheel * wheel_rate
inline double odo_speed(const OdoSample& s, const WheelConfig& w) {
  return 2.0 * std::numbers::pi * w.radius_m * s.wheel_rate_rps;
}

// Gyro and accelerometer biases in sensor units.
struct BiasState {
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // rad/s
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2
};

// First-order Gauss-Markov parameters per instrument triad, plus the white
// noise densities of the sensors themselves.
struct GaussMarkovParams {
  Eigen::Vector3d beta_gyro = Eigen::Vector3d::Zero();    // 1/s
  Eigen::Vector3d beta_accel = Eigen::Vector3d::Zero();   // 1/s
  Eigen::Vector3d sigma_gyro = Eigen::Vector3d::Zero();   // steady-state bias std, rad/s
  Eigen::Vector3d sigma_accel = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d noise_gyro = Eigen::Vector3d::Zero();   // white density, rad/s/sqrt(Hz)
  Eigen::Vector3d noise_accel = Eigen::Vector3d::Zero();  // m/s^2/sqrt(Hz)
};

}  // namespace navfuse
