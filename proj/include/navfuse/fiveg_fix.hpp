#pragma once

// 5G standalone positioning: range-differencing NLOS rejection, per-BS hybrid
// RTT/AOD fix under the constant-UE-height assumption, and a constant-velocity
// linear KF fusing the per-BS fixes.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "navfuse/scenario.hpp"
#include "navfuse/sensors.hpp"

namespace navfuse {

struct RangePair {
  double r_time = 0;   // m, from the RTT
  double r_power = 0;  // m, LOS path-loss inversion of the received power
};

struct SingleBsFix {
  UtmPosition pos;
  double r_2d = 0;  // diagnostic: horizontal range used by the fix
  int bs_id = 0;
  double t = 0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();  // position covariance, m^2
};

struct CvKfState {
  Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();  // x,y,z,vx,vy,vz
  Eigen::Matrix<double, 6, 6> cov = Eigen::Matrix<double, 6, 6>::Zero();
  double t = 0;
};

enum class LosDecision { kLos, kNlos };

// One-sided test: NLOS elongates the time path, so flag when
// r_time - r_power exceeds gamma.
LosDecision nlos_detect(const RangePair& pair, double gamma_m);

struct FivegFixConfig {
  double gamma_m = 8.0;           // detector threshold, below the NLOS bias floor
  bool detector_enabled = true;
  double ue_height_m = 100.0;     // constant-height assumption (UTM z)
  double q_accel = 1.0;           // CV white-acceleration PSD, m^2/s^3
  // Measurement sigmas assumed when weighting a fix.
  double sigma_range_m = 0.5;
  double sigma_aod_rad = 0.1 * kDegToRad<>;
  double sigma_height_m = 0.5;
  double init_pos_std_m = 10.0;
  double init_vel_std_ms = 5.0;
  // LOS path-loss model shared with the simulator (needed to invert power).
  double tx_power_dbm = 30.0;
  double pathloss_exponent = 2.0;
  double pathloss_ref_m = 1.0;
  double carrier_hz = 28e9;
};

RangePair compute_range_pair(const Meas5G& m, const FivegFixConfig& cfg);

// Eq-exact hybrid fix: r_2d = sqrt(r^2 - dz^2), x = r_2d sin(theta) + x_bs,
// y = r_2d cos(theta) + y_bs, z = h_ue, with first-order covariance from
// (sigma_range, sigma_aod, sigma_height). Throws on r <= |dz|.
SingleBsFix single_bs_fix(const Meas5G& m, const BsSite& bs, double h_ue,
                          const FivegFixConfig& cfg);

// Predict with the block constant-velocity model, then apply each fix as a
// direct linear position observation, sequentially. An empty fix list coasts.
CvKfState cv_kf_step(const CvKfState& state, std::span<const SingleBsFix> fixes,
                     double dt, double q_accel);

struct NavSolutionEpoch {
  double t = 0;
  GeodeticPosition pos;
  Eigen::Vector3d cov_diag = Eigen::Vector3d::Zero();  // UTM-aligned, m^2
  int n_los_bs = 0;
};

struct DetectorDecision {
  double t = 0;
  int bs_id = 0;
  double r_time = 0;
  double r_power = 0;
  LosDecision decision = LosDecision::kLos;
  bool truth_los = true;
};

struct FivegRunResult {
  std::vector<NavSolutionEpoch> solution;
  std::vector<DetectorDecision> decisions;
};

// Full 5G-standalone branch over a time-sorted measurement stream. The filter
// ticks on the fixed 5G epoch grid from the first measurement until t_end,
// initializes on the first LOS fix, and emits coasting (prediction-only)
// epochs through outages.
FivegRunResult run_5g_standalone(std::span<const Meas5G> meas,
                                 const std::vector<BsSite>& sites,
                                 const FivegFixConfig& cfg, int zone, bool north,
                                 double rate_hz, double t_end);

}  // namespace navfuse
