#pragma once

// Loosely-coupled 15-state error-state EKF fusing mechanized INS with the 5G
// standalone position solution and l-frame-projected odometer velocity.
//
// Error state, in this order:
//   [0..2]  position error, meters (east, north, up; curvature-scaled)
//   [3..5]  velocity error, m/s
//   [6..8]  attitude error vector eps, rad, with R_est = (I + [eps x]) R_true
//   [9..11] gyro bias error, rad/s
//   [12..14] accel bias error, m/s^2
//
// The mean always advances by the full nonlinear mechanization; the linear
// model only propagates covariance. Position/velocity measurements observe
// the first six error states with an identity block, so updates are linear.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navfuse/fiveg_fix.hpp"
#include "navfuse/ins_mech.hpp"
#include "navfuse/sensors.hpp"

namespace navfuse {

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

struct FusionState {
  MechState nav;
  BiasState bias;
  Mat15 cov = Mat15::Zero();
};

struct PositionMeasurement {
  GeodeticPosition pos;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();  // local ENU meters^2
};

struct VelocityMeasurement {
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();
};

struct FusionMeasurement {
  std::optional<PositionMeasurement> pos_5g;
  std::optional<VelocityMeasurement> v_odo_l;
};

struct UpdateEvent {
  double t = 0;
  std::string block;  // "pos_5g" | "odo"
  Eigen::Vector3d innovation = Eigen::Vector3d::Zero();
  double mahalanobis = 0;
  bool accepted = true;
  bool rescued = false;  // applied with inflated noise after sustained rejections
};

// --- error-state algebra -----------------------------------------------

// Applies a 15-dim error to a state (the retraction used by the filter's
// feedback and by the finite-difference Jacobian check).
FusionState inject_error(const FusionState& s, const Vec15& delta);

// Error of an estimate against a reference, in filter error coordinates.
Vec15 error_between(const FusionState& estimate, const MechState& truth_nav,
                    const BiasState& truth_bias);

// Continuous-time error dynamics F at the current state/IMU point.
Mat15 error_dynamics(const FusionState& s, const ImuSample& imu,
                     const GaussMarkovParams& gm);

// First-order transition matrix (exact exponential on the bias diagonal).
Mat15 transition_matrix(const FusionState& s, const ImuSample& imu,
                        const GaussMarkovParams& gm, double dt);

// --- filter -------------------------------------------------------------

struct FusionConfig {
  GaussMarkovParams gm;            // filter-assumed bias model and IMU noise
  double gate_chi2_3dof = 16.266;  // chi-square 99.9%, 3 dof
  int gate_rescue_after = 20;      // consecutive rejections before a rescue update
  double sigma_odo_mps = 0.1;      // forward-speed measurement std
  double sigma_nh_lateral_mps = 0.1;   // non-holonomic pseudo-observation stds
  double sigma_nh_vertical_mps = 0.2;
  // Attitude process-noise floor (rad/sqrt(s)). The aiding solutions are
  // serially correlated, which over-extracts information about the weakly
  // observable attitude states; this floor keeps their variance honest.
  double att_process_density = 3.5e-4;
  double max_imu_gap_s = 1.0;
  double output_interval_s = 0.1;
  MechOptions mech;
};

// Mechanizes the bias-corrected IMU sample and propagates covariance.
// att_process_density is the attitude process-noise floor (see FusionConfig).
FusionState predict(const FusionState& s, const ImuSample& imu,
                    const GaussMarkovParams& gm, double dt,
                    const MechOptions& mech = {}, double att_process_density = 0.0);

struct UpdateOptions {
  bool rescue_pos = false;
  bool rescue_vel = false;
};

// Gates and applies the available measurement blocks (position first), with
// Joseph-form covariance updates and closed-loop feedback of the estimated
// errors. Returns one event per present block.
std::vector<UpdateEvent> update(FusionState& s, const FusionMeasurement& z,
                                const FusionConfig& cfg,
                                const UpdateOptions& opts = {});

// Non-holonomic projection of the odometer: body velocity (0, v_odo, 0)
// rotated into the l-frame by the current attitude estimate.
VelocityMeasurement project_odometer(const OdoSample& odo, const WheelConfig& wheel,
                                     const FusionState& s, const FusionConfig& cfg);

struct FusedEpoch {
  double t = 0;
  GeodeticPosition pos;
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();
  Attitude att;
  BiasState bias;
  double p_trace = 0;
};

struct FusionRunResult {
  std::vector<FusedEpoch> solution;
  std::vector<UpdateEvent> events;
};

// Predict at the IMU rate; update whenever odometer samples or 5G solution
// epochs (with at least one LOS BS) fall due. 5G epochs with no LOS BSs are
// coasting output, not measurements, so outages are bridged by IMU+odometer.
FusionRunResult run_fusion(const FusionState& init, std::span<const ImuSample> imu,
                           std::span<const OdoSample> odo, const WheelConfig& wheel,
                           std::span<const NavSolutionEpoch> fiveg,
                           const FusionConfig& cfg);

}  // namespace navfuse
