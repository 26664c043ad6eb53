#pragma once

// Ground-truth trajectories: time-stamped PVA epochs, interpolation and
// resampling, and a scripted synthetic track generator (straight segments,
// constant-rate turns, stops) so experiments do not depend on proprietary
// survey data.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/geodesy.hpp"

namespace navfuse {

struct TrajectoryEpoch {
  double t = 0;            // s since scenario start
  GeodeticPosition pos;
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();  // (v_e, v_n, v_u) m/s
  Attitude att;
};

struct Trajectory {
  std::vector<TrajectoryEpoch> epochs;

  bool empty() const { return epochs.empty(); }
  std::size_t size() const { return epochs.size(); }
  double start_time() const { return epochs.front().t; }
  double end_time() const { return epochs.back().t; }
  double duration() const { return end_time() - start_time(); }
};

// Throws std::runtime_error naming the first offending epoch: fewer than two
// epochs, non-monotonic time, or non-finite fields.
void validate_trajectory(const Trajectory& traj);

// Horizontal arc length of the trajectory polyline in the given UTM zone, m.
double path_length_m(const Trajectory& traj, int zone, bool north);

// Linear interpolation of position/velocity, shortest-arc slerp of attitude.
// t must lie within the trajectory span.
TrajectoryEpoch interpolate(const Trajectory& traj, double t);

// Resamples to a constant rate over the full span (no-op copy when the
// trajectory is already sampled at that rate).
Trajectory resample(const Trajectory& traj, double rate_hz);

// Scripted track generator. Each phase holds its turn rate while the speed
// ramps toward the target at the given acceleration limit.
struct TrackSegment {
  double duration_s = 0;
  double target_speed_mps = 0;
  double turn_rate_dps = 0;
};

struct TrackParams {
  GeodeticPosition start;           // first epoch position
  double azimuth0_rad = 0;          // initial heading, clockwise from north
  double rate_hz = 100;             // output epoch rate
  double accel_limit_mps2 = 1.5;    // speed ramp slope
  std::vector<TrackSegment> segments;
};

// Positions are integrated from the velocity profile with the same
// trapezoidal geodetic rule the mechanization uses, so a zero-error IMU
// stream derived from this truth closes the forward/inverse loop to
// numerical precision.
Trajectory generate_track(const TrackParams& params);

}  // namespace navfuse
