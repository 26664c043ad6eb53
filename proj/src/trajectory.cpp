#include "navfuse/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "navfuse/earth.hpp"

namespace navfuse {

void validate_trajectory(const Trajectory& traj) {
  if (traj.size() < 2)
    throw std::runtime_error("trajectory: at least two epochs required");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const TrajectoryEpoch& e = traj.epochs[i];
    const bool finite = std::isfinite(e.t) && std::isfinite(e.pos.lat) &&
                        std::isfinite(e.pos.lon) && std::isfinite(e.pos.h) &&
                        e.v_l.allFinite() && std::isfinite(e.att.pitch) &&
                        std::isfinite(e.att.roll) && std::isfinite(e.att.azimuth);
    if (!finite)
      throw std::runtime_error("trajectory: non-finite field at epoch " +
                               std::to_string(i));
    if (std::abs(e.pos.lat) > std::numbers::pi / 2)
      throw std::runtime_error("trajectory: |lat| > pi/2 at epoch " +
                               std::to_string(i));
    if (i > 0 && e.t <= traj.epochs[i - 1].t)
      throw std::runtime_error("trajectory: non-increasing time at epoch " +
                               std::to_string(i));
  }
}

double path_length_m(const Trajectory& traj, int zone, bool north) {
  double total = 0;
  UtmPosition prev;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const UtmPosition u = geodetic_to_utm(traj.epochs[i].pos, zone, north);
    if (i > 0) total += std::hypot(u.x - prev.x, u.y - prev.y);
    prev = u;
  }
  return total;
}

namespace {

std::size_t bracket_index(const Trajectory& traj, double t) {
  if (t < traj.start_time() - 1e-9 || t > traj.end_time() + 1e-9)
    throw std::out_of_range("trajectory: query time outside span");
  std::size_t lo = 0, hi = traj.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (traj.epochs[mid].t <= t)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Quaterniond slerp(const Quaterniond& a, const Quaterniond& b, double u) {
  Quaterniond d = a.conjugate() * b;
  if (d.w < 0) d = {-d.w, -d.x, -d.y, -d.z};  // shortest arc
  const Eigen::Vector3d rv = quat_log(d);
  return (a * quat_exp<double>(u * rv)).normalized();
}

}  // namespace

TrajectoryEpoch interpolate(const Trajectory& traj, double t) {
  const std::size_t i = bracket_index(traj, t);
  const TrajectoryEpoch& a = traj.epochs[i];
  const TrajectoryEpoch& b = traj.epochs[std::min(i + 1, traj.size() - 1)];
  if (b.t <= a.t) return a;
  const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);

  TrajectoryEpoch out;
  out.t = t;
  out.pos.lat = a.pos.lat + u * (b.pos.lat - a.pos.lat);
  out.pos.lon = a.pos.lon + u * wrap_longitude(b.pos.lon - a.pos.lon);
  out.pos.lon = wrap_longitude(out.pos.lon);
  out.pos.h = a.pos.h + u * (b.pos.h - a.pos.h);
  out.v_l = a.v_l + u * (b.v_l - a.v_l);
  const Quaterniond q = slerp(quat_from_attitude(a.att), quat_from_attitude(b.att), u);
  out.att = attitude_from_quat(q).attitude;
  return out;
}

Trajectory resample(const Trajectory& traj, double rate_hz) {
  validate_trajectory(traj);
  if (rate_hz <= 0) throw std::domain_error("resample: rate must be positive");
  const double dt = 1.0 / rate_hz;

  // Already uniform at the requested rate?
  bool uniform = true;
  for (std::size_t i = 1; i < traj.size() && uniform; ++i)
    uniform = std::abs(traj.epochs[i].t - traj.epochs[i - 1].t - dt) < 1e-9;
  if (uniform) return traj;

  Trajectory out;
  const std::size_t n =
      static_cast<std::size_t>(std::floor(traj.duration() / dt + 1e-9)) + 1;
  out.epochs.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.epochs.push_back(interpolate(traj, traj.start_time() + k * dt));
  return out;
}

Trajectory generate_track(const TrackParams& params) {
  if (params.rate_hz <= 0) throw std::domain_error("generate_track: rate must be positive");
  if (params.segments.empty())
    throw std::domain_error("generate_track: at least one segment required");

  const double dt = 1.0 / params.rate_hz;
  Trajectory traj;

  double speed = 0;
  double heading = params.azimuth0_rad;
  GeodeticPosition pos = params.start;

  auto velocity_of = [](double s, double psi) {
    return Eigen::Vector3d(s * std::sin(psi), s * std::cos(psi), 0.0);
  };

  auto push_epoch = [&](double t) {
    TrajectoryEpoch e;
    e.t = t;
    e.pos = pos;
    e.v_l = velocity_of(speed, heading);
    e.att.azimuth = wrap_two_pi(heading);
    traj.epochs.push_back(e);
  };

  long step_idx = 0;
  push_epoch(0.0);
  for (const TrackSegment& seg : params.segments) {
    const long steps = std::lround(seg.duration_s * params.rate_hz);
    for (long k = 0; k < steps; ++k) {
      const Eigen::Vector3d v0 = velocity_of(speed, heading);

      // Speed ramp toward the segment target, heading at the segment rate.
      const double dv = seg.target_speed_mps - speed;
      const double step = params.accel_limit_mps2 * dt;
      speed += std::clamp(dv, -step, step);
      heading += seg.turn_rate_dps * kDegToRad<> * dt;

      const Eigen::Vector3d v1 = velocity_of(speed, heading);
      pos = advance_position(pos, 0.5 * (v0 + v1), dt);
      ++step_idx;
      push_epoch(step_idx * dt);
    }
  }
  return traj;
}

}  // namespace navfuse
