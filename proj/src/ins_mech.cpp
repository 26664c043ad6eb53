#include "navfuse/ins_mech.hpp"

#include <cmath>
#include <stdexcept>

namespace navfuse {

MechState mechanize_step(const MechState& s, const ImuSample& imu,
                         const BiasState& bias, double dt,
                         const MechOptions& opts) {
  if (dt <= 0 || dt > 0.1)
    throw std::domain_error("mechanize_step: dt must be in (0, 0.1] s");

  EarthNavTerms earth = compute_earth_terms(s.pos, s.v_l, s.q);
  if (!opts.compensate_earth_terms) {
    earth.omega_ie_l.setZero();
    earth.omega_el_l.setZero();
  }

  const Eigen::Vector3d f_b = imu.f_b - bias.accel;
  const Eigen::Vector3d w_b = imu.w_b - bias.gyro;

  // Attitude: body-referenced rotation rate, first-order quaternion update.
  const Eigen::Vector3d w_lb_b =
      w_b - earth.r_b_l.transpose() * (earth.omega_ie_l + earth.omega_el_l);
  const Eigen::Matrix<double, 4, 1> q_new =
      s.q.coeffs() + 0.5 * dt * omega_matrix<double>(w_lb_b) * s.q.coeffs();

  // Velocity: specific force in l-frame, Coriolis/transport, gravity.
  const Eigen::Vector3d f_l = earth.r_b_l * f_b;
  const Eigen::Vector3d accel_l =
      f_l - (2.0 * earth.omega_ie_l + earth.omega_el_l).cross(s.v_l) + earth.g_l;

  MechState out;
  out.q = Quaterniond::from_coeffs(q_new).normalized();
  out.v_l = s.v_l + dt * accel_l;
  out.pos = advance_position(s.pos, 0.5 * (s.v_l + out.v_l), dt);
  out.t = s.t + dt;
  return out;
}

MechState make_mech_state(const TrajectoryEpoch& e) {
  MechState s;
  s.pos = e.pos;
  s.v_l = e.v_l;
  s.q = quat_from_attitude(e.att);
  s.t = e.t;
  return s;
}

bool stationarity_detect(std::span<const ImuSample> imu_window,
                         std::span<const OdoSample> odo_window,
                         const WheelConfig& wheel,
                         const StationarityThresholds& th) {
  if (imu_window.size() < 2) return false;
  const double span = imu_window.back().t - imu_window.front().t;
  if (span < th.min_window_s) return false;

  double mean_w = 0, mean_w2 = 0, mean_f = 0;
  for (const ImuSample& s : imu_window) {
    const double wn = s.w_b.norm();
    mean_w += wn;
    mean_w2 += wn * wn;
    mean_f += s.f_b.norm();
  }
  const double n = static_cast<double>(imu_window.size());
  mean_w /= n;
  mean_w2 /= n;
  mean_f /= n;
  const double gyro_std = std::sqrt(std::max(0.0, mean_w2 - mean_w * mean_w));
  // Compare against gravity at a nominal mid-latitude; the threshold is much
  // coarser than the latitude dependence of g.
  const double g_ref = normal_gravity(std::numbers::pi / 4, 0.0);
  if (gyro_std > th.gyro_std_max) return false;
  if (std::abs(mean_f - g_ref) > th.accel_dev_max) return false;

  if (!odo_window.empty()) {
    double mean_v = 0;
    for (const OdoSample& o : odo_window) mean_v += odo_speed(o, wheel);
    mean_v /= static_cast<double>(odo_window.size());
    if (mean_v > th.speed_max) return false;
  }
  return true;
}

std::vector<InsSolutionEpoch> run_ins_standalone(
    const MechState& init, std::span<const ImuSample> imu,
    std::span<const OdoSample> odo, const WheelConfig& wheel,
    const InsRunOptions& opts) {
  if (imu.size() < 2)
    throw std::runtime_error("run_ins_standalone: need at least two IMU samples");

  std::vector<InsSolutionEpoch> out;
  MechState s = init;
  const BiasState zero_bias;

  auto emit = [&](const MechState& st) {
    InsSolutionEpoch e;
    e.t = st.t;
    e.pos = st.pos;
    e.v_l = st.v_l;
    e.att = attitude_from_quat(st.q).attitude;
    out.push_back(e);
  };
  emit(s);

  double last_emit = s.t;
  std::size_t odo_lo = 0;
  std::size_t win_lo = 0;
  for (std::size_t k = 0; k + 1 < imu.size(); ++k) {
    const double dt = imu[k + 1].t - imu[k].t;

    bool hold = false;
    if (opts.zupt_enabled) {
      while (win_lo < k &&
             imu[k].t - imu[win_lo].t > opts.stationarity.min_window_s + 1e-9)
        ++win_lo;
      while (odo_lo < odo.size() && odo[odo_lo].t < imu[win_lo].t) ++odo_lo;
      std::size_t odo_hi = odo_lo;
      while (odo_hi < odo.size() && odo[odo_hi].t <= imu[k].t) ++odo_hi;
      hold = stationarity_detect(imu.subspan(win_lo, k - win_lo + 1),
                                 odo.subspan(odo_lo, odo_hi - odo_lo), wheel,
                                 opts.stationarity);
    }

    if (hold) {
      s.v_l.setZero();
      s.t = imu[k + 1].t;
    } else {
      s = mechanize_step(s, imu[k], zero_bias, dt, opts.mech);
    }

    if (s.t - last_emit >= opts.output_interval_s - 1e-9 || k + 2 == imu.size()) {
      emit(s);
      last_emit = s.t;
    }
  }
  return out;
}

}  // namespace navfuse
