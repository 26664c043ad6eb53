#include "navfuse/sensor_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "navfuse/earth.hpp"
#include "navfuse/ins_mech.hpp"
#include "navfuse/random.hpp"

namespace navfuse {

double fspl_db(double d_m, double carrier_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * d_m * carrier_hz /
                           kSpeedOfLight<>);
}

double log_distance_power_dbm(double r_m, const FivegSimConfig& cfg) {
  return cfg.tx_power_dbm - fspl_db(cfg.pathloss_ref_m, cfg.carrier_hz) -
         10.0 * cfg.pathloss_exponent * std::log10(r_m / cfg.pathloss_ref_m);
}

double power_implied_range_m(double rx_power_dbm, double tx_power_dbm,
                             double pathloss_exponent, double pathloss_ref_m,
                             double carrier_hz) {
  const double p_ref = tx_power_dbm - fspl_db(pathloss_ref_m, carrier_hz);
  return pathloss_ref_m *
         std::pow(10.0, (p_ref - rx_power_dbm) / (10.0 * pathloss_exponent));
}

std::vector<Meas5G> gen_5g(const Trajectory& traj, const std::vector<BsSite>& sites,
                           const VisibilityModel& vis, const FivegSimConfig& cfg,
                           int zone, bool north, std::uint64_t seed) {
  if (cfg.rate_hz <= 0) throw std::domain_error("gen_5g: rate must be positive");
  validate_trajectory(traj);

  std::mt19937_64 rng = make_rng(seed, "5g");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<Meas5G> out;
  const double dt = 1.0 / cfg.rate_hz;
  const long n_epochs = static_cast<long>(std::floor(traj.duration() / dt + 1e-9)) + 1;

  for (long k = 0; k < n_epochs; ++k) {
    const double t = traj.start_time() + k * dt;
    const TrajectoryEpoch e = interpolate(traj, t);
    const UtmPosition ue = geodetic_to_utm(e.pos, zone, north);

    for (const BsSite& bs : sites) {
      const LinkState state = visibility(vis, bs, ue, t);
      if (state == LinkState::kBlocked) continue;

      const double dx = ue.x - bs.pos.x;
      const double dy = ue.y - bs.pos.y;
      const double dz = ue.z - bs.pos.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (r <= 0) continue;

      Meas5G m;
      m.t = t;
      m.bs_id = bs.id;
      m.truth_los = state == LinkState::kLos;

      double time_range = r;
      if (state == LinkState::kNlos)
        time_range += cfg.nlos_bias_min_m +
                      uniform(rng) * (cfg.nlos_bias_max_m - cfg.nlos_bias_min_m);
      m.rtt_s = 2.0 * time_range / kSpeedOfLight<> + gauss(rng) * cfg.sigma_rtt_s;

      const double horiz = std::hypot(dx, dy);
      if (horiz < 1e-9) {
        m.aod_degenerate = true;
        m.aod_h_rad = 0.0;
      } else {
        m.aod_h_rad = std::atan2(dx, dy) + gauss(rng) * cfg.sigma_aod_rad;
      }
      m.aod_v_rad = std::asin(std::clamp(dz / r, -1.0, 1.0)) +
                    gauss(rng) * cfg.sigma_aod_rad;

      // Power follows the geometric range, not the elongated time path, so
      // the range pair stays separable for the detector.
      m.rx_power_dbm = log_distance_power_dbm(r, cfg) + gauss(rng) * cfg.sigma_power_db;
      if (state == LinkState::kNlos) m.rx_power_dbm -= cfg.nlos_extra_atten_db;

      out.push_back(m);
    }
  }
  return out;
}

double gm_discrete_step(double bias, double beta, double sigma, double dt,
                        double noise_draw) {
  if (beta < 0) throw std::domain_error("gm_discrete_step: beta must be >= 0");
  if (dt <= 0) throw std::domain_error("gm_discrete_step: dt must be positive");
  const double decay = std::exp(-beta * dt);
  const double n_std = sigma * std::sqrt(std::max(0.0, 1.0 - decay * decay));
  return decay * bias + n_std * noise_draw;
}

ImuStream gen_imu(const Trajectory& traj, const ImuSimConfig& cfg, std::uint64_t seed) {
  if (cfg.rate_hz < 50)
    throw std::domain_error("gen_imu: IMU rate below 50 Hz is not supported");
  validate_trajectory(traj);

  const Trajectory tr = resample(traj, cfg.rate_hz);
  const double dt = 1.0 / cfg.rate_hz;

  std::mt19937_64 rng = make_rng(seed, "imu");
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Initial bias: stationary draw unless pinned by the caller.
  BiasState bias;
  if (cfg.initial_bias) {
    bias = *cfg.initial_bias;
  } else {
    for (int i = 0; i < 3; ++i) bias.gyro(i) = cfg.gm.sigma_gyro(i) * gauss(rng);
    for (int i = 0; i < 3; ++i) bias.accel(i) = cfg.gm.sigma_accel(i) * gauss(rng);
  }

  const double sqrt_rate = std::sqrt(cfg.rate_hz);
  const double max_step_rad = 10.0 * kDegToRad<>;

  ImuStream out;
  out.samples.reserve(tr.size() - 1);
  out.bias_truth.reserve(tr.size() - 1);

  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const TrajectoryEpoch& a = tr.epochs[k];
    const TrajectoryEpoch& b = tr.epochs[k + 1];

    const Quaterniond qa = quat_from_attitude(a.att);
    const Quaterniond qb = quat_from_attitude(b.att);
    Quaterniond d = qa.conjugate() * qb;
    if (d.w < 0) d = {-d.w, -d.x, -d.y, -d.z};
    if (2.0 * std::atan2(std::hypot(d.x, d.y, d.z), d.w) > max_step_rad)
      throw std::runtime_error("gen_imu: attitude discontinuity > 10 deg at t=" +
                               std::to_string(a.t));

    // Inverse of the first-order quaternion update: q_b = q_a (1, dt/2 w).
    const Eigen::Vector3d w_lb_b = (2.0 / dt / d.w) * Eigen::Vector3d(d.x, d.y, d.z);

    const EarthNavTerms earth = compute_earth_terms(a.pos, a.v_l, qa);
    const Eigen::Matrix3d r_l_b = earth.r_b_l.transpose();
    const Eigen::Vector3d w_ideal =
        w_lb_b + r_l_b * (earth.omega_ie_l + earth.omega_el_l);

    // Inverse of the velocity update.
    const Eigen::Vector3d f_ideal =
        r_l_b * ((b.v_l - a.v_l) / dt - earth.g_l +
                 (2.0 * earth.omega_ie_l + earth.omega_el_l).cross(a.v_l));

    out.bias_truth.push_back(bias);

    ImuSample s;
    s.t = a.t;
    for (int i = 0; i < 3; ++i) {
      s.w_b(i) = w_ideal(i) + bias.gyro(i) +
                 cfg.gm.noise_gyro(i) * sqrt_rate * gauss(rng);
      s.f_b(i) = f_ideal(i) + bias.accel(i) +
                 cfg.gm.noise_accel(i) * sqrt_rate * gauss(rng);
    }
    out.samples.push_back(s);

    for (int i = 0; i < 3; ++i) {
      bias.gyro(i) = gm_discrete_step(bias.gyro(i), cfg.gm.beta_gyro(i),
                                      cfg.gm.sigma_gyro(i), dt, gauss(rng));
      bias.accel(i) = gm_discrete_step(bias.accel(i), cfg.gm.beta_accel(i),
                                       cfg.gm.sigma_accel(i), dt, gauss(rng));
    }
  }
  return out;
}

std::vector<OdoSample> gen_odo(const Trajectory& traj, const WheelConfig& wheel,
                               const OdoSimConfig& cfg, std::uint64_t seed) {
  if (cfg.rate_hz <= 0) throw std::domain_error("gen_odo: rate must be positive");
  if (wheel.radius_m <= 0) throw std::domain_error("gen_odo: wheel radius must be positive");
  validate_trajectory(traj);

  std::mt19937_64 rng = make_rng(seed, "odo");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 + cfg.scale_error + cfg.sigma_scale * gauss(rng);

  std::vector<OdoSample> out;
  const double dt = 1.0 / cfg.rate_hz;
  const long n = static_cast<long>(std::floor(traj.duration() / dt + 1e-9)) + 1;
  out.reserve(n);
  const double circumference = 2.0 * std::numbers::pi * wheel.radius_m;

  for (long k = 0; k < n; ++k) {
    const double t = traj.start_time() + k * dt;
    const TrajectoryEpoch e = interpolate(traj, t);
    const double speed = std::hypot(e.v_l(0), e.v_l(1));
    const double noisy = speed * scale + cfg.sigma_speed_mps * gauss(rng);
    OdoSample s;
    s.t = t;
    s.wheel_rate_rps = std::max(0.0, noisy) / circumference;
    out.push_back(s);
  }
  return out;
}

}  // namespace navfuse
