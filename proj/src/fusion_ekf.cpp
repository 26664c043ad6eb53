#include "navfuse/fusion_ekf.hpp"

#include <cmath>
#include <stdexcept>

#include "navfuse/earth.hpp"

namespace navfuse {

namespace {

void curvature_scale(const GeodeticPosition& p, double& east_per_rad,
                     double& north_per_rad) {
  double m_radius = 0, n_radius = 0;
  radii_of_curvature(p.lat, m_radius, n_radius);
  east_per_rad = (n_radius + p.h) * std::cos(p.lat);
  north_per_rad = m_radius + p.h;
}

void check_psd_15(const Mat15& cov, const char* where) {
  Eigen::SelfAdjointEigenSolver<Mat15> es(0.5 * (cov + cov.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + es.eigenvalues().maxCoeff()))
    throw std::runtime_error(std::string(where) + ": covariance lost positive semi-definiteness");
}

}  // namespace

FusionState inject_error(const FusionState& s, const Vec15& delta) {
  FusionState out = s;
  double epr = 0, npr = 0;
  curvature_scale(s.nav.pos, epr, npr);
  out.nav.pos.lat += delta(1) / npr;
  out.nav.pos.lon += delta(0) / epr;
  out.nav.pos.h += delta(2);
  out.nav.v_l += delta.segment<3>(3);
  out.nav.q = (quat_exp<double>(delta.segment<3>(6)) * s.nav.q).normalized();
  out.bias.gyro += delta.segment<3>(9);
  out.bias.accel += delta.segment<3>(12);
  return out;
}

Vec15 error_between(const FusionState& estimate, const MechState& truth_nav,
                    const BiasState& truth_bias) {
  Vec15 d;
  double epr = 0, npr = 0;
  curvature_scale(truth_nav.pos, epr, npr);
  d(0) = wrap_longitude(estimate.nav.pos.lon - truth_nav.pos.lon) * epr;
  d(1) = (estimate.nav.pos.lat - truth_nav.pos.lat) * npr;
  d(2) = estimate.nav.pos.h - truth_nav.pos.h;
  d.segment<3>(3) = estimate.nav.v_l - truth_nav.v_l;
  d.segment<3>(6) = quat_log(estimate.nav.q * truth_nav.q.conjugate());
  d.segment<3>(9) = estimate.bias.gyro - truth_bias.gyro;
  d.segment<3>(12) = estimate.bias.accel - truth_bias.accel;
  return d;
}

Mat15 error_dynamics(const FusionState& s, const ImuSample& imu,
                     const GaussMarkovParams& gm) {
  const EarthNavTerms earth = compute_earth_terms(s.nav.pos, s.nav.v_l, s.nav.q);
  const Eigen::Vector3d f_l = earth.r_b_l * (imu.f_b - s.bias.accel);
  const Eigen::Vector3d w_il = earth.omega_ie_l + earth.omega_el_l;

  Mat15 f = Mat15::Zero();
  f.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  f.block<3, 3>(3, 3) = -skew<double>(2.0 * earth.omega_ie_l + earth.omega_el_l);
  f.block<3, 3>(3, 6) = -skew(f_l);
  f.block<3, 3>(3, 12) = -earth.r_b_l;
  f.block<3, 3>(6, 6) = -skew(w_il);
  f.block<3, 3>(6, 9) = -earth.r_b_l;
  f.block<3, 3>(9, 9) = (-gm.beta_gyro).asDiagonal();
  f.block<3, 3>(12, 12) = (-gm.beta_accel).asDiagonal();
  return f;
}

Mat15 transition_matrix(const FusionState& s, const ImuSample& imu,
                        const GaussMarkovParams& gm, double dt) {
  Mat15 phi = Mat15::Identity() + dt * error_dynamics(s, imu, gm);
  // Bias decay is applied exactly in the mean propagation; mirror it here.
  for (int i = 0; i < 3; ++i) {
    phi(9 + i, 9 + i) = std::exp(-gm.beta_gyro(i) * dt);
    phi(12 + i, 12 + i) = std::exp(-gm.beta_accel(i) * dt);
  }
  return phi;
}

FusionState predict(const FusionState& s, const ImuSample& imu,
                    const GaussMarkovParams& gm, double dt,
                    const MechOptions& mech, double att_process_density) {
  const Mat15 phi = transition_matrix(s, imu, gm, dt);
  const Eigen::Matrix3d r_b_l = rotation_matrix(s.nav.q);

  Mat15 q = Mat15::Zero();
  q.block<3, 3>(3, 3) =
      r_b_l * gm.noise_accel.cwiseAbs2().asDiagonal() * r_b_l.transpose() * dt;
  q.block<3, 3>(6, 6) =
      r_b_l * gm.noise_gyro.cwiseAbs2().asDiagonal() * r_b_l.transpose() * dt +
      att_process_density * att_process_density * dt * Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i) {
    const double dg = std::exp(-2.0 * gm.beta_gyro(i) * dt);
    const double da = std::exp(-2.0 * gm.beta_accel(i) * dt);
    q(9 + i, 9 + i) = gm.sigma_gyro(i) * gm.sigma_gyro(i) * (1.0 - dg);
    q(12 + i, 12 + i) = gm.sigma_accel(i) * gm.sigma_accel(i) * (1.0 - da);
  }

  FusionState out;
  out.nav = mechanize_step(s.nav, imu, s.bias, dt, mech);
  for (int i = 0; i < 3; ++i) {
    out.bias.gyro(i) = std::exp(-gm.beta_gyro(i) * dt) * s.bias.gyro(i);
    out.bias.accel(i) = std::exp(-gm.beta_accel(i) * dt) * s.bias.accel(i);
  }
  out.cov = phi * s.cov * phi.transpose() + q;
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  check_psd_15(out.cov, "fusion predict");
  return out;
}

namespace {

// One gated Joseph-form block update on the running error estimate. With
// `rescue` set, a gated-out innovation is applied anyway with the noise
// inflated until it sits at the gate, which re-captures the aiding source
// after a long run of rejections instead of dead-reckoning forever.
void block_update(FusionState& s, Vec15& d_hat,
                  const Eigen::Matrix<double, 3, 15>& h,
                  const Eigen::Vector3d& residual, const Eigen::Matrix3d& r_cov,
                  double gate, bool rescue, const char* name, double t,
                  std::vector<UpdateEvent>& events) {
  const Eigen::Vector3d innov = residual - h * d_hat;
  Eigen::Matrix3d r_used = r_cov;
  Eigen::Matrix3d s_cov = h * s.cov * h.transpose() + r_used;
  Eigen::Matrix3d s_inv = s_cov.inverse();
  const double mahal = innov.dot(s_inv * innov);

  UpdateEvent ev;
  ev.t = t;
  ev.block = name;
  ev.innovation = innov;
  ev.mahalanobis = mahal;
  ev.accepted = mahal <= gate;
  ev.rescued = !ev.accepted && rescue;
  events.push_back(ev);
  if (!ev.accepted && !rescue) return;
  if (ev.rescued) {
    r_used *= 2.0 * mahal / gate;
    s_cov = h * s.cov * h.transpose() + r_used;
    s_inv = s_cov.inverse();
  }

  const Eigen::Matrix<double, 15, 3> k = s.cov * h.transpose() * s_inv;
  d_hat += k * innov;
  const Mat15 ikh = Mat15::Identity() - k * h;
  s.cov = ikh * s.cov * ikh.transpose() + k * r_used * k.transpose();
  s.cov = (0.5 * (s.cov + s.cov.transpose())).eval();
}

}  // namespace

std::vector<UpdateEvent> update(FusionState& s, const FusionMeasurement& z,
                                const FusionConfig& cfg, const UpdateOptions& opts) {
  if (!z.pos_5g && !z.v_odo_l)
    throw std::domain_error("fusion update: at least one measurement block required");

  std::vector<UpdateEvent> events;
  Vec15 d_hat = Vec15::Zero();

  if (z.pos_5g) {
    double epr = 0, npr = 0;
    curvature_scale(s.nav.pos, epr, npr);
    // Residual of the estimate against the measurement, in meters: this is
    // H d - noise for the error state d = estimate - truth. H is the exact
    // identity on the position-error block.
    const Eigen::Vector3d residual(
        wrap_longitude(s.nav.pos.lon - z.pos_5g->pos.lon) * epr,
        (s.nav.pos.lat - z.pos_5g->pos.lat) * npr,
        s.nav.pos.h - z.pos_5g->pos.h);
    Eigen::Matrix<double, 3, 15> h = Eigen::Matrix<double, 3, 15>::Zero();
    h.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
    block_update(s, d_hat, h, residual, z.pos_5g->cov, cfg.gate_chi2_3dof,
                 opts.rescue_pos, "pos_5g", s.nav.t, events);
  }
  if (z.v_odo_l) {
    // The projected measurement was rotated by the estimated attitude, so
    // its error carries the attitude error: residual = dv + [v x] eps - n.
    // H stays identity on the velocity block plus that exact coupling.
    const Eigen::Vector3d residual = s.nav.v_l - z.v_odo_l->v_l;
    Eigen::Matrix<double, 3, 15> h = Eigen::Matrix<double, 3, 15>::Zero();
    h.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    h.block<3, 3>(0, 6) = skew(s.nav.v_l);
    block_update(s, d_hat, h, residual, z.v_odo_l->cov, cfg.gate_chi2_3dof,
                 opts.rescue_vel, "odo", s.nav.t, events);
  }

  // Closed-loop feedback: remove the estimated error, then the error state
  // is zero by construction.
  if (d_hat.squaredNorm() > 0) {
    const FusionState corrected = inject_error(s, -d_hat);
    s.nav = corrected.nav;
    s.bias = corrected.bias;
  }
  check_psd_15(s.cov, "fusion update");
  return events;
}

VelocityMeasurement project_odometer(const OdoSample& odo, const WheelConfig& wheel,
                                     const FusionState& s, const FusionConfig& cfg) {
  const double v = odo_speed(odo, wheel);
  const Eigen::Matrix3d r_b_l = rotation_matrix(s.nav.q);

  VelocityMeasurement out;
  out.v_l = r_b_l * Eigen::Vector3d(0.0, v, 0.0);
  const Eigen::Vector3d sig2(
      cfg.sigma_nh_lateral_mps * cfg.sigma_nh_lateral_mps,
      cfg.sigma_odo_mps * cfg.sigma_odo_mps,
      cfg.sigma_nh_vertical_mps * cfg.sigma_nh_vertical_mps);
  out.cov = r_b_l * sig2.asDiagonal() * r_b_l.transpose();
  return out;
}

FusionRunResult run_fusion(const FusionState& init, std::span<const ImuSample> imu,
                           std::span<const OdoSample> odo, const WheelConfig& wheel,
                           std::span<const NavSolutionEpoch> fiveg,
                           const FusionConfig& cfg) {
  if (imu.size() < 2)
    throw std::runtime_error("run_fusion: need at least two IMU samples");

  FusionRunResult result;
  FusionState s = init;
  int pos_rejections = 0;
  int vel_rejections = 0;

  auto emit = [&](const FusionState& st) {
    FusedEpoch e;
    e.t = st.nav.t;
    e.pos = st.nav.pos;
    e.v_l = st.nav.v_l;
    e.att = attitude_from_quat(st.nav.q).attitude;
    e.bias = st.bias;
    e.p_trace = st.cov.trace();
    result.solution.push_back(e);
  };
  emit(s);

  std::size_t odo_i = 0, fg_i = 0;
  double last_emit = s.nav.t;

  // Skip aiding data from before the filter start.
  while (odo_i < odo.size() && odo[odo_i].t < s.nav.t - 1e-9) ++odo_i;
  while (fg_i < fiveg.size() && fiveg[fg_i].t < s.nav.t - 1e-9) ++fg_i;

  for (std::size_t k = 0; k + 1 < imu.size(); ++k) {
    if (imu[k].t < s.nav.t - 1e-9) continue;
    const double dt = imu[k + 1].t - imu[k].t;
    if (dt <= 0) throw std::runtime_error("run_fusion: IMU timestamps not increasing");
    if (dt > cfg.max_imu_gap_s)
      throw std::runtime_error("run_fusion: IMU gap exceeds " +
                               std::to_string(cfg.max_imu_gap_s) + " s");

    s = predict(s, imu[k], cfg.gm, dt, cfg.mech, cfg.att_process_density);

    // Measurements due up to half an IMU interval around the new time.
    const double t_now = s.nav.t;
    FusionMeasurement z;
    while (fg_i < fiveg.size() && fiveg[fg_i].t <= t_now + dt / 2) {
      if (fiveg[fg_i].t >= t_now - dt / 2 && fiveg[fg_i].n_los_bs > 0) {
        PositionMeasurement pm;
        pm.pos = fiveg[fg_i].pos;
        pm.cov = fiveg[fg_i].cov_diag.asDiagonal();
        z.pos_5g = pm;
      }
      ++fg_i;
    }
    while (odo_i < odo.size() && odo[odo_i].t <= t_now + dt / 2) {
      if (odo[odo_i].t >= t_now - dt / 2)
        z.v_odo_l = project_odometer(odo[odo_i], wheel, s, cfg);
      ++odo_i;
    }

    if (z.pos_5g || z.v_odo_l) {
      UpdateOptions opts;
      opts.rescue_pos = pos_rejections >= cfg.gate_rescue_after;
      opts.rescue_vel = vel_rejections >= cfg.gate_rescue_after;
      const auto events = update(s, z, cfg, opts);
      for (const UpdateEvent& ev : events) {
        int& counter = ev.block == "pos_5g" ? pos_rejections : vel_rejections;
        counter = (ev.accepted || ev.rescued) ? 0 : counter + 1;
      }
      result.events.insert(result.events.end(), events.begin(), events.end());
    }

    if (t_now - last_emit >= cfg.output_interval_s - 1e-9 || k + 2 == imu.size()) {
      emit(s);
      last_emit = t_now;
    }
  }
  return result;
}

}  // namespace navfuse
