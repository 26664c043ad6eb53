#include "navfuse/fiveg_fix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "navfuse/sensor_sim.hpp"

namespace navfuse {

LosDecision nlos_detect(const RangePair& pair, double gamma_m) {
  if (gamma_m <= 0) throw std::domain_error("nlos_detect: gamma must be positive");
  if (pair.r_time <= 0 || pair.r_power <= 0)
    throw std::domain_error("nlos_detect: ranges must be positive");
  return (pair.r_time - pair.r_power) > gamma_m ? LosDecision::kNlos
                                                : LosDecision::kLos;
}

RangePair compute_range_pair(const Meas5G& m, const FivegFixConfig& cfg) {
  RangePair p;
  p.r_time = kSpeedOfLight<> * m.rtt_s / 2.0;
  p.r_power = power_implied_range_m(m.rx_power_dbm, cfg.tx_power_dbm,
                                    cfg.pathloss_exponent, cfg.pathloss_ref_m,
                                    cfg.carrier_hz);
  return p;
}

SingleBsFix single_bs_fix(const Meas5G& m, const BsSite& bs, double h_ue,
                          const FivegFixConfig& cfg) {
  const double r = kSpeedOfLight<> * m.rtt_s / 2.0;
  const double dz = h_ue - bs.pos.z;
  if (r <= std::abs(dz))
    throw std::domain_error("single_bs_fix: range does not clear the BS height offset");

  const double r2d = std::sqrt(r * r - dz * dz);
  const double st = std::sin(m.aod_h_rad);
  const double ct = std::cos(m.aod_h_rad);

  SingleBsFix fix;
  fix.bs_id = m.bs_id;
  fix.t = m.t;
  fix.r_2d = r2d;
  fix.pos.x = r2d * st + bs.pos.x;
  fix.pos.y = r2d * ct + bs.pos.y;
  fix.pos.z = h_ue;
  fix.pos.zone = bs.pos.zone;
  fix.pos.north = bs.pos.north;

  // First-order error propagation: range error maps along the bearing with
  // gain dr2d/dr = r/r2d, AOD error across it with lever arm r2d.
  const double sigma_along = cfg.sigma_range_m * (r2d > 1e-9 ? r / r2d : 1.0);
  const double sigma_across = r2d * cfg.sigma_aod_rad;
  const Eigen::Vector2d along(st, ct);
  const Eigen::Vector2d across(ct, -st);
  Eigen::Matrix2d horiz = sigma_along * sigma_along * along * along.transpose() +
                          sigma_across * sigma_across * across * across.transpose();
  fix.cov.setZero();
  fix.cov.topLeftCorner<2, 2>() = horiz;
  fix.cov(2, 2) = cfg.sigma_height_m * cfg.sigma_height_m;
  return fix;
}

namespace {

void check_psd(const Eigen::Matrix<double, 6, 6>& cov, const char* where) {
  const Eigen::Matrix<double, 6, 6> sym = 0.5 * (cov + cov.transpose());
  if ((cov - sym).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + sym.cwiseAbs().maxCoeff()))
    throw std::runtime_error(std::string(where) + ": covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(sym);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::runtime_error(std::string(where) + ": covariance not PSD");
}

}  // namespace

namespace {

void apply_fixes(CvKfState& s, std::span<const SingleBsFix> fixes) {
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
  h.leftCols<3>() = Eigen::Matrix3d::Identity();

  for (const SingleBsFix& fix : fixes) {
    const Eigen::Vector3d z(fix.pos.x, fix.pos.y, fix.pos.z);
    const Eigen::Vector3d innov = z - h * s.x;
    const Eigen::Matrix3d gain_den = h * s.cov * h.transpose() + fix.cov;
    const Eigen::Matrix<double, 6, 3> k =
        s.cov * h.transpose() * gain_den.inverse();
    s.x += k * innov;
    const Mat6 ikh = Mat6::Identity() - k * h;
    s.cov = ikh * s.cov * ikh.transpose() + k * fix.cov * k.transpose();
  }
  s.cov = ((s.cov + s.cov.transpose()) / 2.0).eval();
}

}  // namespace

CvKfState cv_kf_step(const CvKfState& state, std::span<const SingleBsFix> fixes,
                     double dt, double q_accel) {
  if (dt <= 0) throw std::domain_error("cv_kf_step: dt must be positive");
  check_psd(state.cov, "cv_kf_step(in)");

  using Mat6 = Eigen::Matrix<double, 6, 6>;

  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();

  Mat6 q = Mat6::Zero();
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  q.topLeftCorner<3, 3>() = (q_accel * dt3 / 3.0) * Eigen::Matrix3d::Identity();
  q.topRightCorner<3, 3>() = (q_accel * dt2 / 2.0) * Eigen::Matrix3d::Identity();
  q.bottomLeftCorner<3, 3>() = q.topRightCorner<3, 3>();
  q.bottomRightCorner<3, 3>() = (q_accel * dt) * Eigen::Matrix3d::Identity();

  CvKfState out;
  out.t = state.t + dt;
  out.x = f * state.x;
  out.cov = f * state.cov * f.transpose() + q;

  apply_fixes(out, fixes);
  check_psd(out.cov, "cv_kf_step(out)");
  return out;
}

FivegRunResult run_5g_standalone(std::span<const Meas5G> meas,
                                 const std::vector<BsSite>& sites,
                                 const FivegFixConfig& cfg, int zone, bool north,
                                 double rate_hz, double t_end) {
  if (rate_hz <= 0)
    throw std::domain_error("run_5g_standalone: rate must be positive");
  std::map<int, const BsSite*> site_by_id;
  for (const BsSite& s : sites) site_by_id[s.id] = &s;

  FivegRunResult result;
  CvKfState state;
  bool initialized = false;
  double prev_t = 0;
  const double dt_epoch = 1.0 / rate_hz;

  if (meas.empty()) return result;
  const double t0 = meas.front().t;
  const long n_epochs =
      std::max<long>(1, static_cast<long>(std::floor((t_end - t0) / dt_epoch + 1e-9)) + 1);

  std::size_t i = 0;
  for (long epoch = 0; epoch < n_epochs; ++epoch) {
    const double t = t0 + epoch * dt_epoch;
    std::size_t j = i;
    while (j < meas.size() && meas[j].t <= t + dt_epoch / 2) ++j;

    std::vector<SingleBsFix> fixes;
    int n_los = 0;
    for (std::size_t k = i; k < j; ++k) {
      const Meas5G& m = meas[k];
      const auto it = site_by_id.find(m.bs_id);
      if (it == site_by_id.end()) continue;

      const RangePair pair = compute_range_pair(m, cfg);
      LosDecision decision = LosDecision::kLos;
      if (cfg.detector_enabled) {
        if (pair.r_time <= 0 || pair.r_power <= 0) continue;
        decision = nlos_detect(pair, cfg.gamma_m);
      }
      result.decisions.push_back({m.t, m.bs_id, pair.r_time, pair.r_power,
                                  decision, m.truth_los});
      if (decision == LosDecision::kNlos) continue;
      if (m.aod_degenerate) continue;

      try {
        fixes.push_back(single_bs_fix(m, *it->second, cfg.ue_height_m, cfg));
        ++n_los;
      } catch (const std::domain_error&) {
        // Degenerate geometry for this BS; skip the fix, keep the epoch.
      }
    }

    if (!initialized) {
      if (!fixes.empty()) {
        state.x.head<3>() =
            Eigen::Vector3d(fixes[0].pos.x, fixes[0].pos.y, fixes[0].pos.z);
        state.x.tail<3>().setZero();
        state.cov.setZero();
        state.cov.topLeftCorner<3, 3>() =
            cfg.init_pos_std_m * cfg.init_pos_std_m * Eigen::Matrix3d::Identity();
        state.cov.bottomRightCorner<3, 3>() =
            cfg.init_vel_std_ms * cfg.init_vel_std_ms * Eigen::Matrix3d::Identity();
        state.t = t;
        apply_fixes(state, std::span<const SingleBsFix>(fixes));
        initialized = true;
        prev_t = t;
      }
    } else {
      const double dt = t - prev_t;
      if (dt > 0) {
        state = cv_kf_step(state, fixes, dt, cfg.q_accel);
        prev_t = t;
      }
    }

    if (initialized) {
      NavSolutionEpoch out;
      out.t = t;
      UtmPosition u;
      u.x = state.x(0);
      u.y = state.x(1);
      u.z = state.x(2);
      u.zone = zone;
      u.north = north;
      out.pos = utm_to_geodetic(u);
      out.cov_diag = state.cov.topLeftCorner<3, 3>().diagonal();
      out.n_los_bs = n_los;
      result.solution.push_back(out);
    }
    i = j;
  }
  return result;
}

}  // namespace navfuse
