#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "navfuse/fiveg_fix.hpp"
#include "navfuse/pipeline.hpp"
#include "navfuse/sensor_sim.hpp"

using namespace navfuse;

namespace {

constexpr int kZone = 17;

Meas5G meas_from(double r_m, double theta, int bs_id = 0, double t = 0) {
  Meas5G m;
  m.t = t;
  m.bs_id = bs_id;
  m.rtt_s = 2.0 * r_m / kSpeedOfLight<>;
  m.aod_h_rad = theta;
  return m;
}

ScenarioConfig small_scenario(std::uint64_t seed) {
  ScenarioConfig cfg = default_config();
  cfg.seed = seed;
  cfg.trajectory.segments = {{40.0, 10.0, 0.0}, {9.0, 10.0, -10.0},
                             {40.0, 10.0, 0.0}, {9.0, 10.0, -10.0},
                             {40.0, 10.0, 0.0}};
  cfg.visibility.outage_windows = {{45.0, 60.0}};
  cfg.visibility.auto_nlos_fraction = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("NLOS detector thresholds") {
  CHECK(nlos_detect({150.0, 149.2}, 5.0) == LosDecision::kLos);
  CHECK(nlos_detect({180.0, 150.0}, 5.0) == LosDecision::kNlos);
  CHECK(nlos_detect({120.0, 120.0}, 0.001) == LosDecision::kLos);
  CHECK(nlos_detect({120.0, 120.0}, 1000.0) == LosDecision::kLos);
  // One-sided: a long power range is not NLOS evidence.
  CHECK(nlos_detect({120.0, 170.0}, 5.0) == LosDecision::kLos);
  CHECK_THROWS_AS(nlos_detect({-1.0, 100.0}, 5.0), std::domain_error);
  CHECK_THROWS_AS(nlos_detect({100.0, 0.0}, 5.0), std::domain_error);
  CHECK_THROWS_AS(nlos_detect({100.0, 100.0}, 0.0), std::domain_error);
}

TEST_CASE("range pair inverts the path-loss model") {
  FivegSimConfig sim;
  sim.sigma_rtt_s = 0;
  sim.sigma_power_db = 0;
  FivegFixConfig cfg;
  const double r = 217.0;
  Meas5G m = meas_from(r, 0.3);
  m.rx_power_dbm = log_distance_power_dbm(r, sim);
  const RangePair pair = compute_range_pair(m, cfg);
  CHECK(pair.r_time == doctest::Approx(r).epsilon(1e-12));
  CHECK(pair.r_power == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("single-BS fix reconstructs the forward geometry example") {
  BsSite bs;
  bs.pos = {500.0, 1000.0, 25.0, kZone, true};
  FivegFixConfig cfg;

  // Exact inputs: the fix is exact.
  const double r = std::sqrt(40529.0);
  const double theta = std::atan2(120.0, 160.0);
  SingleBsFix fix = single_bs_fix(meas_from(r, theta), bs, 2.0, cfg);
  CHECK(std::abs(fix.pos.x - 620.0) < 1e-9);
  CHECK(std::abs(fix.pos.y - 1160.0) < 1e-9);
  CHECK(fix.pos.z == 2.0);

  // Rounded inputs at the printed precision still land within a millimeter.
  fix = single_bs_fix(meas_from(201.3182, 0.6435011), bs, 2.0, cfg);
  CHECK(std::abs(fix.pos.x - 620.0) < 1e-3);
  CHECK(std::abs(fix.pos.y - 1160.0) < 1e-3);
}

TEST_CASE("single-BS fix axis-aligned and boundary geometries") {
  BsSite bs;
  bs.pos = {300.0, 700.0, 12.0, kZone, true};
  FivegFixConfig cfg;

  // Due north at BS height: y offset only.
  SingleBsFix fix = single_bs_fix(meas_from(100.0, 0.0), bs, 12.0, cfg);
  CHECK(std::abs(fix.pos.x - 300.0) < 1e-9);
  CHECK(std::abs(fix.pos.y - 800.0) < 1e-9);

  // Barely clearing the height offset collapses onto the BS horizontal.
  const double dz = 23.0;
  fix = single_bs_fix(meas_from(dz + 1e-9, 1.0), bs, 12.0 + dz, cfg);
  CHECK(std::abs(fix.pos.x - 300.0) < 1e-3);
  CHECK(std::abs(fix.pos.y - 700.0) < 1e-3);

  // Inside the vertical cylinder: geometry error.
  CHECK_THROWS_AS(single_bs_fix(meas_from(dz - 1e-6, 1.0), bs, 12.0 + dz, cfg),
                  std::domain_error);
}

TEST_CASE("fix covariance aligns with the bearing") {
  BsSite bs;
  bs.pos = {0.0, 0.0, 10.0, kZone, true};
  FivegFixConfig cfg;
  cfg.sigma_range_m = 0.5;
  cfg.sigma_aod_rad = 0.01;

  const double theta = 0.7;
  const SingleBsFix fix = single_bs_fix(meas_from(200.0, theta), bs, 10.0, cfg);
  const Eigen::Vector2d along(std::sin(theta), std::cos(theta));
  const Eigen::Vector2d across(std::cos(theta), -std::sin(theta));
  const Eigen::Matrix2d horiz = fix.cov.topLeftCorner<2, 2>();

  CHECK(std::abs(along.dot(horiz * along) - 0.25) < 1e-9);
  CHECK(std::abs(across.dot(horiz * across) - 4.0) < 1e-9);  // (200 * 0.01)^2
  CHECK(std::abs(along.dot(horiz * across)) < 1e-9);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(fix.cov);
  CHECK(es.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("noiseless LOS fixes are exact over random geometries") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FivegFixConfig cfg;
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    BsSite bs;
    bs.pos = {1000.0 * u(rng), 1000.0 * u(rng), 15.0 + 20.0 * u(rng), kZone, true};
    const double h_ue = 2.0;
    const Eigen::Vector3d ue(1000.0 * u(rng), 1000.0 * u(rng), h_ue);
    const Eigen::Vector3d d = ue - Eigen::Vector3d(bs.pos.x, bs.pos.y, bs.pos.z);
    if (d.head<2>().norm() < 1.0) continue;
    const SingleBsFix fix =
        single_bs_fix(meas_from(d.norm(), std::atan2(d.x(), d.y())), bs, h_ue, cfg);
    worst = std::max(worst, std::hypot(fix.pos.x - ue.x(), fix.pos.y - ue.y()));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("CV filter converges to repeated identical fixes") {
  CvKfState s;
  s.x << 10.0, 20.0, 2.0, 0.0, 0.0, 0.0;
  s.cov = Eigen::Matrix<double, 6, 6>::Identity() * 100.0;

  SingleBsFix fix;
  fix.pos = {15.0, 25.0, 2.0, kZone, true};
  fix.cov = 0.25 * Eigen::Matrix3d::Identity();

  double prev_trace = s.cov.trace();
  for (int k = 0; k < 50; ++k) {
    s = cv_kf_step(s, std::span(&fix, 1), 0.1, 0.0);
    CHECK(s.cov.trace() <= prev_trace + 1e-12);
    prev_trace = s.cov.trace();
  }
  CHECK(std::abs(s.x(0) - 15.0) < 1e-3);
  CHECK(std::abs(s.x(1) - 25.0) < 1e-3);
  CHECK(s.x.tail<3>().norm() < 1e-3);
}

TEST_CASE("coasting covariance matches the closed form") {
  CvKfState s;
  s.cov.setZero();
  s.cov.diagonal() << 4.0, 4.0, 4.0, 1.0, 1.0, 1.0;
  const double q = 0.7, dt = 0.1;
  const int k_steps = 40;

  CvKfState c = s;
  for (int k = 0; k < k_steps; ++k) c = cv_kf_step(c, {}, dt, q);

  const double t = k_steps * dt;
  // Per-axis closed form for the CV model with white-acceleration PSD q.
  const double p_pp = 4.0 + t * t * 1.0 + q * t * t * t / 3.0;
  const double p_pv = t * 1.0 + q * t * t / 2.0;
  const double p_vv = 1.0 + q * t;
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(c.cov(axis, axis) == doctest::Approx(p_pp).epsilon(1e-10));
    CHECK(c.cov(axis, axis + 3) == doctest::Approx(p_pv).epsilon(1e-10));
    CHECK(c.cov(axis + 3, axis + 3) == doctest::Approx(p_vv).epsilon(1e-10));
  }
  CHECK(c.x.norm() == 0.0);
}

TEST_CASE("filter x-axis matches a hand-rolled scalar KF") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt = 0.1, q = 0.5, r_var = 0.09;

  CvKfState s;
  s.cov.setZero();
  s.cov.diagonal() << 25.0, 25.0, 25.0, 4.0, 4.0, 4.0;

  // Scalar oracle state [x, vx] with the same initials.
  Eigen::Vector2d xs(0.0, 0.0);
  Eigen::Matrix2d ps;
  ps << 25.0, 0.0, 0.0, 4.0;

  for (int k = 0; k < 100; ++k) {
    const double z = std::sin(0.05 * k) * 10.0 + 0.3 * gauss(rng);

    SingleBsFix fix;
    fix.pos = {z, 0.0, 0.0, kZone, true};
    fix.cov = r_var * Eigen::Matrix3d::Identity();
    fix.t = (k + 1) * dt;
    s = cv_kf_step(s, std::span(&fix, 1), dt, q);

    // Oracle: predict.
    Eigen::Matrix2d f;
    f << 1.0, dt, 0.0, 1.0;
    Eigen::Matrix2d qm;
    qm << q * dt * dt * dt / 3.0, q * dt * dt / 2.0, q * dt * dt / 2.0, q * dt;
    xs = f * xs;
    ps = f * ps * f.transpose() + qm;
    // Oracle: scalar position update.
    const double sden = ps(0, 0) + r_var;
    const Eigen::Vector2d gain = ps.col(0) / sden;
    xs += gain * (z - xs(0));
    ps = (Eigen::Matrix2d::Identity() - gain * Eigen::RowVector2d(1.0, 0.0)) * ps;

    CHECK(std::abs(s.x(0) - xs(0)) < 1e-10);
    CHECK(std::abs(s.x(3) - xs(1)) < 1e-10);
    CHECK(std::abs(s.cov(0, 0) - ps(0, 0)) < 1e-10);
    CHECK(std::abs(s.cov(0, 3) - ps(0, 1)) < 1e-10);
    CHECK(std::abs(s.cov(3, 3) - ps(1, 1)) < 1e-10);
  }
}

TEST_CASE("same-epoch fix order does not change the posterior") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CvKfState s;
  s.x << 100.0, 200.0, 2.0, 1.0, -2.0, 0.0;
  s.cov.setZero();
  s.cov.diagonal() << 9.0, 9.0, 9.0, 1.0, 1.0, 1.0;

  std::vector<SingleBsFix> fixes(3);
  for (int i = 0; i < 3; ++i) {
    fixes[i].pos = {100.0 + u(rng), 200.0 + u(rng), 2.0 + 0.1 * u(rng), kZone, true};
    fixes[i].cov = (0.2 + 0.1 * i) * Eigen::Matrix3d::Identity();
  }
  std::vector<SingleBsFix> permuted = {fixes[2], fixes[0], fixes[1]};

  const CvKfState a = cv_kf_step(s, fixes, 0.1, 1.0);
  const CvKfState b = cv_kf_step(s, permuted, 0.1, 1.0);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cv_kf_step rejects invalid input") {
  CvKfState s;
  s.cov.setIdentity();
  CHECK_THROWS_AS(cv_kf_step(s, {}, 0.0, 1.0), std::domain_error);
  s.cov(0, 1) = 5.0;  // asymmetric
  CHECK_THROWS_AS(cv_kf_step(s, {}, 0.1, 1.0), std::runtime_error);
}

TEST_CASE("5G standalone run: outage coasting blows up on a turn") {
  const ScenarioConfig cfg = small_scenario(11);
  const ScenarioArtifacts art = simulate_scenario(cfg);
  const FivegRunResult run = run_5g_sa(cfg, art);
  REQUIRE(!run.solution.empty());

  std::vector<SolutionEpochPos> pos;
  for (const auto& e : run.solution) pos.push_back({e.t, e.pos});
  const ErrorSeries errors = compute_errors(pos, art.truth, kZone, true);

  // Split errors into the scripted outage [45, 60] and coverage.
  double max_outage = 0;
  std::vector<double> coverage;
  for (std::size_t i = 0; i < errors.t.size(); ++i) {
    if (errors.t[i] >= 45.0 && errors.t[i] < 60.0)
      max_outage = std::max(max_outage, errors.error_3d_m[i]);
    else
      coverage.push_back(errors.error_3d_m[i]);
  }
  std::sort(coverage.begin(), coverage.end());
  const double p95_cov = coverage[static_cast<std::size_t>(0.95 * coverage.size())];
  CHECK(max_outage > 5.0 * p95_cov);
  CHECK(p95_cov < 1.0);

  // Coasting epochs are emitted with zero LOS BSs during the outage.
  bool coasted = false;
  for (const auto& e : run.solution)
    if (e.t > 46.0 && e.t < 59.0) coasted = coasted || e.n_los_bs == 0;
  CHECK(coasted);
}

TEST_CASE("NLOS detector recall/FPR and effect on accuracy") {
  ScenarioConfig cfg = small_scenario(13);
  cfg.visibility.outage_windows.clear();
  cfg.visibility.auto_nlos_fraction = 0.25;
  cfg.visibility.auto_nlos_window_s = 10.0;
  const ScenarioArtifacts art = simulate_scenario(cfg);

  const FivegRunResult with_det = run_5g_sa(cfg, art);
  std::size_t nlos_total = 0, nlos_caught = 0, los_total = 0, los_flagged = 0;
  for (const DetectorDecision& d : with_det.decisions) {
    if (!d.truth_los) {
      ++nlos_total;
      if (d.decision == LosDecision::kNlos) ++nlos_caught;
    } else {
      ++los_total;
      if (d.decision == LosDecision::kNlos) ++los_flagged;
    }
  }
  REQUIRE(nlos_total > 100);
  CHECK(static_cast<double>(nlos_caught) / nlos_total >= 0.99);
  CHECK(static_cast<double>(los_flagged) / los_total <= 0.01);

  ScenarioConfig cfg_off = cfg;
  cfg_off.fiveg_fix.detector_enabled = false;
  const FivegRunResult without_det = run_5g_sa(cfg_off, art);

  auto p95_of = [&](const FivegRunResult& r) {
    std::vector<SolutionEpochPos> pos;
    for (const auto& e : r.solution) pos.push_back({e.t, e.pos});
    return compute_report(compute_errors(pos, art.truth, kZone, true), "x").p95_m;
  };
  CHECK(p95_of(with_det) < p95_of(without_det));
}
