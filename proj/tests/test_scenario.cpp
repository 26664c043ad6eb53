#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "navfuse/io.hpp"
#include "navfuse/scenario.hpp"
#include "navfuse/trajectory.hpp"

using namespace navfuse;

namespace {

constexpr int kZone = 17;

// Straight east-west trajectory of the given length at constant speed,
// built directly in UTM so arc lengths are exact.
Trajectory straight_track(double length_m, double speed = 10.0) {
  Trajectory traj;
  const double dt = 1.0;
  const long n = static_cast<long>(length_m / speed) + 1;
  for (long k = 0; k < n; ++k) {
    UtmPosition u{500000.0 + k * speed * 1.0, 4833000.0, 100.0, kZone, true};
    TrajectoryEpoch e;
    e.t = k * dt;
    e.pos = utm_to_geodetic(u);
    e.v_l = {speed, 0.0, 0.0};
    e.att.azimuth = std::numbers::pi / 2;
    traj.epochs.push_back(e);
  }
  return traj;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("trajectory validation rejects degenerate input") {
  Trajectory one;
  one.epochs.push_back({});
  CHECK_THROWS_WITH_AS(validate_trajectory(one),
                       "trajectory: at least two epochs required",
                       std::runtime_error);

  Trajectory bad = straight_track(100);
  bad.epochs[3].t = bad.epochs[2].t;  // non-monotonic
  CHECK_THROWS_AS(validate_trajectory(bad), std::runtime_error);

  Trajectory nan_traj = straight_track(100);
  nan_traj.epochs[5].v_l(0) = std::nan("");
  CHECK_THROWS_AS(validate_trajectory(nan_traj), std::runtime_error);
}

TEST_CASE("trajectory CSV parse errors name the offending line") {
  const auto path = temp_file("navfuse_bad_traj.csv");
  {
    std::ofstream f(path);
    f << "t,lat_deg,lon_deg,h_m,ve_ms,vn_ms,vu_ms,pitch_deg,roll_deg,azimuth_deg\n";
    f << "0,43.6,-79.3,100,1,0,0,0,0,0\n";
    f << "1,43.6,abc,100,1,0,0,0,0,0\n";
  }
  try {
    io::load_trajectory_csv(path);
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("generated track round-trips through save/load bit-exactly") {
  TrackParams params;
  params.start = {43.6452 * kDegToRad<>, -79.3806 * kDegToRad<>, 100.0};
  params.azimuth0_rad = 0.3;
  params.rate_hz = 20;
  params.segments = {{20.0, 8.0, 0.0}, {9.0, 8.0, -10.0}, {15.0, 0.0, 0.0}};
  const Trajectory traj = generate_track(params);
  CHECK(traj.duration() == doctest::Approx(44.0));

  const auto f1 = temp_file("navfuse_traj_rt1.csv");
  const auto f2 = temp_file("navfuse_traj_rt2.csv");
  io::write_trajectory_csv(f1, traj);
  const Trajectory t1 = io::load_trajectory_csv(f1);
  io::write_trajectory_csv(f2, t1);
  CHECK(slurp(f1) == slurp(f2));

  const Trajectory t2 = io::load_trajectory_csv(f2);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1.epochs[i].pos.lat == t2.epochs[i].pos.lat);
    CHECK(t1.epochs[i].pos.lon == t2.epochs[i].pos.lon);
    CHECK(t1.epochs[i].att.azimuth == t2.epochs[i].att.azimuth);
    CHECK(t1.epochs[i].v_l == t2.epochs[i].v_l);
  }
}

TEST_CASE("deploy_bs subdivides a straight line uniformly") {
  const Trajectory traj = straight_track(1000.0);
  const auto sites = deploy_bs(traj, kZone, true, 500.0, 0.0, 10.0);
  REQUIRE(sites.size() == 3);
  CHECK(sites[0].pos.x == doctest::Approx(500000.0).epsilon(1e-9));
  CHECK(sites[1].pos.x == doctest::Approx(500500.0).epsilon(1e-9));
  CHECK(sites[2].pos.x == doctest::Approx(501000.0).epsilon(1e-9));
  for (const BsSite& s : sites) {
    CHECK(s.pos.y == doctest::Approx(4833000.0).epsilon(1e-9));
    CHECK(s.pos.z == doctest::Approx(110.0));
  }
}

TEST_CASE("deploy_bs site count follows floor(length/spacing) + 1") {
  const Trajectory traj = straight_track(9000.0);
  const auto sites = deploy_bs(traj, kZone, true, 250.0, 10.0, 10.0);
  CHECK(sites.size() == 37);

  // Arc-length walk oracle: site k sits at arc length k * spacing along the
  // (straight) polyline, pushed laterally to the right of travel (south for
  // eastbound driving).
  for (std::size_t k = 0; k < sites.size(); ++k) {
    CHECK(sites[k].pos.x == doctest::Approx(500000.0 + 250.0 * k).epsilon(1e-9));
    CHECK(sites[k].pos.y == doctest::Approx(4833000.0 - 10.0).epsilon(1e-9));
  }
}

TEST_CASE("deploy_bs boundary and error cases") {
  const Trajectory traj = straight_track(400.0);
  const auto sites = deploy_bs(traj, kZone, true, 1000.0, 0.0, 10.0);
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].pos.x == doctest::Approx(500000.0).epsilon(1e-9));
  CHECK_THROWS_AS(deploy_bs(traj, kZone, true, 0.0, 0.0, 10.0), std::domain_error);
  CHECK_THROWS_AS(deploy_bs(traj, kZone, true, -5.0, 0.0, 10.0), std::domain_error);
}

TEST_CASE("deploy_bs is spacing-monotone") {
  TrackParams params;
  params.start = {43.64 * kDegToRad<>, -79.38 * kDegToRad<>, 100.0};
  params.rate_hz = 10;
  params.segments = {{60.0, 12.0, 0.0}, {9.0, 12.0, 10.0}, {60.0, 12.0, 0.0}};
  const Trajectory traj = generate_track(params);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double spacing = 100.0; spacing <= 1000.0; spacing += 50.0) {
    const auto sites = deploy_bs(traj, kZone, true, spacing, 10.0, 10.0);
    CHECK(sites.size() <= prev);
    prev = sites.size();
  }
}

TEST_CASE("scheduled visibility returns the active window state") {
  VisibilityModel model;
  model.mode = VisibilityModel::Mode::kScheduled;
  model.max_range_m = 1e6;
  model.windows = {{3, 100.0, 130.0, LinkState::kBlocked}};

  BsSite bs;
  bs.id = 3;
  bs.pos = {500100.0, 4833000.0, 110.0, kZone, true};
  const UtmPosition ue{500000.0, 4833000.0, 100.0, kZone, true};

  CHECK(visibility(model, bs, ue, 115.0) == LinkState::kBlocked);
  CHECK(visibility(model, bs, ue, 99.0) == LinkState::kLos);
  CHECK(visibility(model, bs, ue, 130.0) == LinkState::kLos);

  bs.id = 4;  // other BS unaffected
  CHECK(visibility(model, bs, ue, 115.0) == LinkState::kLos);
}

TEST_CASE("wildcard windows apply to every BS and max_range blocks") {
  VisibilityModel model;
  model.mode = VisibilityModel::Mode::kScheduled;
  model.max_range_m = 300.0;
  model.windows = {{-1, 10.0, 20.0, LinkState::kBlocked}};

  BsSite bs;
  bs.id = 7;
  bs.pos = {500100.0, 4833000.0, 110.0, kZone, true};
  UtmPosition ue{500000.0, 4833000.0, 100.0, kZone, true};
  CHECK(visibility(model, bs, ue, 15.0) == LinkState::kBlocked);
  CHECK(visibility(model, bs, ue, 25.0) == LinkState::kLos);

  ue.x = 500000.0 - 250.0;  // 350 m away: beyond range in any window
  CHECK(visibility(model, bs, ue, 25.0) == LinkState::kBlocked);
}

TEST_CASE("geometric visibility against a single building") {
  BuildingFootprint fp;
  fp.polygon = {{10, -5}, {20, -5}, {20, 5}, {10, 5}};
  fp.height_m = 30.0;

  VisibilityModel model;
  model.mode = VisibilityModel::Mode::kGeometric;
  model.max_range_m = 1e6;
  model.footprints = {fp};

  BsSite bs;
  bs.pos = {0.0, 0.0, 20.0, kZone, true};

  // Same side of the building: clear.
  CHECK(visibility(model, bs, {5.0, 0.0, 1.0, kZone, true}, 0) == LinkState::kLos);
  // Through the building, below the roof: NLOS.
  CHECK(visibility(model, bs, {30.0, 0.0, 1.0, kZone, true}, 0) == LinkState::kNlos);
  // High link over the roof: clear.
  bs.pos.z = 80.0;
  CHECK(visibility(model, bs, {30.0, 0.0, 79.0, kZone, true}, 0) == LinkState::kLos);
}

TEST_CASE("geometric visibility is symmetric in the endpoints") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  BuildingFootprint fp;
  fp.polygon = {{-10, -10}, {10, -10}, {10, 10}, {-10, 10}};
  fp.height_m = 25.0;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d a(u(rng), u(rng), 1.0 + std::abs(u(rng)));
    const Eigen::Vector3d b(u(rng), u(rng), 1.0 + std::abs(u(rng)));
    CHECK(segment_hits_footprint(a, b, fp) == segment_hits_footprint(b, a, fp));
  }
}

TEST_CASE("segment/footprint intersection agrees with a brute-force sampler") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  auto brute_force = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        const BuildingFootprint& fp) {
    const int n = 20001;
    for (int i = 0; i <= n; ++i) {
      const double s = static_cast<double>(i) / n;
      const Eigen::Vector3d p = a + s * (b - a);
      if (p.z() >= fp.height_m) continue;
      bool inside = false;
      const auto& poly = fp.polygon;
      for (std::size_t j = 0, k = poly.size() - 1; j < poly.size(); k = j++) {
        if ((poly[j].y() > p.y()) != (poly[k].y() > p.y())) {
          const double xc = poly[k].x() + (p.y() - poly[k].y()) /
                                              (poly[j].y() - poly[k].y()) *
                                              (poly[j].x() - poly[k].x());
          if (p.x() < xc) inside = !inside;
        }
      }
      if (inside) return true;
    }
    return false;
  };

  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BuildingFootprint fp;
    const double cx = 40.0 * u(rng) - 20.0, cy = 40.0 * u(rng) - 20.0;
    const double w = 4.0 + 10.0 * u(rng), h = 4.0 + 10.0 * u(rng);
    fp.polygon = {{cx - w, cy - h}, {cx + w, cy - h}, {cx + w, cy + h}, {cx - w, cy + h}};
    fp.height_m = 5.0 + 30.0 * u(rng);

    const Eigen::Vector3d a(80.0 * u(rng) - 40.0, 80.0 * u(rng) - 40.0, 2.0 + 20.0 * u(rng));
    const Eigen::Vector3d b(80.0 * u(rng) - 40.0, 80.0 * u(rng) - 40.0, 2.0 + 20.0 * u(rng));
    const bool expect = brute_force(a, b, fp);
    if (expect) ++hits;
    CHECK(segment_hits_footprint(a, b, fp) == expect);
  }
  // The random configuration mix must exercise both outcomes.
  CHECK(hits > 10);
  CHECK(hits < 90);
}

TEST_CASE("connectivity stats: hand-built 10-epoch schedule") {
  // Every BS sits next to the (slow) track, well within range.
  const Trajectory traj = straight_track(9.0, 1.0);  // 10 epochs at 1 Hz
  REQUIRE(traj.size() == 10);

  std::vector<BsSite> sites(3);
  for (int i = 0; i < 3; ++i) {
    sites[i].id = i;
    sites[i].pos = {500000.0 + i * 3.0, 4833005.0, 110.0, kZone, true};
  }

  VisibilityModel model;
  model.mode = VisibilityModel::Mode::kScheduled;
  model.max_range_m = 1e5;
  // LOS counts per epoch: 3,3,3,2,2,2,2,1,0,0
  model.windows = {{2, 3.0, 8.0, LinkState::kNlos},
                   {1, 7.0, 10.0, LinkState::kBlocked},
                   {2, 8.0, 10.0, LinkState::kBlocked},
                   {0, 8.0, 10.0, LinkState::kNlos}};

  const ConnectivityStats stats = connectivity_stats(model, sites, traj, kZone, true);
  REQUIRE(stats.fraction_by_los_count.size() == 4);
  CHECK(stats.fraction_by_los_count[3] == doctest::Approx(0.3));
  CHECK(stats.fraction_by_los_count[2] == doctest::Approx(0.4));
  CHECK(stats.fraction_by_los_count[1] == doctest::Approx(0.1));
  CHECK(stats.fraction_by_los_count[0] == doctest::Approx(0.2));

  REQUIRE(stats.outages.size() == 1);
  CHECK(stats.outages[0].t_start == doctest::Approx(8.0));
  CHECK(stats.outages[0].duration() == doctest::Approx(2.0));
}

TEST_CASE("connectivity stats: all-LOS scenario") {
  const Trajectory traj = straight_track(90.0, 10.0);
  std::vector<BsSite> sites(2);
  sites[0] = {0, {500040.0, 4833005.0, 110.0, kZone, true}, 0.0};
  sites[1] = {1, {500050.0, 4833005.0, 110.0, kZone, true}, 0.0};
  VisibilityModel model;
  model.mode = VisibilityModel::Mode::kScheduled;
  model.max_range_m = 1e5;

  const ConnectivityStats stats = connectivity_stats(model, sites, traj, kZone, true);
  CHECK(stats.fraction_by_los_count[2] == doctest::Approx(1.0));
  CHECK(stats.outages.empty());

  double sum = 0;
  for (const double f : stats.fraction_by_los_count) sum += f;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sites and schedule CSV round trip") {
  const Trajectory traj = straight_track(1000.0);
  const auto sites = deploy_bs(traj, kZone, true, 250.0, 10.0, 12.0);
  const auto path = temp_file("navfuse_sites.csv");
  io::write_sites_csv(path, sites);
  const auto back = io::load_sites_csv(path);
  REQUIRE(back.size() == sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    CHECK(back[i].id == sites[i].id);
    CHECK(back[i].pos.x == sites[i].pos.x);
    CHECK(back[i].pos.y == sites[i].pos.y);
    CHECK(back[i].pos.zone == kZone);
    CHECK(back[i].pos.north);
  }

  const std::vector<VisibilityWindow> windows = {
      {-1, 10.0, 20.0, LinkState::kBlocked}, {3, 5.5, 9.25, LinkState::kNlos}};
  const auto spath = temp_file("navfuse_schedule.csv");
  io::write_schedule_csv(spath, windows);
  const auto wback = io::load_schedule_csv(spath);
  REQUIRE(wback.size() == 2);
  CHECK(wback[0].bs_id == -1);
  CHECK(wback[0].state == LinkState::kBlocked);
  CHECK(wback[1].t_end == 9.25);
  CHECK(wback[1].state == LinkState::kNlos);
}

TEST_CASE("footprints load from GeoJSON-style files") {
  const auto path = temp_file("navfuse_footprints.json");
  {
    std::ofstream f(path);
    f << R"({"type":"FeatureCollection","coordinates_type":"utm","features":[
      {"type":"Feature","properties":{"height_m":24.5},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,8],[0,8],[0,0]]]}}]})";
  }
  const auto fps = io::load_footprints_geojson(path);
  REQUIRE(fps.size() == 1);
  CHECK(fps[0].height_m == 24.5);
  CHECK(fps[0].polygon.size() == 4);  // closing vertex dropped
}
