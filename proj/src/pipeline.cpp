#include "navfuse/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "navfuse/io.hpp"
#include "navfuse/random.hpp"

namespace navfuse {

namespace {

std::vector<VisibilityWindow> build_schedule(const ScenarioConfig& cfg) {
  // Wildcard full-outage windows come first: visibility() takes the first
  // matching window, so they override any overlapping per-BS NLOS window.
  std::vector<VisibilityWindow> windows;
  for (const OutageSegment& o : cfg.visibility.outage_windows)
    windows.push_back({-1, o.t_start, o.t_end, LinkState::kBlocked});
  return windows;
}

std::vector<VisibilityWindow> build_nlos_windows(const ScenarioConfig& cfg,
                                                 double duration, int n_sites) {
  std::vector<VisibilityWindow> windows;
  if (!cfg.visibility.auto_nlos_enabled || cfg.visibility.auto_nlos_fraction <= 0)
    return windows;
  std::mt19937_64 rng = make_rng(cfg.seed, "nlos-schedule");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double win = cfg.visibility.auto_nlos_window_s;
  const int n_windows = static_cast<int>(
      std::floor(duration * cfg.visibility.auto_nlos_fraction / win));
  if (n_windows <= 0) return windows;
  const double stride = duration / n_windows;

  for (int id = 0; id < n_sites; ++id) {
    for (int k = 0; k < n_windows; ++k) {
      const double slack = std::max(0.0, stride - win);
      const double start = k * stride + unit(rng) * slack;
      windows.push_back({id, start, std::min(start + win, duration),
                         LinkState::kNlos});
    }
  }
  return windows;
}

}  // namespace

ScenarioArtifacts simulate_scenario(const ScenarioConfig& cfg) {
  ScenarioArtifacts art;

  if (cfg.trajectory.source == "file") {
    if (cfg.trajectory.file.empty())
      throw std::runtime_error("config: /trajectory/file required when source is 'file'");
    art.truth = io::load_trajectory_csv(cfg.trajectory.file);
  } else {
    TrackParams params;
    params.start = cfg.trajectory.start;
    params.azimuth0_rad = cfg.trajectory.azimuth0_rad;
    params.rate_hz = cfg.trajectory.rate_hz;
    params.accel_limit_mps2 = cfg.trajectory.accel_limit_mps2;
    params.segments = cfg.trajectory.segments;
    art.truth = generate_track(params);
  }
  validate_trajectory(art.truth);

  art.sites = deploy_bs(art.truth, cfg.utm_zone, cfg.utm_north, cfg.bs.spacing_m,
                        cfg.bs.lateral_offset_m, cfg.bs.height_m);

  art.vis.max_range_m = cfg.visibility.max_range_m;
  art.vis.n_block = cfg.visibility.n_block;
  if (cfg.visibility.mode == "geometric") {
    art.vis.mode = VisibilityModel::Mode::kGeometric;
    if (!cfg.visibility.footprints_file.empty())
      art.vis.footprints = io::load_footprints_geojson(cfg.visibility.footprints_file);
  } else {
    art.vis.mode = VisibilityModel::Mode::kScheduled;
    if (!cfg.visibility.schedule_file.empty()) {
      art.vis.windows = io::load_schedule_csv(cfg.visibility.schedule_file);
    } else {
      art.vis.windows = build_schedule(cfg);
      const auto nlos = build_nlos_windows(cfg, art.truth.duration(),
                                           static_cast<int>(art.sites.size()));
      art.vis.windows.insert(art.vis.windows.end(), nlos.begin(), nlos.end());
    }
  }

  art.meas5g = gen_5g(art.truth, art.sites, art.vis, cfg.fiveg, cfg.utm_zone,
                      cfg.utm_north, cfg.seed);

  ImuSimConfig imu_cfg;
  imu_cfg.rate_hz = cfg.imu_rate_hz;
  imu_cfg.gm = cfg.gm;
  art.imu = gen_imu(art.truth, imu_cfg, cfg.seed);

  art.odo = gen_odo(art.truth, cfg.wheel, cfg.odo, cfg.seed);

  art.connectivity = connectivity_stats(art.vis, art.sites, art.truth,
                                        cfg.utm_zone, cfg.utm_north);
  return art;
}

FusionState make_initial_state(const ScenarioConfig& cfg, const Trajectory& truth) {
  FusionState s;
  s.nav = make_mech_state(truth.epochs.front());

  s.cov.setZero();
  s.cov.block<3, 3>(0, 0) = cfg.p0.pos_m * cfg.p0.pos_m * Eigen::Matrix3d::Identity();
  s.cov.block<3, 3>(3, 3) = cfg.p0.vel_mps * cfg.p0.vel_mps * Eigen::Matrix3d::Identity();
  Eigen::Vector3d att_var(cfg.p0.level_att_rad * cfg.p0.level_att_rad,
                          cfg.p0.level_att_rad * cfg.p0.level_att_rad,
                          cfg.p0.azimuth_rad * cfg.p0.azimuth_rad);
  s.cov.block<3, 3>(6, 6) = att_var.asDiagonal();
  s.cov.block<3, 3>(9, 9) = cfg.gm.sigma_gyro.cwiseAbs2().asDiagonal();
  s.cov.block<3, 3>(12, 12) = cfg.gm.sigma_accel.cwiseAbs2().asDiagonal();

  if (cfg.init_from_truth) {
    // Perturb the truth by a draw consistent with P0 (the biases start at
    // zero; their uncertainty is the stationary bias distribution).
    std::mt19937_64 rng = make_rng(cfg.seed, "init");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec15 delta = Vec15::Zero();
    for (int i = 0; i < 3; ++i) delta(i) = cfg.p0.pos_m * gauss(rng);
    for (int i = 3; i < 6; ++i) delta(i) = cfg.p0.vel_mps * gauss(rng);
    delta(6) = cfg.p0.level_att_rad * gauss(rng);
    delta(7) = cfg.p0.level_att_rad * gauss(rng);
    delta(8) = cfg.p0.azimuth_rad * gauss(rng);
    const FusionState perturbed = inject_error(s, delta);
    s.nav = perturbed.nav;
  }
  return s;
}

FivegRunResult run_5g_sa(const ScenarioConfig& cfg, const ScenarioArtifacts& art) {
  return run_5g_standalone(art.meas5g, art.sites, cfg.fiveg_fix, cfg.utm_zone,
                           cfg.utm_north, cfg.fiveg.rate_hz,
                           art.truth.end_time());
}

std::vector<InsSolutionEpoch> run_ins_sa(const ScenarioConfig& cfg,
                                         const ScenarioArtifacts& art,
                                         const FusionState& init) {
  InsRunOptions opts;
  opts.zupt_enabled = cfg.ins_zupt_enabled;
  opts.stationarity = cfg.stationarity;
  opts.output_interval_s = cfg.ins_output_interval_s;
  MechState ins_init = init.nav;
  return run_ins_standalone(ins_init, art.imu.samples, art.odo, cfg.wheel, opts);
}

FusionRunResult run_fused(const ScenarioConfig& cfg, const ScenarioArtifacts& art,
                          const FusionState& init,
                          std::span<const NavSolutionEpoch> fiveg_solution) {
  return run_fusion(init, art.imu.samples, art.odo, cfg.wheel, fiveg_solution,
                    cfg.fusion);
}

// --- file-based stages ----------------------------------------------------

namespace {

void write_manifest(const std::filesystem::path& out_dir, const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  std::ofstream f(out_dir / "manifest.json");
  f << j.dump(2) << "\n";
}

void check_manifest(const std::filesystem::path& data_dir, const ScenarioConfig& cfg) {
  const auto path = data_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return;
  std::ifstream f(path);
  nlohmann::json j;
  f >> j;
  if (j.value("config_hash", std::uint64_t(0)) != config_hash(cfg))
    std::fprintf(stderr,
                 "warning: config hash differs from the manifest in %s; "
                 "the data may come from another configuration\n",
                 data_dir.string().c_str());
}

std::vector<SolutionEpochPos> to_positions(const std::vector<NavSolutionEpoch>& v) {
  std::vector<SolutionEpochPos> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back({e.t, e.pos});
  return out;
}

}  // namespace

void cmd_simulate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ScenarioArtifacts art = simulate_scenario(cfg);

  io::write_trajectory_csv(out_dir / "trajectory.csv", art.truth);
  io::write_sites_csv(out_dir / "sites.csv", art.sites);
  if (art.vis.mode == VisibilityModel::Mode::kScheduled)
    io::write_schedule_csv(out_dir / "schedule.csv", art.vis.windows);
  io::write_meas5g_jsonl(out_dir / "meas5g.jsonl", art.meas5g);
  io::write_imu_csv(out_dir / "imu.csv", art.imu.samples);
  io::write_odo_csv(out_dir / "odo.csv", art.odo);
  io::write_connectivity_json(out_dir / "connectivity.json", art.connectivity);
  write_manifest(out_dir, cfg);
}

void cmd_run(const ScenarioConfig& cfg, const std::string& mode,
             const std::filesystem::path& data_dir,
             const std::filesystem::path& out_dir) {
  if (mode != "5g-sa" && mode != "ins-sa" && mode != "fused" && mode != "all")
    throw std::runtime_error("run: mode must be one of 5g-sa, ins-sa, fused, all");
  std::filesystem::create_directories(out_dir);
  check_manifest(data_dir, cfg);

  auto require = [&](const char* name) {
    const auto p = data_dir / name;
    if (!std::filesystem::exists(p))
      throw std::runtime_error("run: missing input file " + p.string());
    return p;
  };

  ScenarioArtifacts art;
  art.truth = io::load_trajectory_csv(require("trajectory.csv"));
  art.sites = io::load_sites_csv(require("sites.csv"));

  const bool want_5g = mode == "5g-sa" || mode == "all";
  const bool want_ins = mode == "ins-sa" || mode == "all";
  const bool want_fused = mode == "fused" || mode == "all";

  if (want_5g || want_fused) art.meas5g = io::load_meas5g_jsonl(require("meas5g.jsonl"));
  if (want_ins || want_fused) {
    art.imu.samples = io::load_imu_csv(require("imu.csv"));
    art.odo = io::load_odo_csv(require("odo.csv"));
  }

  if (want_5g) {
    const FivegRunResult r = run_5g_sa(cfg, art);
    io::write_nav_csv(out_dir / "sol_5g_sa.csv", r.solution, "5g-sa");
    io::write_decisions_jsonl(out_dir / "detector_decisions.jsonl", r.decisions);
  }
  if (want_ins) {
    const FusionState init = make_initial_state(cfg, art.truth);
    const auto sol = run_ins_sa(cfg, art, init);
    std::vector<NavSolutionEpoch> nav;
    nav.reserve(sol.size());
    for (const InsSolutionEpoch& e : sol)
      nav.push_back({e.t, e.pos, Eigen::Vector3d::Zero(), 0});
    io::write_nav_csv(out_dir / "sol_ins_sa.csv", nav, "ins-sa");
  }
  if (want_fused) {
    const auto fiveg_path = out_dir / "sol_5g_sa.csv";
    std::vector<NavSolutionEpoch> fiveg_sol;
    if (std::filesystem::exists(fiveg_path)) {
      fiveg_sol = io::load_nav_csv(fiveg_path);
    } else if (std::filesystem::exists(data_dir / "sol_5g_sa.csv")) {
      fiveg_sol = io::load_nav_csv(data_dir / "sol_5g_sa.csv");
    } else {
      throw std::runtime_error(
          "run: fused mode needs the 5G standalone solution (sol_5g_sa.csv); "
          "run with --mode 5g-sa first");
    }
    const FusionState init = make_initial_state(cfg, art.truth);
    const FusionRunResult r = run_fused(cfg, art, init, fiveg_sol);
    io::write_fused_csv(out_dir / "sol_fused.csv", r.solution);
    io::write_events_jsonl(out_dir / "fusion_events.jsonl", r.events);
  }
}

void cmd_eval(const std::filesystem::path& truth_csv,
              const std::vector<EvalInput>& solutions,
              const std::optional<std::filesystem::path>& connectivity_json,
              int zone, bool north, std::size_t cdf_points,
              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Trajectory truth = io::load_trajectory_csv(truth_csv);

  std::optional<ConnectivityStats> conn;
  if (connectivity_json) conn = io::load_connectivity_json(*connectivity_json);

  std::vector<ErrorReport> reports;
  for (const EvalInput& in : solutions) {
    std::vector<SolutionEpochPos> pos;
    // Either nav-solution or fused-solution CSV layout.
    std::ifstream probe(in.solution_csv);
    std::string header;
    std::getline(probe, header);
    probe.close();
    if (header.rfind("t,lat_deg,lon_deg,h_m,cov", 0) == 0) {
      pos = to_positions(io::load_nav_csv(in.solution_csv));
    } else {
      const auto fused = io::load_fused_csv(in.solution_csv);
      pos.reserve(fused.size());
      for (const auto& e : fused) pos.push_back({e.t, e.pos});
    }

    const ErrorSeries errors = compute_errors(pos, truth, zone, north);
    if (errors.error_3d_m.empty())
      throw std::runtime_error("eval: no overlapping epochs for " +
                               in.solution_csv.string());
    const ErrorReport report = compute_report(errors, in.label);
    reports.push_back(report);

    io::write_report_json(out_dir / ("report_" + in.label + ".json"), report);
    io::write_cdf_csv(out_dir / ("cdf_" + in.label + ".csv"),
                      emit_cdf(errors, cdf_points));
    if (conn) {
      const OutageReport orep = outage_report(errors, *conn, in.label);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& o : orep.outages)
        j.push_back({{"t_start", o.window.t_start},
                     {"t_end", o.window.t_end},
                     {"duration_s", o.window.duration()},
                     {"max_error_m", o.max_error_m},
                     {"exit_error_m", o.exit_error_m},
                     {"growth_rate_mps", o.growth_rate_mps},
                     {"epochs", o.epochs}});
      std::ofstream f(out_dir / ("outages_" + in.label + ".json"));
      f << j.dump(2) << "\n";
    }
  }

  io::write_text(out_dir / "comparison.txt", render_comparison_table(reports));
}

}  // namespace navfuse
