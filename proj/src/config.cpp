#include "navfuse/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "navfuse/random.hpp"

namespace navfuse {

using nlohmann::ordered_json;

namespace {

// Default 20-minute urban loop: two laps of a left-turning rectangle with
// two full stops per lap, ~10 km of path at a 9 m/s cruise.
std::vector<TrackSegment> default_segments() {
  const std::vector<TrackSegment> lap = {
      {110.0, 9.0, 0.0}, {9.0, 9.0, -10.0}, {100.0, 9.0, 0.0}, {20.0, 0.0, 0.0},
      {60.0, 9.0, 0.0},  {9.0, 9.0, -10.0}, {95.0, 9.0, 0.0},  {9.0, 9.0, -10.0},
      {80.0, 9.0, 0.0},  {20.0, 0.0, 0.0},  {50.0, 9.0, 0.0},  {9.0, 9.0, -10.0}};
  std::vector<TrackSegment> segs;
  segs.insert(segs.end(), lap.begin(), lap.end());
  segs.insert(segs.end(), lap.begin(), lap.end());
  segs.push_back({58.0, 9.0, 0.0});  // 2 * 571 s + 58 s = 1200 s
  return segs;
}

// Four scripted full outages over turning intervals, 36 s of 1200 s (3%).
std::vector<OutageSegment> default_outages() {
  return {{112.0, 124.0}, {680.0, 690.0}, {868.0, 876.0}, {1131.0, 1137.0}};
}

ordered_json segments_to_json(const std::vector<TrackSegment>& segs) {
  ordered_json arr = ordered_json::array();
  for (const TrackSegment& s : segs)
    arr.push_back({{"duration_s", s.duration_s},
                   {"target_speed_mps", s.target_speed_mps},
                   {"turn_rate_dps", s.turn_rate_dps}});
  return arr;
}

ordered_json outages_to_json(const std::vector<OutageSegment>& outs) {
  ordered_json arr = ordered_json::array();
  for (const OutageSegment& o : outs) arr.push_back({o.t_start, o.t_end});
  return arr;
}

ordered_json to_json(const ScenarioConfig& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;
  j["utm"] = {{"zone", c.utm_zone}, {"north", c.utm_north}};
  j["ue_height_m"] = c.ue_height_m;

  j["trajectory"] = {
      {"source", c.trajectory.source},
      {"file", c.trajectory.file},
      {"rate_hz", c.trajectory.rate_hz},
      {"start",
       {{"lat_deg", c.trajectory.start.lat * kRadToDeg<>},
        {"lon_deg", c.trajectory.start.lon * kRadToDeg<>},
        {"h_m", c.trajectory.start.h},
        {"azimuth_deg", c.trajectory.azimuth0_rad * kRadToDeg<>}}},
      {"accel_limit_mps2", c.trajectory.accel_limit_mps2},
      {"segments", segments_to_json(c.trajectory.segments)}};

  j["bs"] = {{"spacing_m", c.bs.spacing_m},
             {"lateral_offset_m", c.bs.lateral_offset_m},
             {"height_m", c.bs.height_m}};

  j["visibility"] = {{"mode", c.visibility.mode},
                     {"max_range_m", c.visibility.max_range_m},
                     {"n_block", c.visibility.n_block},
                     {"schedule_file", c.visibility.schedule_file},
                     {"footprints_file", c.visibility.footprints_file},
                     {"outage_windows_s", outages_to_json(c.visibility.outage_windows)},
                     {"auto_nlos",
                      {{"enabled", c.visibility.auto_nlos_enabled},
                       {"fraction", c.visibility.auto_nlos_fraction},
                       {"window_s", c.visibility.auto_nlos_window_s}}}};

  j["fiveg"] = {{"rate_hz", c.fiveg.rate_hz},
                {"sigma_rtt_s", c.fiveg.sigma_rtt_s},
                {"sigma_aod_deg", c.fiveg.sigma_aod_rad * kRadToDeg<>},
                {"sigma_power_db", c.fiveg.sigma_power_db},
                {"tx_power_dbm", c.fiveg.tx_power_dbm},
                {"pathloss_exponent", c.fiveg.pathloss_exponent},
                {"pathloss_ref_m", c.fiveg.pathloss_ref_m},
                {"carrier_ghz", c.fiveg.carrier_hz / 1e9},
                {"nlos_bias_min_m", c.fiveg.nlos_bias_min_m},
                {"nlos_bias_max_m", c.fiveg.nlos_bias_max_m},
                {"nlos_extra_atten_db", c.fiveg.nlos_extra_atten_db}};

  j["imu"] = {{"rate_hz", c.imu_rate_hz},
              {"gyro_beta_per_s", c.gm.beta_gyro(0)},
              {"gyro_bias_sigma_rps", c.gm.sigma_gyro(0)},
              {"gyro_noise_density_rps_rthz", c.gm.noise_gyro(0)},
              {"accel_beta_per_s", c.gm.beta_accel(0)},
              {"accel_bias_sigma_mps2", c.gm.sigma_accel(0)},
              {"accel_noise_density_mps2_rthz", c.gm.noise_accel(0)}};

  j["odo"] = {{"rate_hz", c.odo.rate_hz},
              {"wheel_radius_m", c.wheel.radius_m},
              {"scale_error", c.odo.scale_error},
              {"sigma_scale", c.odo.sigma_scale},
              {"sigma_speed_mps", c.odo.sigma_speed_mps}};

  j["fiveg_fix"] = {{"gamma_m", c.fiveg_fix.gamma_m},
                    {"detector_enabled", c.fiveg_fix.detector_enabled},
                    {"q_accel_m2s3", c.fiveg_fix.q_accel},
                    {"sigma_range_m", c.fiveg_fix.sigma_range_m},
                    {"sigma_aod_deg", c.fiveg_fix.sigma_aod_rad * kRadToDeg<>},
                    {"sigma_height_m", c.fiveg_fix.sigma_height_m},
                    {"init_pos_std_m", c.fiveg_fix.init_pos_std_m},
                    {"init_vel_std_ms", c.fiveg_fix.init_vel_std_ms}};

  j["fusion"] = {{"gate_chi2_3dof", c.fusion.gate_chi2_3dof},
                 {"gate_rescue_after", c.fusion.gate_rescue_after},
                 {"sigma_odo_mps", c.fusion.sigma_odo_mps},
                 {"sigma_nh_lateral_mps", c.fusion.sigma_nh_lateral_mps},
                 {"sigma_nh_vertical_mps", c.fusion.sigma_nh_vertical_mps},
                 {"att_process_density_rad_rts", c.fusion.att_process_density},
                 {"max_imu_gap_s", c.fusion.max_imu_gap_s},
                 {"output_interval_s", c.fusion.output_interval_s},
                 {"p0",
                  {{"pos_m", c.p0.pos_m},
                   {"vel_mps", c.p0.vel_mps},
                   {"level_att_deg", c.p0.level_att_rad * kRadToDeg<>},
                   {"azimuth_deg", c.p0.azimuth_rad * kRadToDeg<>}}}};

  j["ins_sa"] = {{"zupt_enabled", c.ins_zupt_enabled},
                 {"output_interval_s", c.ins_output_interval_s},
                 {"stationarity",
                  {{"gyro_std_max_rps", c.stationarity.gyro_std_max},
                   {"accel_dev_max_mps2", c.stationarity.accel_dev_max},
                   {"speed_max_mps", c.stationarity.speed_max},
                   {"min_window_s", c.stationarity.min_window_s}}}};

  j["init"] = {{"from_truth", c.init_from_truth}};
  j["eval"] = {{"cdf_points", c.eval_cdf_points}};
  return j;
}

void reject_unknown_keys(const ordered_json& user, const ordered_json& schema,
                         const std::string& path) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string here = path + "/" + key;
    if (!schema.contains(key))
      throw std::runtime_error("config: unknown key " + here);
    const auto& ref = schema.at(key);
    if (value.is_object() != ref.is_object() || value.is_array() != ref.is_array())
      throw std::runtime_error("config: wrong type at " + here);
    if (value.is_object()) reject_unknown_keys(value, ref, here);
  }
}

double num(const ordered_json& j, const char* key) {
  if (!j.at(key).is_number())
    throw std::runtime_error(std::string("config: expected number at ") + key);
  return j.at(key).get<double>();
}

ScenarioConfig from_json(const ordered_json& defaults, const ordered_json& user) {
  reject_unknown_keys(user, defaults, "");
  if (!user.contains("seed"))
    throw std::runtime_error("config: 'seed' is required and has no default");

  ordered_json j = defaults;
  j.merge_patch(user);

  ScenarioConfig c;
  c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != 1)
    throw std::runtime_error("config: unsupported schema_version");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.utm_zone = j.at("utm").at("zone").get<int>();
  if (c.utm_zone < 1 || c.utm_zone > 60)
    throw std::runtime_error("config: /utm/zone must be in [1, 60]");
  c.utm_north = j.at("utm").at("north").get<bool>();
  c.ue_height_m = num(j, "ue_height_m");

  const auto& tj = j.at("trajectory");
  c.trajectory.source = tj.at("source").get<std::string>();
  if (c.trajectory.source != "synthetic" && c.trajectory.source != "file")
    throw std::runtime_error("config: /trajectory/source must be 'synthetic' or 'file'");
  c.trajectory.file = tj.at("file").get<std::string>();
  c.trajectory.rate_hz = num(tj, "rate_hz");
  c.trajectory.start.lat = num(tj.at("start"), "lat_deg") * kDegToRad<>;
  c.trajectory.start.lon = num(tj.at("start"), "lon_deg") * kDegToRad<>;
  c.trajectory.start.h = num(tj.at("start"), "h_m");
  c.trajectory.azimuth0_rad = num(tj.at("start"), "azimuth_deg") * kDegToRad<>;
  c.trajectory.accel_limit_mps2 = num(tj, "accel_limit_mps2");
  c.trajectory.segments.clear();
  for (const auto& s : tj.at("segments")) {
    if (!s.is_object() || s.size() != 3 || !s.contains("duration_s") ||
        !s.contains("target_speed_mps") || !s.contains("turn_rate_dps"))
      throw std::runtime_error(
          "config: each /trajectory/segments entry needs exactly "
          "duration_s, target_speed_mps, turn_rate_dps");
    c.trajectory.segments.push_back({num(s, "duration_s"), num(s, "target_speed_mps"),
                                     num(s, "turn_rate_dps")});
  }

  const auto& bj = j.at("bs");
  c.bs.spacing_m = num(bj, "spacing_m");
  c.bs.lateral_offset_m = num(bj, "lateral_offset_m");
  c.bs.height_m = num(bj, "height_m");

  const auto& vj = j.at("visibility");
  c.visibility.mode = vj.at("mode").get<std::string>();
  if (c.visibility.mode != "scheduled" && c.visibility.mode != "geometric")
    throw std::runtime_error("config: /visibility/mode must be 'scheduled' or 'geometric'");
  c.visibility.max_range_m = num(vj, "max_range_m");
  c.visibility.n_block = vj.at("n_block").get<int>();
  c.visibility.schedule_file = vj.at("schedule_file").get<std::string>();
  c.visibility.footprints_file = vj.at("footprints_file").get<std::string>();
  c.visibility.outage_windows.clear();
  for (const auto& w : vj.at("outage_windows_s")) {
    if (!w.is_array() || w.size() != 2)
      throw std::runtime_error("config: /visibility/outage_windows_s entries are [start, end]");
    OutageSegment seg{w.at(0).get<double>(), w.at(1).get<double>()};
    if (seg.t_end <= seg.t_start)
      throw std::runtime_error("config: outage window end must exceed start");
    c.visibility.outage_windows.push_back(seg);
  }
  c.visibility.auto_nlos_enabled = vj.at("auto_nlos").at("enabled").get<bool>();
  c.visibility.auto_nlos_fraction = num(vj.at("auto_nlos"), "fraction");
  c.visibility.auto_nlos_window_s = num(vj.at("auto_nlos"), "window_s");

  const auto& fj = j.at("fiveg");
  c.fiveg.rate_hz = num(fj, "rate_hz");
  c.fiveg.sigma_rtt_s = num(fj, "sigma_rtt_s");
  c.fiveg.sigma_aod_rad = num(fj, "sigma_aod_deg") * kDegToRad<>;
  c.fiveg.sigma_power_db = num(fj, "sigma_power_db");
  c.fiveg.tx_power_dbm = num(fj, "tx_power_dbm");
  c.fiveg.pathloss_exponent = num(fj, "pathloss_exponent");
  c.fiveg.pathloss_ref_m = num(fj, "pathloss_ref_m");
  c.fiveg.carrier_hz = num(fj, "carrier_ghz") * 1e9;
  c.fiveg.nlos_bias_min_m = num(fj, "nlos_bias_min_m");
  c.fiveg.nlos_bias_max_m = num(fj, "nlos_bias_max_m");
  c.fiveg.nlos_extra_atten_db = num(fj, "nlos_extra_atten_db");

  const auto& ij = j.at("imu");
  c.imu_rate_hz = num(ij, "rate_hz");
  c.gm.beta_gyro.setConstant(num(ij, "gyro_beta_per_s"));
  c.gm.sigma_gyro.setConstant(num(ij, "gyro_bias_sigma_rps"));
  c.gm.noise_gyro.setConstant(num(ij, "gyro_noise_density_rps_rthz"));
  c.gm.beta_accel.setConstant(num(ij, "accel_beta_per_s"));
  c.gm.sigma_accel.setConstant(num(ij, "accel_bias_sigma_mps2"));
  c.gm.noise_accel.setConstant(num(ij, "accel_noise_density_mps2_rthz"));

  const auto& oj = j.at("odo");
  c.odo.rate_hz = num(oj, "rate_hz");
  c.wheel.radius_m = num(oj, "wheel_radius_m");
  c.odo.scale_error = num(oj, "scale_error");
  c.odo.sigma_scale = num(oj, "sigma_scale");
  c.odo.sigma_speed_mps = num(oj, "sigma_speed_mps");

  const auto& gj = j.at("fiveg_fix");
  c.fiveg_fix.gamma_m = num(gj, "gamma_m");
  c.fiveg_fix.detector_enabled = gj.at("detector_enabled").get<bool>();
  c.fiveg_fix.q_accel = num(gj, "q_accel_m2s3");
  c.fiveg_fix.sigma_range_m = num(gj, "sigma_range_m");
  c.fiveg_fix.sigma_aod_rad = num(gj, "sigma_aod_deg") * kDegToRad<>;
  c.fiveg_fix.sigma_height_m = num(gj, "sigma_height_m");
  c.fiveg_fix.init_pos_std_m = num(gj, "init_pos_std_m");
  c.fiveg_fix.init_vel_std_ms = num(gj, "init_vel_std_ms");
  c.fiveg_fix.ue_height_m = c.ue_height_m;
  c.fiveg_fix.tx_power_dbm = c.fiveg.tx_power_dbm;
  c.fiveg_fix.pathloss_exponent = c.fiveg.pathloss_exponent;
  c.fiveg_fix.pathloss_ref_m = c.fiveg.pathloss_ref_m;
  c.fiveg_fix.carrier_hz = c.fiveg.carrier_hz;

  const auto& uj = j.at("fusion");
  c.fusion.gate_chi2_3dof = num(uj, "gate_chi2_3dof");
  c.fusion.gate_rescue_after = uj.at("gate_rescue_after").get<int>();
  c.fusion.sigma_odo_mps = num(uj, "sigma_odo_mps");
  c.fusion.sigma_nh_lateral_mps = num(uj, "sigma_nh_lateral_mps");
  c.fusion.sigma_nh_vertical_mps = num(uj, "sigma_nh_vertical_mps");
  c.fusion.att_process_density = num(uj, "att_process_density_rad_rts");
  c.fusion.max_imu_gap_s = num(uj, "max_imu_gap_s");
  c.fusion.output_interval_s = num(uj, "output_interval_s");
  c.fusion.gm = c.gm;
  c.p0.pos_m = num(uj.at("p0"), "pos_m");
  c.p0.vel_mps = num(uj.at("p0"), "vel_mps");
  c.p0.level_att_rad = num(uj.at("p0"), "level_att_deg") * kDegToRad<>;
  c.p0.azimuth_rad = num(uj.at("p0"), "azimuth_deg") * kDegToRad<>;

  const auto& sj = j.at("ins_sa");
  c.ins_zupt_enabled = sj.at("zupt_enabled").get<bool>();
  c.ins_output_interval_s = num(sj, "output_interval_s");
  c.stationarity.gyro_std_max = num(sj.at("stationarity"), "gyro_std_max_rps");
  c.stationarity.accel_dev_max = num(sj.at("stationarity"), "accel_dev_max_mps2");
  c.stationarity.speed_max = num(sj.at("stationarity"), "speed_max_mps");
  c.stationarity.min_window_s = num(sj.at("stationarity"), "min_window_s");

  c.init_from_truth = j.at("init").at("from_truth").get<bool>();
  c.eval_cdf_points = j.at("eval").at("cdf_points").get<std::size_t>();
  return c;
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.seed = 1;
  c.trajectory.segments = default_segments();
  c.visibility.outage_windows = default_outages();
  c.visibility.auto_nlos_fraction = 0.08;

  c.gm.beta_gyro.setConstant(1.0 / 300.0);
  c.gm.sigma_gyro.setConstant(1.5e-4);    // ~31 deg/hr
  c.gm.noise_gyro.setConstant(8.7e-5);    // ~0.3 deg/sqrt(hr)
  c.gm.beta_accel.setConstant(1.0 / 300.0);
  c.gm.sigma_accel.setConstant(0.02);     // ~2 mg
  c.gm.noise_accel.setConstant(1.0e-3);

  c.fiveg_fix.sigma_range_m = 0.3;
  c.fiveg_fix.q_accel = 2.0;
  c.fiveg_fix.ue_height_m = c.ue_height_m;
  c.fusion.gm = c.gm;
  return c;
}

ScenarioConfig parse_config(const std::string& json_text) {
  ordered_json user;
  try {
    user = ordered_json::parse(json_text);
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + ex.what());
  }
  return from_json(to_json(default_config()), user);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string config_to_json(const ScenarioConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  return fnv1a64(config_to_json(cfg));
}

}  // namespace navfuse
