#include "navfuse/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace navfuse::io {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    if (!std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": bad numeric field '" + s + "'");
  }
}

void expect_header(const std::string& got, const std::string& want,
                   const std::filesystem::path& path) {
  std::string g = got;
  if (!g.empty() && g.back() == '\r') g.pop_back();
  if (g != want)
    throw std::runtime_error(path.string() + ": unexpected header '" + g +
                             "', expected '" + want + "'");
}

constexpr const char* kTrajHeader =
    "t,lat_deg,lon_deg,h_m,ve_ms,vn_ms,vu_ms,pitch_deg,roll_deg,azimuth_deg";
constexpr const char* kSitesHeader = "id,easting_m,northing_m,height_m,boresight_deg,zone";
constexpr const char* kScheduleHeader = "bs_id,t_start_s,t_end_s,state";
constexpr const char* kImuHeader = "t,fx,fy,fz,wx,wy,wz";
constexpr const char* kOdoHeader = "t,wheel_rate_rps";
constexpr const char* kNavHeader =
    "t,lat_deg,lon_deg,h_m,cov_xx,cov_yy,cov_zz,n_los_bs,source";
constexpr const char* kFusedHeader =
    "t,lat_deg,lon_deg,h_m,ve,vn,vu,pitch_deg,roll_deg,azimuth_deg,"
    "bgx,bgy,bgz,bax,bay,baz,p_trace";

}  // namespace

std::string format_angle_deg(double rad) {
  double deg = rad * kRadToDeg<>;
  // Prefer a degree value that maps back onto the exact radian value.
  if (deg * kDegToRad<> != rad) {
    for (int dir = 0; dir < 2; ++dir) {
      double cand = deg;
      for (int k = 0; k < 4; ++k) {
        cand = std::nextafter(cand, dir == 0 ? HUGE_VAL : -HUGE_VAL);
        if (cand * kDegToRad<> == rad) return g17(cand);
      }
    }
  }
  return g17(deg);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream f = open_out(path);
  f << kTrajHeader << "\n";
  for (const TrajectoryEpoch& e : traj.epochs) {
    f << g17(e.t) << ',' << format_angle_deg(e.pos.lat) << ','
      << format_angle_deg(e.pos.lon) << ',' << g17(e.pos.h) << ','
      << g17(e.v_l(0)) << ',' << g17(e.v_l(1)) << ',' << g17(e.v_l(2)) << ','
      << format_angle_deg(e.att.pitch) << ',' << format_angle_deg(e.att.roll)
      << ',' << format_angle_deg(e.att.azimuth) << "\n";
  }
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kTrajHeader, path);

  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 10)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 10 columns, got " +
                               std::to_string(cols.size()));
    TrajectoryEpoch e;
    e.t = parse_double(cols[0], path, line_no);
    e.pos.lat = parse_double(cols[1], path, line_no) * kDegToRad<>;
    e.pos.lon = parse_double(cols[2], path, line_no) * kDegToRad<>;
    e.pos.h = parse_double(cols[3], path, line_no);
    e.v_l = {parse_double(cols[4], path, line_no),
             parse_double(cols[5], path, line_no),
             parse_double(cols[6], path, line_no)};
    e.att.pitch = parse_double(cols[7], path, line_no) * kDegToRad<>;
    e.att.roll = parse_double(cols[8], path, line_no) * kDegToRad<>;
    e.att.azimuth = parse_double(cols[9], path, line_no) * kDegToRad<>;
    traj.epochs.push_back(e);
  }
  try {
    validate_trajectory(traj);
  } catch (const std::exception& ex) {
    throw std::runtime_error(path.string() + ": " + ex.what());
  }
  return traj;
}

void write_sites_csv(const std::filesystem::path& path, const std::vector<BsSite>& sites) {
  std::ofstream f = open_out(path);
  f << kSitesHeader << "\n";
  for (const BsSite& s : sites)
    f << s.id << ',' << g17(s.pos.x) << ',' << g17(s.pos.y) << ',' << g17(s.pos.z)
      << ',' << format_angle_deg(s.boresight_rad) << ',' << s.pos.zone
      << (s.pos.north ? 'N' : 'S') << "\n";
}

std::vector<BsSite> load_sites_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kSitesHeader, path);

  std::vector<BsSite> sites;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 6)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 6 columns");
    BsSite s;
    s.id = static_cast<int>(parse_double(cols[0], path, line_no));
    s.pos.x = parse_double(cols[1], path, line_no);
    s.pos.y = parse_double(cols[2], path, line_no);
    s.pos.z = parse_double(cols[3], path, line_no);
    s.boresight_rad = parse_double(cols[4], path, line_no) * kDegToRad<>;
    std::string zone = cols[5];
    if (zone.empty())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": empty zone");
    const char hemi = zone.back();
    s.pos.north = hemi != 'S' && hemi != 's';
    if (hemi == 'N' || hemi == 'S' || hemi == 'n' || hemi == 's') zone.pop_back();
    s.pos.zone = static_cast<int>(parse_double(zone, path, line_no));
    sites.push_back(s);
  }
  return sites;
}

namespace {

std::string state_name(LinkState s) {
  switch (s) {
    case LinkState::kLos: return "LOS";
    case LinkState::kNlos: return "NLOS";
    case LinkState::kBlocked: return "blocked";
  }
  return "LOS";
}

LinkState parse_state(const std::string& s, const std::filesystem::path& path,
                      std::size_t line_no) {
  if (s == "LOS") return LinkState::kLos;
  if (s == "NLOS") return LinkState::kNlos;
  if (s == "blocked") return LinkState::kBlocked;
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                           ": unknown state '" + s + "'");
}

}  // namespace

void write_schedule_csv(const std::filesystem::path& path,
                        const std::vector<VisibilityWindow>& windows) {
  std::ofstream f = open_out(path);
  f << kScheduleHeader << "\n";
  for (const VisibilityWindow& w : windows)
    f << w.bs_id << ',' << g17(w.t_start) << ',' << g17(w.t_end) << ','
      << state_name(w.state) << "\n";
}

std::vector<VisibilityWindow> load_schedule_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kScheduleHeader, path);

  std::vector<VisibilityWindow> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 4 columns");
    VisibilityWindow w;
    w.bs_id = static_cast<int>(parse_double(cols[0], path, line_no));
    w.t_start = parse_double(cols[1], path, line_no);
    w.t_end = parse_double(cols[2], path, line_no);
    std::string st = cols[3];
    if (!st.empty() && st.back() == '\r') st.pop_back();
    w.state = parse_state(st, path, line_no);
    out.push_back(w);
  }
  return out;
}

std::vector<BuildingFootprint> load_footprints_geojson(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  nlohmann::json j;
  f >> j;

  std::vector<BuildingFootprint> out;
  const bool utm_coords = j.value("coordinates_type", std::string("utm")) == "utm";
  if (!utm_coords)
    throw std::runtime_error(path.string() +
                             ": only projected (utm) footprint coordinates are supported");
  for (const auto& feature : j.at("features")) {
    BuildingFootprint fp;
    fp.height_m = feature.at("properties").at("height_m").get<double>();
    const auto& ring = feature.at("geometry").at("coordinates").at(0);
    for (const auto& pt : ring)
      fp.polygon.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
    // GeoJSON rings repeat the first vertex at the end.
    if (fp.polygon.size() > 1 &&
        (fp.polygon.front() - fp.polygon.back()).norm() < 1e-12)
      fp.polygon.pop_back();
    out.push_back(std::move(fp));
  }
  return out;
}

void write_meas5g_jsonl(const std::filesystem::path& path, const std::vector<Meas5G>& meas) {
  std::ofstream f = open_out(path);
  for (const Meas5G& m : meas) {
    nlohmann::ordered_json j;
    j["t"] = m.t;
    j["bs_id"] = m.bs_id;
    j["rtt_s"] = m.rtt_s;
    j["aod_h_rad"] = m.aod_h_rad;
    j["aod_v_rad"] = m.aod_v_rad;
    j["rx_power_dbm"] = m.rx_power_dbm;
    j["truth_los"] = m.truth_los ? "LOS" : "NLOS";
    f << j.dump() << "\n";
  }
}

std::vector<Meas5G> load_meas5g_jsonl(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::vector<Meas5G> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + ex.what());
    }
    Meas5G m;
    m.t = j.at("t").get<double>();
    m.bs_id = j.at("bs_id").get<int>();
    m.rtt_s = j.at("rtt_s").get<double>();
    m.aod_h_rad = j.at("aod_h_rad").get<double>();
    m.aod_v_rad = j.at("aod_v_rad").get<double>();
    m.rx_power_dbm = j.at("rx_power_dbm").get<double>();
    m.truth_los = j.at("truth_los").get<std::string>() == "LOS";
    out.push_back(m);
  }
  return out;
}

void write_imu_csv(const std::filesystem::path& path, const std::vector<ImuSample>& samples) {
  std::ofstream f = open_out(path);
  f << kImuHeader << "\n";
  for (const ImuSample& s : samples)
    f << g17(s.t) << ',' << g17(s.f_b(0)) << ',' << g17(s.f_b(1)) << ','
      << g17(s.f_b(2)) << ',' << g17(s.w_b(0)) << ',' << g17(s.w_b(1)) << ','
      << g17(s.w_b(2)) << "\n";
}

std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kImuHeader, path);

  std::vector<ImuSample> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 7)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 7 columns");
    ImuSample s;
    s.t = parse_double(cols[0], path, line_no);
    s.f_b = {parse_double(cols[1], path, line_no),
             parse_double(cols[2], path, line_no),
             parse_double(cols[3], path, line_no)};
    s.w_b = {parse_double(cols[4], path, line_no),
             parse_double(cols[5], path, line_no),
             parse_double(cols[6], path, line_no)};
    out.push_back(s);
  }
  return out;
}

void write_odo_csv(const std::filesystem::path& path, const std::vector<OdoSample>& samples) {
  std::ofstream f = open_out(path);
  f << kOdoHeader << "\n";
  for (const OdoSample& s : samples)
    f << g17(s.t) << ',' << g17(s.wheel_rate_rps) << "\n";
}

std::vector<OdoSample> load_odo_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kOdoHeader, path);

  std::vector<OdoSample> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 2)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 2 columns");
    OdoSample s;
    s.t = parse_double(cols[0], path, line_no);
    s.wheel_rate_rps = parse_double(cols[1], path, line_no);
    out.push_back(s);
  }
  return out;
}

void write_nav_csv(const std::filesystem::path& path,
                   const std::vector<NavSolutionEpoch>& sol, const std::string& source) {
  std::ofstream f = open_out(path);
  f << kNavHeader << "\n";
  for (const NavSolutionEpoch& e : sol)
    f << g17(e.t) << ',' << format_angle_deg(e.pos.lat) << ','
      << format_angle_deg(e.pos.lon) << ',' << g17(e.pos.h) << ','
      << g17(e.cov_diag(0)) << ',' << g17(e.cov_diag(1)) << ','
      << g17(e.cov_diag(2)) << ',' << e.n_los_bs << ',' << source << "\n";
}

std::vector<NavSolutionEpoch> load_nav_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kNavHeader, path);

  std::vector<NavSolutionEpoch> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 9)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 9 columns");
    NavSolutionEpoch e;
    e.t = parse_double(cols[0], path, line_no);
    e.pos.lat = parse_double(cols[1], path, line_no) * kDegToRad<>;
    e.pos.lon = parse_double(cols[2], path, line_no) * kDegToRad<>;
    e.pos.h = parse_double(cols[3], path, line_no);
    e.cov_diag = {parse_double(cols[4], path, line_no),
                  parse_double(cols[5], path, line_no),
                  parse_double(cols[6], path, line_no)};
    e.n_los_bs = static_cast<int>(parse_double(cols[7], path, line_no));
    out.push_back(e);
  }
  return out;
}

void write_fused_csv(const std::filesystem::path& path, const std::vector<FusedEpoch>& sol) {
  std::ofstream f = open_out(path);
  f << kFusedHeader << "\n";
  for (const FusedEpoch& e : sol)
    f << g17(e.t) << ',' << format_angle_deg(e.pos.lat) << ','
      << format_angle_deg(e.pos.lon) << ',' << g17(e.pos.h) << ','
      << g17(e.v_l(0)) << ',' << g17(e.v_l(1)) << ',' << g17(e.v_l(2)) << ','
      << format_angle_deg(e.att.pitch) << ',' << format_angle_deg(e.att.roll)
      << ',' << format_angle_deg(e.att.azimuth) << ',' << g17(e.bias.gyro(0))
      << ',' << g17(e.bias.gyro(1)) << ',' << g17(e.bias.gyro(2)) << ','
      << g17(e.bias.accel(0)) << ',' << g17(e.bias.accel(1)) << ','
      << g17(e.bias.accel(2)) << ',' << g17(e.p_trace) << "\n";
}

std::vector<FusedEpoch> load_fused_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  expect_header(line, kFusedHeader, path);

  std::vector<FusedEpoch> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 17)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 17 columns");
    FusedEpoch e;
    e.t = parse_double(cols[0], path, line_no);
    e.pos.lat = parse_double(cols[1], path, line_no) * kDegToRad<>;
    e.pos.lon = parse_double(cols[2], path, line_no) * kDegToRad<>;
    e.pos.h = parse_double(cols[3], path, line_no);
    e.v_l = {parse_double(cols[4], path, line_no),
             parse_double(cols[5], path, line_no),
             parse_double(cols[6], path, line_no)};
    e.att.pitch = parse_double(cols[7], path, line_no) * kDegToRad<>;
    e.att.roll = parse_double(cols[8], path, line_no) * kDegToRad<>;
    e.att.azimuth = parse_double(cols[9], path, line_no) * kDegToRad<>;
    e.bias.gyro = {parse_double(cols[10], path, line_no),
                   parse_double(cols[11], path, line_no),
                   parse_double(cols[12], path, line_no)};
    e.bias.accel = {parse_double(cols[13], path, line_no),
                    parse_double(cols[14], path, line_no),
                    parse_double(cols[15], path, line_no)};
    e.p_trace = parse_double(cols[16], path, line_no);
    out.push_back(e);
  }
  return out;
}

void write_decisions_jsonl(const std::filesystem::path& path,
                           const std::vector<DetectorDecision>& decisions) {
  std::ofstream f = open_out(path);
  for (const DetectorDecision& d : decisions) {
    nlohmann::ordered_json j;
    j["t"] = d.t;
    j["bs_id"] = d.bs_id;
    j["r_time_m"] = d.r_time;
    j["r_power_m"] = d.r_power;
    j["decision"] = d.decision == LosDecision::kLos ? "LOS" : "NLOS";
    j["truth_los"] = d.truth_los ? "LOS" : "NLOS";
    f << j.dump() << "\n";
  }
}

void write_events_jsonl(const std::filesystem::path& path,
                        const std::vector<UpdateEvent>& events) {
  std::ofstream f = open_out(path);
  for (const UpdateEvent& e : events) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["block"] = e.block;
    j["innovation"] = {e.innovation(0), e.innovation(1), e.innovation(2)};
    j["mahalanobis"] = e.mahalanobis;
    j["accepted"] = e.accepted;
    j["rescued"] = e.rescued;
    f << j.dump() << "\n";
  }
}

void write_report_json(const std::filesystem::path& path, const ErrorReport& report) {
  nlohmann::ordered_json j;
  j["label"] = report.label;
  j["rms_m"] = report.rms_m;
  j["max_m"] = report.max_m;
  j["p95_m"] = report.p95_m;
  j["frac_below_2m"] = report.frac_below_2m;
  j["frac_below_1m"] = report.frac_below_1m;
  j["frac_below_30cm"] = report.frac_below_30cm;
  j["epochs"] = report.epochs;
  std::ofstream f = open_out(path);
  f << j.dump(2) << "\n";
}

void write_cdf_csv(const std::filesystem::path& path, const std::vector<CdfPoint>& cdf) {
  std::ofstream f = open_out(path);
  f << "error_m,probability\n";
  for (const CdfPoint& p : cdf) f << g17(p.error_m) << ',' << g17(p.probability) << "\n";
}

void write_connectivity_json(const std::filesystem::path& path,
                             const ConnectivityStats& stats) {
  nlohmann::ordered_json j;
  j["epoch_count"] = stats.epoch_count;
  j["fraction_by_los_count"] = stats.fraction_by_los_count;
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const OutageSegment& o : stats.outages)
    outs.push_back({{"t_start", o.t_start}, {"t_end", o.t_end}});
  j["outages"] = outs;
  std::ofstream f = open_out(path);
  f << j.dump(2) << "\n";
}

ConnectivityStats load_connectivity_json(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  nlohmann::json j;
  f >> j;
  ConnectivityStats stats;
  stats.epoch_count = j.at("epoch_count").get<std::size_t>();
  stats.fraction_by_los_count = j.at("fraction_by_los_count").get<std::vector<double>>();
  for (const auto& o : j.at("outages")) {
    OutageSegment seg;
    seg.t_start = o.at("t_start").get<double>();
    seg.t_end = o.at("t_end").get<double>();
    stats.outages.push_back(seg);
  }
  return stats;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f = open_out(path);
  f << text;
}

}  // namespace navfuse::io
