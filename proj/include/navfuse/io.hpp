#pragma once

// Readers and writers for every on-disk format:
//
//   trajectory CSV   t,lat_deg,lon_deg,h_m,ve_ms,vn_ms,vu_ms,pitch_deg,roll_deg,azimuth_deg
//   BS sites CSV     id,easting_m,northing_m,height_m,boresight_deg,zone
//   schedule CSV     bs_id,t_start_s,t_end_s,state          (bs_id -1 = all)
//   footprints       GeoJSON-style FeatureCollection with height_m properties
//   5G JSONL         t, bs_id, rtt_s, aod_h_rad, aod_v_rad, rx_power_dbm, truth_los
//   IMU CSV          t,fx,fy,fz,wx,wy,wz
//   odometer CSV     t,wheel_rate_rps
//   nav CSV          t,lat_deg,lon_deg,h_m,cov_xx,cov_yy,cov_zz,n_los_bs,source
//   fused CSV        t,lat_deg,lon_deg,h_m,ve,vn,vu,pitch_deg,roll_deg,azimuth_deg,
//                    bgx,bgy,bgz,bax,bay,baz,p_trace
//   decisions JSONL  t, bs_id, r_time_m, r_power_m, decision, truth_los
//   events JSONL     t, block, innovation, mahalanobis, accepted
//
// Floats are written with full round-trip precision; angle columns are in
// degrees chosen so that parsing and converting back to radians reproduces
// the stored binary value.

#include <filesystem>
#include <string>
#include <vector>

#include "navfuse/eval_metrics.hpp"
#include "navfuse/fiveg_fix.hpp"
#include "navfuse/fusion_ekf.hpp"
#include "navfuse/scenario.hpp"
#include "navfuse/sensors.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

namespace io {

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory_csv(const std::filesystem::path& path);

void write_sites_csv(const std::filesystem::path& path, const std::vector<BsSite>& sites);
std::vector<BsSite> load_sites_csv(const std::filesystem::path& path);

void write_schedule_csv(const std::filesystem::path& path,
                        const std::vector<VisibilityWindow>& windows);
std::vector<VisibilityWindow> load_schedule_csv(const std::filesystem::path& path);

std::vector<BuildingFootprint> load_footprints_geojson(const std::filesystem::path& path);

void write_meas5g_jsonl(const std::filesystem::path& path, const std::vector<Meas5G>& meas);
std::vector<Meas5G> load_meas5g_jsonl(const std::filesystem::path& path);

void write_imu_csv(const std::filesystem::path& path, const std::vector<ImuSample>& samples);
std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path);

void write_odo_csv(const std::filesystem::path& path, const std::vector<OdoSample>& samples);
std::vector<OdoSample> load_odo_csv(const std::filesystem::path& path);

void write_nav_csv(const std::filesystem::path& path,
                   const std::vector<NavSolutionEpoch>& sol, const std::string& source);
std::vector<NavSolutionEpoch> load_nav_csv(const std::filesystem::path& path);

void write_fused_csv(const std::filesystem::path& path, const std::vector<FusedEpoch>& sol);
std::vector<FusedEpoch> load_fused_csv(const std::filesystem::path& path);

void write_decisions_jsonl(const std::filesystem::path& path,
                           const std::vector<DetectorDecision>& decisions);

void write_events_jsonl(const std::filesystem::path& path,
                        const std::vector<UpdateEvent>& events);

void write_report_json(const std::filesystem::path& path, const ErrorReport& report);

void write_cdf_csv(const std::filesystem::path& path, const std::vector<CdfPoint>& cdf);

void write_connectivity_json(const std::filesystem::path& path,
                             const ConnectivityStats& stats);
ConnectivityStats load_connectivity_json(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

// Degrees string whose parse-and-convert round trip reproduces `rad` exactly.
std::string format_angle_deg(double rad);

}  // namespace io

}  // namespace navfuse
