#pragma once

// Scenario configuration: one versioned JSON document that pins every
// default the estimators and the simulator rely on. Unknown keys are
// rejected so typos cannot silently fall back to defaults; `seed` has no
// default and must be present.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "navfuse/fiveg_fix.hpp"
#include "navfuse/fusion_ekf.hpp"
#include "navfuse/ins_mech.hpp"
#include "navfuse/sensor_sim.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

struct TrajectoryConfig {
  std::string source = "synthetic";  // "synthetic" | "file"
  std::string file;
  double rate_hz = 100.0;
  GeodeticPosition start{43.6452 * kDegToRad<>, -79.3806 * kDegToRad<>, 100.0};
  double azimuth0_rad = 90.0 * kDegToRad<>;
  double accel_limit_mps2 = 1.5;
  std::vector<TrackSegment> segments;
};

struct BsConfig {
  double spacing_m = 250.0;
  double lateral_offset_m = 10.0;
  double height_m = 10.0;
};

struct VisibilityConfig {
  std::string mode = "scheduled";  // "scheduled" | "geometric"
  double max_range_m = 300.0;
  int n_block = 3;
  std::string schedule_file;    // optional explicit schedule
  std::string footprints_file;  // geometric mode
  std::vector<OutageSegment> outage_windows;  // scripted full outages
  bool auto_nlos_enabled = true;
  double auto_nlos_fraction = 0.12;   // NLOS time fraction per BS
  double auto_nlos_window_s = 15.0;
};

struct InitialUncertainty {
  double pos_m = 1.0;
  double vel_mps = 0.2;
  double level_att_rad = 0.5 * kDegToRad<>;  // pitch/roll error std
  double azimuth_rad = 1.0 * kDegToRad<>;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  int utm_zone = 17;
  bool utm_north = true;
  double ue_height_m = 100.0;

  TrajectoryConfig trajectory;
  BsConfig bs;
  VisibilityConfig visibility;
  FivegSimConfig fiveg;

  double imu_rate_hz = 100.0;
  GaussMarkovParams gm;  // simulator truth model; also the filter default

  OdoSimConfig odo;
  WheelConfig wheel;

  FivegFixConfig fiveg_fix;
  FusionConfig fusion;
  InitialUncertainty p0;

  bool ins_zupt_enabled = false;
  StationarityThresholds stationarity;
  double ins_output_interval_s = 0.1;

  bool init_from_truth = true;
  std::size_t eval_cdf_points = 200;
};

// Fully-populated defaults (seed = 1), the document printed by
// `config print-defaults`.
ScenarioConfig default_config();

// Parses and validates a user document against the schema. Throws
// std::runtime_error with the JSON path of the offending key.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text);

std::string config_to_json(const ScenarioConfig& cfg);

// Stable content hash of the canonical JSON form (manifest checking).
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace navfuse
