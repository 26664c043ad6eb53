#pragma once

// Experiment world: base-station deployment along the driven trajectory and
// the LOS/NLOS/blocked visibility model that stands in for a ray tracer.
//
// "NLOS" links still emit (biased) measurements for the detector to reject;
// "blocked" links emit nothing. Links beyond max_range are blocked in both
// visibility modes.

#include <Eigen/Dense>
#include <vector>

#include "navfuse/geodesy.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

struct BsSite {
  int id = 0;
  UtmPosition pos;            // x_BS, y_BS, z_BS
  double boresight_rad = 0;   // array reference bearing, clockwise from north
};

enum class LinkState { kLos, kNlos, kBlocked };

struct VisibilityWindow {
  int bs_id = -1;  // -1 applies to every BS
  double t_start = 0;
  double t_end = 0;
  LinkState state = LinkState::kLos;
};

struct BuildingFootprint {
  std::vector<Eigen::Vector2d> polygon;  // simple (non-self-intersecting) ring, UTM m
  double height_m = 0;                   // extrusion above z = 0
};

struct VisibilityModel {
  enum class Mode { kScheduled, kGeometric };
  Mode mode = Mode::kScheduled;
  std::vector<VisibilityWindow> windows;      // scheduled mode
  std::vector<BuildingFootprint> footprints;  // geometric mode
  double max_range_m = 300;
  int n_block = 3;  // geometric: >= this many intersected footprints -> blocked
};

struct OutageSegment {
  double t_start = 0;
  double t_end = 0;
  double duration() const { return t_end - t_start; }
};

struct ConnectivityStats {
  std::vector<double> fraction_by_los_count;  // index k = epochs with exactly k LOS BSs
  std::vector<OutageSegment> outages;         // contiguous zero-LOS runs
  std::size_t epoch_count = 0;
};

// BS sites every `spacing` meters of arc length along the trajectory
// polyline, pushed `lateral_offset` to the right of travel, `height` above
// the local ground track. Count is floor(path_length / spacing) + 1.
std::vector<BsSite> deploy_bs(const Trajectory& traj, int zone, bool north,
                              double spacing_m, double lateral_offset_m,
                              double height_m);

// Link state of one BS/UE pair at time t. Total function.
LinkState visibility(const VisibilityModel& model, const BsSite& bs,
                     const UtmPosition& ue, double t);

// True if the 3D segment a->b passes through the extruded footprint.
bool segment_hits_footprint(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const BuildingFootprint& fp);

ConnectivityStats connectivity_stats(const VisibilityModel& model,
                                     const std::vector<BsSite>& sites,
                                     const Trajectory& traj, int zone, bool north);

}  // namespace navfuse
