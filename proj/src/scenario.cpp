#include "navfuse/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace navfuse {

std::vector<BsSite> deploy_bs(const Trajectory& traj, int zone, bool north,
                              double spacing_m, double lateral_offset_m,
                              double height_m) {
  if (spacing_m <= 0) throw std::domain_error("deploy_bs: spacing must be positive");
  validate_trajectory(traj);

  // Project the trajectory polyline once.
  std::vector<Eigen::Vector2d> pts;
  std::vector<double> ground_h;
  pts.reserve(traj.size());
  for (const TrajectoryEpoch& e : traj.epochs) {
    const UtmPosition u = geodetic_to_utm(e.pos, zone, north);
    pts.emplace_back(u.x, u.y);
    ground_h.push_back(u.z);
  }

  double total = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();

  const int count = static_cast<int>(std::floor(total / spacing_m + 1e-9)) + 1;

  std::vector<BsSite> sites;
  sites.reserve(count);
  std::size_t seg = 1;
  double seg_start_arc = 0;
  for (int k = 0; k < count; ++k) {
    const double target = std::min(k * spacing_m, total);
    while (seg < pts.size() - 1 &&
           seg_start_arc + (pts[seg] - pts[seg - 1]).norm() < target) {
      seg_start_arc += (pts[seg] - pts[seg - 1]).norm();
      ++seg;
    }
    const Eigen::Vector2d a = pts[seg - 1];
    const Eigen::Vector2d b = pts[seg];
    const double seg_len = (b - a).norm();
    const double u = seg_len > 0 ? std::clamp((target - seg_start_arc) / seg_len, 0.0, 1.0) : 0.0;
    const Eigen::Vector2d road = a + u * (b - a);
    Eigen::Vector2d tangent = seg_len > 0 ? ((b - a) / seg_len).eval()
                                          : Eigen::Vector2d(0.0, 1.0);
    const Eigen::Vector2d right(tangent.y(), -tangent.x());  // right of travel
    const Eigen::Vector2d site_xy = road + lateral_offset_m * right;
    const double gh = ground_h[seg - 1] + u * (ground_h[seg] - ground_h[seg - 1]);

    BsSite s;
    s.id = k;
    s.pos.x = site_xy.x();
    s.pos.y = site_xy.y();
    s.pos.z = gh + height_m;
    s.pos.zone = zone;
    s.pos.north = north;
    const Eigen::Vector2d to_road = road - site_xy;
    s.boresight_rad = to_road.norm() > 0
                          ? wrap_two_pi(std::atan2(to_road.x(), to_road.y()))
                          : wrap_two_pi(std::atan2(tangent.x(), tangent.y()));
    sites.push_back(s);
  }
  return sites;
}

namespace {

bool point_in_polygon(const Eigen::Vector2d& p,
                      const std::vector<Eigen::Vector2d>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const bool straddles = (poly[i].y() > p.y()) != (poly[j].y() > p.y());
    if (straddles) {
      const double x_cross = poly[j].x() + (p.y() - poly[j].y()) /
                                               (poly[i].y() - poly[j].y()) *
                                               (poly[i].x() - poly[j].x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Parameters s in [0,1] where the 2D segment crosses a polygon edge.
void edge_crossings(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const std::vector<Eigen::Vector2d>& poly,
                    std::vector<double>& out) {
  const Eigen::Vector2d d = b - a;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Eigen::Vector2d p = poly[j];
    const Eigen::Vector2d e = poly[i] - poly[j];
    const double denom = d.x() * e.y() - d.y() * e.x();
    if (std::abs(denom) < 1e-15) continue;  // parallel
    const Eigen::Vector2d ap = p - a;
    const double s = (ap.x() * e.y() - ap.y() * e.x()) / denom;
    const double u = (ap.x() * d.y() - ap.y() * d.x()) / denom;
    if (s >= 0.0 && s <= 1.0 && u >= 0.0 && u <= 1.0) out.push_back(s);
  }
}

}  // namespace

bool segment_hits_footprint(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const BuildingFootprint& fp) {
  if (fp.polygon.size() < 3) return false;
  const Eigen::Vector2d a2 = a.head<2>();
  const Eigen::Vector2d b2 = b.head<2>();

  // Inside-intervals of the 2D segment against the footprint, bounded by
  // edge crossings and segment endpoints.
  std::vector<double> cuts{0.0, 1.0};
  edge_crossings(a2, b2, fp.polygon, cuts);
  std::sort(cuts.begin(), cuts.end());

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double s0 = cuts[i], s1 = cuts[i + 1];
    if (s1 - s0 < 1e-12) continue;
    const double sm = 0.5 * (s0 + s1);
    if (!point_in_polygon(a2 + sm * (b2 - a2), fp.polygon)) continue;
    // Height is linear in s over the interval; the extrusion starts at z=0.
    const double z0 = a.z() + s0 * (b.z() - a.z());
    const double z1 = a.z() + s1 * (b.z() - a.z());
    if (std::min(z0, z1) < fp.height_m) return true;
  }
  return false;
}

LinkState visibility(const VisibilityModel& model, const BsSite& bs,
                     const UtmPosition& ue, double t) {
  const Eigen::Vector3d bs_p(bs.pos.x, bs.pos.y, bs.pos.z);
  const Eigen::Vector3d ue_p(ue.x, ue.y, ue.z);
  if ((bs_p - ue_p).norm() > model.max_range_m) return LinkState::kBlocked;

  if (model.mode == VisibilityModel::Mode::kScheduled) {
    for (const VisibilityWindow& w : model.windows) {
      if (w.bs_id != -1 && w.bs_id != bs.id) continue;
      if (t >= w.t_start && t < w.t_end) return w.state;
    }
    return LinkState::kLos;
  }

  int hits = 0;
  for (const BuildingFootprint& fp : model.footprints)
    if (segment_hits_footprint(bs_p, ue_p, fp)) ++hits;
  if (hits >= model.n_block) return LinkState::kBlocked;
  if (hits > 0) return LinkState::kNlos;
  return LinkState::kLos;
}

ConnectivityStats connectivity_stats(const VisibilityModel& model,
                                     const std::vector<BsSite>& sites,
                                     const Trajectory& traj, int zone, bool north) {
  if (sites.empty() || traj.empty())
    throw std::domain_error("connectivity_stats: empty sites or trajectory");

  ConnectivityStats stats;
  stats.epoch_count = traj.size();
  std::vector<std::size_t> histogram(sites.size() + 1, 0);

  std::vector<int> los_count(traj.size(), 0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const UtmPosition ue = geodetic_to_utm(traj.epochs[i].pos, zone, north);
    int n = 0;
    for (const BsSite& bs : sites)
      if (visibility(model, bs, ue, traj.epochs[i].t) == LinkState::kLos) ++n;
    los_count[i] = n;
    ++histogram[static_cast<std::size_t>(n)];
  }

  stats.fraction_by_los_count.resize(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k)
    stats.fraction_by_los_count[k] =
        static_cast<double>(histogram[k]) / static_cast<double>(traj.size());

  // Zero-LOS runs; an outage extends to the start of the first recovered
  // epoch (or one median step past the end of the trajectory).
  double dt = traj.size() > 1 ? traj.duration() / static_cast<double>(traj.size() - 1) : 0.0;
  for (std::size_t i = 0; i < traj.size();) {
    if (los_count[i] != 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < traj.size() && los_count[j + 1] == 0) ++j;
    OutageSegment seg;
    seg.t_start = traj.epochs[i].t;
    seg.t_end = j + 1 < traj.size() ? traj.epochs[j + 1].t : traj.epochs[j].t + dt;
    stats.outages.push_back(seg);
    i = j + 1;
  }
  return stats;
}

}  // namespace navfuse
