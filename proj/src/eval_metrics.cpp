#include "navfuse/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace navfuse {

ErrorSeries compute_errors(const std::vector<SolutionEpochPos>& solution,
                           const Trajectory& truth, int zone, bool north) {
  validate_trajectory(truth);

  ErrorSeries series;
  for (const SolutionEpochPos& s : solution) {
    if (s.t < truth.start_time() - 1e-9 || s.t > truth.end_time() + 1e-9) {
      ++series.excluded_epochs;
      continue;
    }
    const TrajectoryEpoch ref = interpolate(truth, s.t);
    const UtmPosition u_sol = geodetic_to_utm(s.pos, zone, north);
    const UtmPosition u_ref = geodetic_to_utm(ref.pos, zone, north);
    const double de = u_sol.x - u_ref.x;
    const double dn = u_sol.y - u_ref.y;
    const double du = u_sol.z - u_ref.z;
    series.t.push_back(s.t);
    series.error_horizontal_m.push_back(std::hypot(de, dn));
    series.error_vertical_m.push_back(std::abs(du));
    series.error_3d_m.push_back(std::sqrt(de * de + dn * dn + du * du));
  }
  if (series.t.empty() && !solution.empty())
    throw std::runtime_error("compute_errors: no solution epoch overlaps the truth span");
  return series;
}

namespace {

double nearest_rank_percentile(std::vector<double> sorted, double p) {
  // sorted ascending; nearest-rank: value at ceil(p * n), 1-indexed.
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

}  // namespace

ErrorReport compute_report(const ErrorSeries& e, const std::string& label) {
  if (e.error_3d_m.empty())
    throw std::domain_error("compute_report: empty error series");

  ErrorReport r;
  r.label = label;
  r.epochs = e.error_3d_m.size();

  double sum_sq = 0;
  std::size_t below2 = 0, below1 = 0, below03 = 0;
  for (const double x : e.error_3d_m) {
    sum_sq += x * x;
    r.max_m = std::max(r.max_m, x);
    if (x < 2.0) ++below2;
    if (x < 1.0) ++below1;
    if (x < 0.3) ++below03;
  }
  const double n = static_cast<double>(r.epochs);
  r.rms_m = std::sqrt(sum_sq / n);
  r.frac_below_2m = static_cast<double>(below2) / n;
  r.frac_below_1m = static_cast<double>(below1) / n;
  r.frac_below_30cm = static_cast<double>(below03) / n;

  std::vector<double> sorted = e.error_3d_m;
  std::sort(sorted.begin(), sorted.end());
  r.p95_m = nearest_rank_percentile(std::move(sorted), 0.95);
  return r;
}

OutageReport outage_report(const ErrorSeries& e, const ConnectivityStats& stats,
                           const std::string& label) {
  OutageReport report;

  std::vector<bool> in_outage(e.t.size(), false);
  for (const OutageSegment& seg : stats.outages) {
    OutageErrorSummary s;
    s.window = seg;
    double entry_error = 0;
    bool first = true;
    for (std::size_t i = 0; i < e.t.size(); ++i) {
      if (e.t[i] < seg.t_start - 1e-9 || e.t[i] >= seg.t_end - 1e-9) continue;
      in_outage[i] = true;
      ++s.epochs;
      s.max_error_m = std::max(s.max_error_m, e.error_3d_m[i]);
      s.exit_error_m = e.error_3d_m[i];
      if (first) {
        entry_error = e.error_3d_m[i];
        first = false;
      }
    }
    if (s.epochs > 0 && seg.duration() > 0)
      s.growth_rate_mps = (s.exit_error_m - entry_error) / seg.duration();
    report.outages.push_back(s);
  }

  ErrorSeries coverage;
  for (std::size_t i = 0; i < e.t.size(); ++i) {
    if (in_outage[i]) continue;
    coverage.t.push_back(e.t[i]);
    coverage.error_3d_m.push_back(e.error_3d_m[i]);
    coverage.error_horizontal_m.push_back(e.error_horizontal_m[i]);
    coverage.error_vertical_m.push_back(e.error_vertical_m[i]);
  }
  report.in_coverage = coverage.error_3d_m.empty()
                           ? ErrorReport{}
                           : compute_report(coverage, label + " (in coverage)");
  return report;
}

std::vector<CdfPoint> emit_cdf(const ErrorSeries& e, std::size_t n_points) {
  if (e.error_3d_m.empty())
    throw std::domain_error("emit_cdf: empty error series");
  std::vector<double> sorted = e.error_3d_m;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  n_points = std::max<std::size_t>(2, std::min(n_points, n));
  std::vector<CdfPoint> cdf;
  cdf.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    // Evenly spaced ranks from 1/n_points .. 1 of the sorted sample.
    const double p = static_cast<double>(k + 1) / static_cast<double>(n_points);
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    cdf.push_back({sorted[rank - 1],
                   static_cast<double>(rank) / static_cast<double>(n)});
  }
  return cdf;
}

std::string render_comparison_table(const std::vector<ErrorReport>& reports) {
  auto fmt_m = [](double v) {
    char buf[32];
    if (v >= 1000.0)
      std::snprintf(buf, sizeof(buf), "%.3g m", v);
    else
      std::snprintf(buf, sizeof(buf), "%.1f m", v);
    return std::string(buf);
  };
  auto fmt_pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
    return std::string(buf);
  };

  std::string out = "Statistics";
  for (const ErrorReport& r : reports) out += "\t" + r.label;
  out += "\n";
  out += "RMS";
  for (const ErrorReport& r : reports) out += "\t" + fmt_m(r.rms_m);
  out += "\nMax";
  for (const ErrorReport& r : reports) out += "\t" + fmt_m(r.max_m);
  out += "\n<2 m";
  for (const ErrorReport& r : reports) out += "\t" + fmt_pct(r.frac_below_2m);
  out += "\n<1 m";
  for (const ErrorReport& r : reports) out += "\t" + fmt_pct(r.frac_below_1m);
  out += "\n<30 cm";
  for (const ErrorReport& r : reports) out += "\t" + fmt_pct(r.frac_below_30cm);
  out += "\n";
  return out;
}

}  // namespace navfuse
