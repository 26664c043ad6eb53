#pragma once

// Error statistics against ground truth: per-epoch 3D errors, Table-style
// summary reports, empirical CDFs and per-outage breakdowns.

#include <string>
#include <vector>

#include "navfuse/geodesy.hpp"
#include "navfuse/scenario.hpp"
#include "navfuse/trajectory.hpp"

namespace navfuse {

struct SolutionEpochPos {
  double t = 0;
  GeodeticPosition pos;
};

struct ErrorSeries {
  std::vector<double> t;
  std::vector<double> error_3d_m;
  std::vector<double> error_horizontal_m;
  std::vector<double> error_vertical_m;
  std::size_t excluded_epochs = 0;  // solution epochs outside the truth span
};

struct ErrorReport {
  std::string label;
  double rms_m = 0;
  double max_m = 0;
  double p95_m = 0;  // nearest-rank
  double frac_below_2m = 0;
  double frac_below_1m = 0;
  double frac_below_30cm = 0;
  std::size_t epochs = 0;
};

// Truth is linearly interpolated to the solution epochs; errors are Euclidean
// distances in local UTM meters.
ErrorSeries compute_errors(const std::vector<SolutionEpochPos>& solution,
                           const Trajectory& truth, int zone, bool north);

// RMS, max, strict-inequality threshold fractions and nearest-rank p95.
// Throws on an empty series.
ErrorReport compute_report(const ErrorSeries& e, const std::string& label);

struct OutageErrorSummary {
  OutageSegment window;
  double max_error_m = 0;
  double exit_error_m = 0;     // error at the last epoch inside the window
  double growth_rate_mps = 0;  // (exit - entry error) / duration
  std::size_t epochs = 0;
};

struct OutageReport {
  std::vector<OutageErrorSummary> outages;
  ErrorReport in_coverage;  // aggregate over epochs outside every outage
};

OutageReport outage_report(const ErrorSeries& e, const ConnectivityStats& stats,
                           const std::string& label);

struct CdfPoint {
  double error_m = 0;
  double probability = 0;
};

// Empirical CDF resampled at n_points evenly spaced quantiles.
std::vector<CdfPoint> emit_cdf(const ErrorSeries& e, std::size_t n_points);

// Plain-text comparison table, one column per report, rows RMS / Max /
// <2 m / <1 m / <30 cm.
std::string render_comparison_table(const std::vector<ErrorReport>& reports);

}  // namespace navfuse
