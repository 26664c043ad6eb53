#pragma once

// Scenario orchestration shared by the CLI and the test suites: simulate the
// world and sensor streams, run the three estimators, evaluate. All stages
// work in memory; the file-based entry points wrap them with the documented
// on-disk formats.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "navfuse/config.hpp"
#include "navfuse/eval_metrics.hpp"
#include "navfuse/fiveg_fix.hpp"
#include "navfuse/fusion_ekf.hpp"
#include "navfuse/ins_mech.hpp"
#include "navfuse/scenario.hpp"
#include "navfuse/sensor_sim.hpp"

namespace navfuse {

struct ScenarioArtifacts {
  Trajectory truth;
  std::vector<BsSite> sites;
  VisibilityModel vis;
  std::vector<Meas5G> meas5g;
  ImuStream imu;
  std::vector<OdoSample> odo;
  ConnectivityStats connectivity;
};

// Builds the world and every sensor stream for (config, seed).
ScenarioArtifacts simulate_scenario(const ScenarioConfig& cfg);

// Initial fusion/INS state: truth at the first IMU epoch, perturbed by a
// seeded draw from the configured initial uncertainty, with P0 set to match.
FusionState make_initial_state(const ScenarioConfig& cfg, const Trajectory& truth);

FivegRunResult run_5g_sa(const ScenarioConfig& cfg, const ScenarioArtifacts& art);

std::vector<InsSolutionEpoch> run_ins_sa(const ScenarioConfig& cfg,
                                         const ScenarioArtifacts& art,
                                         const FusionState& init);

FusionRunResult run_fused(const ScenarioConfig& cfg, const ScenarioArtifacts& art,
                          const FusionState& init,
                          std::span<const NavSolutionEpoch> fiveg_solution);

// --- file-based stages (the CLI surface) --------------------------------

void cmd_simulate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// mode: "5g-sa" | "ins-sa" | "fused" | "all". Reads simulate outputs (or
// compatible external files) from data_dir.
void cmd_run(const ScenarioConfig& cfg, const std::string& mode,
             const std::filesystem::path& data_dir,
             const std::filesystem::path& out_dir);

struct EvalInput {
  std::filesystem::path solution_csv;
  std::string label;
};

void cmd_eval(const std::filesystem::path& truth_csv,
              const std::vector<EvalInput>& solutions,
              const std::optional<std::filesystem::path>& connectivity_json,
              int zone, bool north, std::size_t cdf_points,
              const std::filesystem::path& out_dir);

}  // namespace navfuse
