// navfuse command line: simulate a scenario, run the estimators, evaluate.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "navfuse/config.hpp"
#include "navfuse/io.hpp"
#include "navfuse/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

navfuse::ScenarioConfig load(const std::string& config_path,
                             const std::optional<std::uint64_t>& seed_override) {
  navfuse::ScenarioConfig cfg = navfuse::load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

int classify_and_report(const std::exception& ex) {
  const std::string what = ex.what();
  std::fprintf(stderr, "error: %s\n", what.c_str());
  if (what.find("config") != std::string::npos) return kExitConfig;
  if (what.find("covariance") != std::string::npos ||
      what.find("positive semi-definiteness") != std::string::npos)
    return kExitNumerical;
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"5G mmWave + on-board motion sensor positioning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string data_dir;
  std::string mode = "all";
  std::optional<std::uint64_t> seed_override;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", config_path, "scenario config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "override the config seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate world + sensor streams");
  add_common(sim, true);

  CLI::App* run = app.add_subcommand("run", "run estimators on simulated data");
  add_common(run, true);
  run->add_option("--data", data_dir, "directory with simulate outputs")->required();
  run->add_option("--mode", mode, "5g-sa | ins-sa | fused | all");

  CLI::App* eval = app.add_subcommand("eval", "error statistics against truth");
  std::string truth_csv;
  std::vector<std::string> solution_csvs;
  std::vector<std::string> labels;
  std::string connectivity;
  std::size_t cdf_points = 200;
  int zone = 17;
  bool south = false;
  eval->add_option("--truth", truth_csv, "ground-truth trajectory CSV")->required();
  eval->add_option("--solution", solution_csvs, "solution CSV (repeatable)")->required();
  eval->add_option("--label", labels, "label per solution (repeatable)");
  eval->add_option("--connectivity", connectivity, "connectivity.json for outage reports");
  eval->add_option("--cdf-points", cdf_points, "CDF sample count");
  eval->add_option("--zone", zone, "UTM zone of the scenario");
  eval->add_flag("--south", south, "southern-hemisphere UTM");
  eval->add_option("--out", out_dir, "output directory");

  CLI::App* pipe = app.add_subcommand("pipeline", "simulate + run all + eval");
  add_common(pipe, true);

  CLI::App* config_cmd = app.add_subcommand("config", "configuration helpers");
  CLI::App* print_defaults =
      config_cmd->add_subcommand("print-defaults", "print the full default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) {
      navfuse::cmd_simulate(load(config_path, seed_override), out_dir);
      const auto traj = navfuse::io::load_trajectory_csv(
          std::filesystem::path(out_dir) / "trajectory.csv");
      const auto cfg = load(config_path, seed_override);
      std::printf("simulate: %zu epochs, %.1f s, %.1f m path, outputs in %s\n",
                  traj.size(), traj.duration(),
                  navfuse::path_length_m(traj, cfg.utm_zone, cfg.utm_north),
                  out_dir.c_str());
    } else if (run->parsed()) {
      navfuse::cmd_run(load(config_path, seed_override), mode, data_dir, out_dir);
      std::printf("run: mode %s done, outputs in %s\n", mode.c_str(), out_dir.c_str());
    } else if (eval->parsed()) {
      std::vector<navfuse::EvalInput> inputs;
      for (std::size_t i = 0; i < solution_csvs.size(); ++i) {
        const std::string label =
            i < labels.size() ? labels[i] : "solution" + std::to_string(i);
        inputs.push_back({solution_csvs[i], label});
      }
      std::optional<std::filesystem::path> conn;
      if (!connectivity.empty()) conn = connectivity;
      navfuse::cmd_eval(truth_csv, inputs, conn, zone, !south, cdf_points, out_dir);
      std::printf("eval: %zu solutions evaluated, outputs in %s\n", inputs.size(),
                  out_dir.c_str());
    } else if (pipe->parsed()) {
      const navfuse::ScenarioConfig cfg = load(config_path, seed_override);
      const std::filesystem::path base(out_dir);
      navfuse::cmd_simulate(cfg, base / "sim");
      navfuse::cmd_run(cfg, "all", base / "sim", base / "run");
      navfuse::cmd_eval(base / "sim" / "trajectory.csv",
                        {{base / "run" / "sol_5g_sa.csv", "5G-SA"},
                         {base / "run" / "sol_ins_sa.csv", "INS-SA"},
                         {base / "run" / "sol_fused.csv", "5G-OBMS"}},
                        base / "sim" / "connectivity.json", cfg.utm_zone,
                        cfg.utm_north, cfg.eval_cdf_points, base / "eval");
      std::printf("pipeline: done, outputs in %s\n", out_dir.c_str());
    } else if (print_defaults->parsed() || config_cmd->parsed()) {
      std::fputs(navfuse::config_to_json(navfuse::default_config()).c_str(), stdout);
    }
  } catch (const std::exception& ex) {
    return classify_and_report(ex);
  }
  return 0;
}
