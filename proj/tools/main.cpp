#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nrtrack/errors.hpp"
#include "nrtrack/harness.hpp"

namespace {

void print_run_result(const nrtrack::VehicleRunOutput& out) {
  for (const auto& p : out.csv_paths) std::printf("wrote %s\n", p.c_str());
  std::printf("wrote %s\n", out.manifest_path.c_str());
  std::printf("wrote %s\n", out.summary_path.c_str());
  std::printf("%s", out.summary_text.c_str());
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output-tracking control runner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::string report_dir;
  std::vector<double> alphas;
  std::vector<double> horizons;

  auto* run = app.add_subcommand("run", "Run a vehicle tracking scenario");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("-o,--output-dir", out_dir, "output directory override");

  auto* sweep =
      app.add_subcommand("sweep", "Gain/horizon stability sweep of a scenario");
  sweep->add_option("scenario", scenario_path, "scenario file")->required();
  sweep->add_option("--alpha", alphas, "gain grid values")
      ->required()
      ->expected(-1);
  sweep->add_option("--horizon", horizons, "horizon grid values, seconds")
      ->required()
      ->expected(-1);
  sweep->add_option("-o,--output-dir", out_dir, "output directory override");

  auto* platoon = app.add_subcommand("platoon", "Run a platoon scenario");
  platoon->add_option("scenario", scenario_path, "scenario file")->required();
  platoon->add_option("-o,--output-dir", out_dir, "output directory override");

  auto* report =
      app.add_subcommand("report", "Regenerate summaries from trace CSVs");
  report->add_option("dir", report_dir, "directory with run outputs")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const auto sc = nrtrack::load_scenario(scenario_path);
      print_run_result(nrtrack::run_vehicle_scenario(sc, out_dir));
    } else if (sweep->parsed()) {
      const auto sc = nrtrack::load_scenario(scenario_path);
      const auto out = nrtrack::run_sweep_scenario(sc, alphas, horizons, out_dir);
      std::printf("wrote %s\n", out.csv_path.c_str());
      std::printf("%s", out.table_text.c_str());
    } else if (platoon->parsed()) {
      const auto sc = nrtrack::load_scenario(scenario_path);
      const auto out = nrtrack::run_platoon_scenario(sc, out_dir);
      for (const auto& p : out.robot_csv_paths)
        std::printf("wrote %s\n", p.c_str());
      std::printf("wrote %s\n", out.spacing_csv_path.c_str());
      std::printf("wrote %s\n", out.manifest_path.c_str());
      std::printf("wrote %s\n", out.summary_path.c_str());
      std::printf("%s", out.summary_text.c_str());
    } else if (report->parsed()) {
      for (const auto& p : nrtrack::regenerate_reports(report_dir))
        std::printf("wrote %s\n", p.c_str());
    }
  } catch (const nrtrack::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
