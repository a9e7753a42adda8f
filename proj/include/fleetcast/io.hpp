#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fleetcast/calibration.hpp"
#include "fleetcast/fleet.hpp"
#include "fleetcast/ocp.hpp"
#include "fleetcast/scenarios.hpp"
#include "fleetcast/types.hpp"

namespace fleetcast {
namespace io {

// Shortest round-trip decimal form, independent of any locale.
std::string format_double(double value);

// Strict minimal CSV: one header line, comma-separated, no quoting.  Error
// messages cite 1-based file lines (the header is line 1).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

Table read_table(const std::filesystem::path& file);

ExogenousInputs read_exogenous(const std::filesystem::path& file);
FleetState read_initial_fleet(const std::filesystem::path& file, int year,
                              int max_age = kDefaultMaxAge);
SurvivalSchedule read_survival(const std::filesystem::path& file);
EmissionFactorTable read_emission_factors(const std::filesystem::path& file);
ocp::ControlTrajectory read_control(const std::filesystem::path& file);
calibration::HistoricalSeries read_historical(const std::filesystem::path& dir);

struct Dataset {
  ExogenousInputs inputs;
  FleetState initial;
  SurvivalSchedule survival;
  EmissionFactorTable emission_factors;
  calibration::HistoricalSeries history;
};

// Bundled layout: exogenous.csv, initial_fleet.csv, survival.csv,
// emission_factors.csv and a historical/ subdirectory.
Dataset load_dataset(const std::filesystem::path& dir, int initial_year);

void write_text(const std::filesystem::path& file, const std::string& text);
void write_trajectory(const std::filesystem::path& file,
                      const ScenarioResult& result);
void write_control(const std::filesystem::path& file,
                   const ocp::ControlTrajectory& u);
void write_comparison_csv(const std::filesystem::path& file,
                          const scenarios::ComparisonTable& table);
void write_trace(const std::filesystem::path& file,
                 const std::vector<ocp::TraceRow>& trace);

// Flat key = value run configuration; every key has a default so an absent
// file reproduces the bundled case study as-is.
struct RunConfig {
  std::string data_dir = FLEETCAST_DATA_DIR;
  std::string out_dir = "out";
  int t0 = 2022;
  int horizon_end = 2050;
  double u_max_keur = 50.0;
  double ic_level_keur = 5.0;
  std::string target = "from-scenario:ic";
  std::string law = "i0";
  std::string scenario_set = "i0,ic,ip,bi,opt";
  LogitParams logit;
  BassParams bass;
  ocp::SolveOptions solver;
};

RunConfig read_config(const std::filesystem::path& file);

}  // namespace io
}  // namespace fleetcast
