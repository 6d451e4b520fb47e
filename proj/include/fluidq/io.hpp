#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fluidq/equilibrium.hpp"
#include "fluidq/fluid_solver.hpp"
#include "fluidq/stochastic_sim.hpp"

namespace fluidq {

struct SimulationSection {
  std::vector<std::size_t> n;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  double sample_step = 0.01;
  std::optional<DistributionModel> interarrival;
};

/// Everything a scenario file holds.
struct ScenarioFile {
  explicit ScenarioFile(Scenario s) : scenario(std::move(s)) {}

  Scenario scenario;
  double step = 1e-3;
  double horizon = 10.0;
  std::vector<double> snapshots;
  MeasureGridSpec measure;
  SimulationSection simulation;
};

DistributionModel distribution_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const DistributionModel& d);

/// Malformed documents raise invalid_config; bad parameters raise
/// invalid_distribution.
ScenarioFile scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioFile& f);
ScenarioFile load_scenario(const std::string& path);

/// 17 significant digits.
std::string format_number(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Per-replication rows with a leading rep column.
void write_simulation_csv(std::ostream& os, const SimResult& result);
void write_snapshot_csv(std::ostream& os, const Snapshot& snap);

nlohmann::json equilibrium_to_json(const EquilibriumState& eq);
nlohmann::json convergence_to_json(const ConvergenceReport& report);
nlohmann::json error_to_json(const std::string& kind, const std::string& message);

}  // namespace fluidq
