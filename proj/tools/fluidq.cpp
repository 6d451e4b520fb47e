#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluidq/equilibrium.hpp"
#include "fluidq/errors.hpp"
#include "fluidq/fluid_solver.hpp"
#include "fluidq/io.hpp"
#include "fluidq/stochastic_sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fluidq;

namespace {

struct Options {
  std::string command;
  std::string config;
  std::string out = "out";
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::vector<std::size_t> n;
};

struct UsageError {
  std::string message;
};

std::string time_label(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  body(os);
}

class Runner {
 public:
  Runner(const Options& opt, ScenarioFile file) : opt_(opt), file_(std::move(file)) {
    if (opt.step) file_.step = *opt.step;
    if (opt.horizon) file_.horizon = *opt.horizon;
    if (opt.seed) file_.simulation.seed = *opt.seed;
    if (opt.reps) file_.simulation.replications = *opt.reps;
    if (!opt.n.empty()) file_.simulation.n = opt.n;
    if (!(file_.step > 0.0)) fail(ErrorKind::invalid_config, "step must be positive");
    if (!(file_.horizon > 0.0)) fail(ErrorKind::invalid_config, "horizon must be positive");
    fs::create_directories(opt.out);
  }

  json run() {
    if (opt_.command == "solve") return solve();
    if (opt_.command == "equilibrium") return equilibrium();
    if (opt_.command == "simulate") return simulate_cmd();
    if (opt_.command == "compare") return compare();
    return converge();
  }

  void write_manifest(const json& results) const {
    json m{{"command", opt_.command},
           {"config", opt_.config},
           {"out", opt_.out},
           {"resolved", scenario_to_json(file_)},
           {"outputs", outputs_},
           {"results", results}};
    write_json(fs::path(opt_.out) / "manifest.json", m);
  }

 private:
  fs::path out(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(opt_.out) / name;
  }

  Trajectory fluid(const ValidatedScenario& vs, const std::vector<double>& times) {
    return solve_full(vs, file_.horizon, file_.step, times, file_.measure);
  }

  void write_snapshots(const Trajectory& traj, const std::string& prefix) {
    for (const Snapshot& snap : traj.snapshots)
      write_text(out(prefix + time_label(snap.t) + ".csv"), [&](std::ostream& os) { write_snapshot_csv(os, snap); });
  }

  json solve() {
    const ValidatedScenario vs = validate_initial(file_.scenario);
    const Trajectory traj = fluid(vs, file_.snapshots);
    write_text(out("trajectory.csv"), [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    write_snapshots(traj, "snapshot_t");
    double dual = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) dual = std::max(dual, std::abs(traj.A[i] - traj.A_renewal[i]));
    return json{{"Q0", vs.Q0},
                {"X0", vs.X0},
                {"rho", vs.rho()},
                {"tolerance", consistency_tolerance(vs, file_.step)},
                {"key_equation_residual", key_equation_residual(vs, traj)},
                {"dual_A_gap", dual},
                {"balance_residual", balance_residual(traj)},
                {"max_iterations", traj.diagnostics.max_iterations},
                {"z0_extrapolated_max", traj.diagnostics.z0_extrapolated_max}};
  }

  json equilibrium() {
    const std::vector<double> xs = linspace_step(0.0, file_.measure.x_max, file_.measure.dx);
    const EquilibriumState eq = equilibrium_state(file_.scenario, xs);
    const json doc = equilibrium_to_json(eq);
    write_json(out("equilibrium.json"), doc);
    json summary = doc;
    summary.erase("tails");
    return summary;
  }

  SimConfig sim_config(std::size_t n, const std::vector<double>& times) const {
    SimConfig cfg{file_.scenario};
    cfg.n = n;
    cfg.horizon = file_.horizon;
    cfg.sample_step = file_.simulation.sample_step;
    cfg.seed = file_.simulation.seed;
    cfg.replications = file_.simulation.replications;
    cfg.snapshot_times = times;
    if (!times.empty()) cfg.snapshot_x = linspace_step(0.0, file_.measure.x_max, file_.measure.dx);
    cfg.interarrival = file_.simulation.interarrival;
    return cfg;
  }

  json simulate_cmd() {
    if (file_.simulation.n.empty()) throw UsageError{"simulate needs a server count (--n or simulation.n)"};
    const std::size_t n = file_.simulation.n.front();
    const SimResult result = simulate(sim_config(n, file_.snapshots));
    const Trajectory mean = average(result);
    write_text(out("simulation.csv"), [&](std::ostream& os) { write_simulation_csv(os, result); });
    write_text(out("mean.csv"), [&](std::ostream& os) { write_trajectory_csv(os, mean); });
    write_snapshots(mean, "sim_snapshot_t");
    json reps = json::array();
    for (const SimReplication& r : result.replications) {
      const SimCounters& c = r.counters;
      reps.push_back({{"arrivals", c.arrivals},
                      {"entered_service", c.entered_service},
                      {"departures", c.departures},
                      {"abandonments", c.abandonments},
                      {"events", c.events}});
    }
    return json{{"n", n}, {"replications", reps}};
  }

  json compare() {
    if (file_.simulation.n.empty()) throw UsageError{"compare needs at least one --n"};
    const ValidatedScenario vs = validate_initial(file_.scenario);
    const Trajectory traj = fluid(vs, file_.snapshots);
    json rows = json::array();
    std::ostringstream csv;
    csv << "n,replications,gap_X,gap_Q,gap_Z,gap_R,rep_gap_X_mean,rep_gap_X_std\n";
    for (std::size_t n : file_.simulation.n) {
      const SimResult result = simulate(sim_config(n, file_.snapshots));
      const Discrepancy d = discrepancy(average(result), traj);
      std::vector<double> per;
      for (const SimReplication& r : result.replications) per.push_back(discrepancy(r.paths, traj).X);
      double mean = 0.0;
      for (double g : per) mean += g / static_cast<double>(per.size());
      double var = 0.0;
      for (double g : per) var += (g - mean) * (g - mean);
      const double sd = per.size() > 1 ? std::sqrt(var / static_cast<double>(per.size() - 1)) : 0.0;
      json snaps = json::array();
      for (const SnapshotGap& g : d.snapshots) snaps.push_back({{"t", g.t}, {"pool", g.pool}, {"buffer", g.buffer}});
      rows.push_back({{"n", n},
                      {"replications", per.size()},
                      {"gap_X", d.X},
                      {"gap_Q", d.Q},
                      {"gap_Z", d.Z},
                      {"gap_R", d.R},
                      {"rep_gap_X_mean", mean},
                      {"rep_gap_X_std", sd},
                      {"snapshot_gaps", snaps}});
      csv << n << ',' << per.size() << ',' << format_number(d.X) << ',' << format_number(d.Q) << ','
          << format_number(d.Z) << ',' << format_number(d.R) << ',' << format_number(mean) << ','
          << format_number(sd) << '\n';
    }
    write_text(out("compare.csv"), [&](std::ostream& os) { os << csv.str(); });
    write_json(out("compare.json"), json{{"rows", rows}});
    return json{{"rows", rows}};
  }

  json converge() {
    std::vector<double> times = file_.snapshots;
    if (times.empty()) times.push_back(file_.horizon);
    const ValidatedScenario vs = validate_initial(file_.scenario);
    const Trajectory traj = fluid(vs, times);
    const ConvergenceReport report = convergence_report(file_.scenario, traj, times);
    json doc = convergence_to_json(report);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const std::size_t i = grid_index(times[k], traj.step);
      doc["rows"][k]["X"] = traj.X[i];
      doc["rows"][k]["Q"] = traj.Q[i];
      doc["rows"][k]["R"] = traj.R[i];
    }
    write_json(out("convergence.json"), doc);
    return doc;
  }

  const Options& opt_;
  ScenarioFile file_;
  std::vector<std::string> outputs_;
};

int report_error(const Options& opt, const std::string& kind, const std::string& message, int code) {
  const json doc = error_to_json(kind, message);
  std::cerr << doc.dump() << '\n';
  if (!opt.out.empty()) {
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (!ec) write_json(fs::path(opt.out) / "error.json", doc);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid model and simulator for many-server queues with abandonment"};
  Options opt;
  app.require_subcommand(1);
  app.add_option("--config", opt.config, "Scenario JSON file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "Output directory")->capture_default_str();
  app.add_option("--step", opt.step, "Fluid grid step");
  app.add_option("--horizon", opt.horizon, "Time horizon");
  app.add_option("--seed", opt.seed, "Master seed for the simulator");
  app.add_option("--reps", opt.reps, "Simulation replications")->check(CLI::PositiveNumber);
  app.add_option("--n", opt.n, "Server count (repeatable)")->check(CLI::PositiveNumber);

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Solve the fluid model and write trajectory and snapshot CSVs"},
      {"equilibrium", "Write the equilibrium state"},
      {"simulate", "Run the stochastic simulator at one server count"},
      {"compare", "Compare simulations at each --n with the fluid solution"},
      {"converge", "Distances to equilibrium at the snapshot times"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&opt, name = std::string(name)] { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error(opt, "usage", e.what(), 2);
  }
  if (opt.config.empty()) return report_error(opt, "usage", "--config is required", 2);

  try {
    Runner runner(opt, load_scenario(opt.config));
    const json results = runner.run();
    runner.write_manifest(results);
    std::cout << results.dump(2) << '\n';
    return 0;
  } catch (const UsageError& e) {
    return report_error(opt, "usage", e.message, 2);
  } catch (const Error& e) {
    return report_error(opt, std::string(to_string(e.kind())), e.what(), e.kind() == ErrorKind::numerical_failure ? 3 : 2);
  } catch (const std::exception& e) {
    return report_error(opt, "numerical_failure", e.what(), 3);
  }
}
