#include "fluidq/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <variant>

#include "fluidq/errors.hpp"

namespace fluidq {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void bad_config(const std::string& msg) { fail(ErrorKind::invalid_config, msg); }

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad_config(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key, const std::string& where) {
  const json& v = member(j, key, where);
  if (!v.is_number()) bad_config(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) bad_config(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) bad_config(where + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::pair<double, double>> pairs(const json& v, const std::string& where) {
  if (!v.is_array()) bad_config(where + " must be an array of [x, value] pairs");
  std::vector<std::pair<double, double>> out;
  for (const json& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      bad_config(where + " must be an array of [x, value] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

json pairs_to_json(const std::vector<std::pair<double, double>>& v) {
  json out = json::array();
  for (const auto& [x, y] : v) out.push_back({x, y});
  return out;
}

ScenarioFile parse(const json& j) {
  if (!j.is_object()) bad_config("scenario must be a JSON object");
  const double lambda = number(j, "lambda", "scenario");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad_config("lambda must be finite and non-negative");

  DistributionModel service = distribution_from_json(member(j, "service", "scenario"));
  const json& pj = member(j, "patience", "scenario");
  DistributionModel patience = distribution_from_json(pj);
  if (!patience.lipschitz_bound()) bad_config("patience: missing field 'lipschitz_bound'");

  double r0 = 0.0;
  MeasureTail z0;
  if (j.contains("initial")) {
    const json& init = j.at("initial");
    r0 = number_or(init, "R0", 0.0, "initial");
    if (init.contains("Z0_tail")) {
      std::vector<double> xs;
      std::vector<double> vs;
      for (const auto& [x, v] : pairs(init.at("Z0_tail"), "initial.Z0_tail")) {
        xs.push_back(x);
        vs.push_back(v);
      }
      if (!xs.empty()) {
        try {
          z0 = MeasureTail(std::move(xs), std::move(vs));
        } catch (const Error& e) {
          fail(ErrorKind::invalid_initial, e.what());
        }
      }
    }
  }

  ScenarioFile f{Scenario{lambda, std::move(service), std::move(patience), r0, std::move(z0)}};
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    f.step = number_or(g, "step", f.step, "grid");
    f.horizon = number_or(g, "horizon", f.horizon, "grid");
  }
  if (j.contains("snapshots")) f.snapshots = numbers(j.at("snapshots"), "snapshots");
  if (j.contains("measure_grid")) {
    const json& m = j.at("measure_grid");
    f.measure.x_max = number_or(m, "x_max", f.measure.x_max, "measure_grid");
    f.measure.dx = number_or(m, "dx", f.measure.dx, "measure_grid");
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    SimulationSection& sim = f.simulation;
    if (s.contains("n")) {
      for (double n : numbers(s.at("n"), "simulation.n")) {
        if (!(n >= 1.0) || n != std::floor(n)) bad_config("simulation.n entries must be positive integers");
        sim.n.push_back(static_cast<std::size_t>(n));
      }
    }
    const double reps = number_or(s, "replications", static_cast<double>(sim.replications), "simulation");
    if (!(reps >= 1.0) || reps != std::floor(reps)) bad_config("simulation.replications must be a positive integer");
    sim.replications = static_cast<std::size_t>(reps);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) bad_config("simulation.seed must be a non-negative integer");
      sim.seed = s.at("seed").get<std::uint64_t>();
    }
    sim.sample_step = number_or(s, "sample_step", sim.sample_step, "simulation");
    if (s.contains("interarrival")) sim.interarrival = distribution_from_json(s.at("interarrival"));
  }
  if (!(f.step > 0.0)) bad_config("grid.step must be positive");
  if (!(f.horizon > 0.0)) bad_config("grid.horizon must be positive");
  return f;
}

}  // namespace

DistributionModel distribution_from_json(const json& j) {
  const std::string where = "distribution";
  const json& fam = member(j, "family", where);
  if (!fam.is_string()) bad_config("distribution family must be a string");
  const std::string family = fam.get<std::string>();
  const json& p = member(j, "params", family);

  std::optional<double> lip;
  if (j.contains("lipschitz_bound")) lip = number(j, "lipschitz_bound", family);

  auto build = [&]() -> DistributionModel {
    if (family == "exponential") return DistributionModel::exponential(number(p, "rate", family));
    if (family == "erlang") {
      const double k = number(p, "k", family);
      if (k != std::floor(k) || k < 1.0 || k > 1e6) bad_config("erlang: k must be a positive integer");
      return DistributionModel::erlang(static_cast<int>(k), number(p, "rate", family));
    }
    if (family == "hyperexponential")
      return DistributionModel::hyperexponential(numbers(member(p, "probs", family), "probs"),
                                                 numbers(member(p, "rates", family), "rates"));
    if (family == "uniform") return DistributionModel::uniform(number(p, "a", family), number(p, "b", family));
    if (family == "lognormal") {
      if (p.contains("mean")) return DistributionModel::lognormal_mean(number(p, "mean", family), number(p, "sigma", family));
      return DistributionModel::lognormal(number(p, "mu", family), number(p, "sigma", family));
    }
    if (family == "weibull")
      return DistributionModel::weibull(number(p, "shape", family), number(p, "scale", family));
    if (family == "piecewise_linear" || family == "piecewise") {
      std::optional<double> index;
      if (p.contains("pareto_index")) index = number(p, "pareto_index", family);
      return DistributionModel::piecewise(pairs(member(p, "points", family), "points"), index);
    }
    bad_config("unknown distribution family '" + family + "'");
  };
  DistributionModel d = build();
  return lip ? d.with_lipschitz_bound(*lip) : d;
}

json distribution_to_json(const DistributionModel& d) {
  json params = std::visit(
      Overloaded{
          [](const Exponential& e) { return json{{"rate", e.rate}}; },
          [](const Erlang& e) { return json{{"k", e.k}, {"rate", e.rate}}; },
          [](const HyperExponential& e) { return json{{"probs", e.probs}, {"rates", e.rates}}; },
          [](const Uniform& e) { return json{{"a", e.a}, {"b", e.b}}; },
          [](const LogNormal& e) { return json{{"mu", e.mu}, {"sigma", e.sigma}}; },
          [](const Weibull& e) { return json{{"shape", e.shape}, {"scale", e.scale}}; },
          [](const PiecewiseLinear& e) {
            json out{{"points", pairs_to_json(e.points)}};
            if (e.pareto_index) out["pareto_index"] = *e.pareto_index;
            return out;
          },
      },
      d.family());
  json out{{"family", d.family_name()}, {"params", params}};
  if (d.lipschitz_bound()) out["lipschitz_bound"] = *d.lipschitz_bound();
  return out;
}

ScenarioFile scenario_from_json(const json& j) {
  try {
    return parse(j);
  } catch (const json::exception& e) {
    bad_config(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const ScenarioFile& f) {
  const Scenario& s = f.scenario;
  json tail = json::array();
  for (std::size_t k = 0; k < s.Z0.x().size(); ++k) tail.push_back({s.Z0.x()[k], s.Z0.values()[k]});
  json out{
      {"lambda", s.lambda},
      {"service", distribution_to_json(s.service)},
      {"patience", distribution_to_json(s.patience)},
      {"initial", {{"R0", s.R0}, {"Z0_tail", tail}}},
      {"grid", {{"step", f.step}, {"horizon", f.horizon}}},
      {"snapshots", f.snapshots},
      {"measure_grid", {{"x_max", f.measure.x_max}, {"dx", f.measure.dx}}},
  };
  json sim{{"n", f.simulation.n},
           {"replications", f.simulation.replications},
           {"seed", f.simulation.seed},
           {"sample_step", f.simulation.sample_step}};
  if (f.simulation.interarrival) sim["interarrival"] = distribution_to_json(*f.simulation.interarrival);
  out["simulation"] = sim;
  return out;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad_config("'" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_row(std::ostream& os, const Trajectory& traj, std::size_t i) {
  const std::vector<double>* cols[] = {&traj.X, &traj.Q, &traj.Z, &traj.R, &traj.A,
                                       &traj.B, &traj.S, &traj.L1, &traj.L2, &traj.L};
  os << format_number(traj.t[i]);
  for (const auto* c : cols) os << ',' << (i < c->size() ? format_number((*c)[i]) : std::string("nan"));
  os << '\n';
}

constexpr const char* kHeader = "t,X,Q,Z,R,A,B,S,L1,L2,L";

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kHeader << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) write_row(os, traj, i);
}

void write_simulation_csv(std::ostream& os, const SimResult& result) {
  os << "rep," << kHeader << '\n';
  for (std::size_t r = 0; r < result.replications.size(); ++r) {
    const Trajectory& traj = result.replications[r].paths;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      os << r << ',';
      write_row(os, traj, i);
    }
  }
}

void write_snapshot_csv(std::ostream& os, const Snapshot& snap) {
  os << "x,R_tail,Z_tail\n";
  const auto& bx = snap.buffer.x();
  const auto& px = snap.pool.x();
  std::vector<double> xs;
  xs.reserve(bx.size() + px.size());
  std::merge(bx.begin(), bx.end(), px.begin(), px.end(), std::back_inserter(xs));
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    os << format_number(x) << ',' << format_number(snap.buffer.empty() ? 0.0 : snap.buffer.at(x)) << ','
       << format_number(snap.pool.empty() ? 0.0 : snap.pool.at(std::max(x, 0.0))) << '\n';
  }
}

json equilibrium_to_json(const EquilibriumState& eq) {
  json tails = json::array();
  const auto& x = eq.R_tail.x();
  for (std::size_t k = 0; k < x.size(); ++k)
    tails.push_back({{"x", x[k]}, {"R_tail", eq.R_tail.values()[k]}, {"Z_tail", eq.Z_tail.values()[k]}});
  return json{
      {"rho", eq.rho},
      {"w", {{"lo", eq.w.lo}, {"hi", eq.w.hi}, {"selected", eq.w.selected}, {"target", eq.w.target}}},
      {"Q_inf", eq.Q_inf},
      {"R_inf", eq.R_inf},
      {"Z_inf", eq.Z_inf},
      {"X_inf", eq.X_inf},
      {"abandonment_fraction", eq.abandonment_fraction},
      {"tails", tails},
  };
}

json convergence_to_json(const ConvergenceReport& report) {
  json rows = json::array();
  for (const ConvergenceRow& r : report.rows)
    rows.push_back({{"t", r.t}, {"d_R", r.d_R}, {"d_Z", r.d_Z}, {"d_X", r.d_X}, {"d_Q", r.d_Q}, {"d_Rmass", r.d_Rmass}});
  json eq = equilibrium_to_json(report.equilibrium);
  eq.erase("tails");
  return json{{"equilibrium", eq}, {"rows", rows}, {"trend_violations", report.trend_violations}};
}

json error_to_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace fluidq
