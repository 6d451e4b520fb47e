#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fluidq/fluid_solver.hpp"

namespace fluidq {

/// n-server G/GI/n+GI queue whose fluid scaling (divide by n, arrivals at
/// rate n * lambda) corresponds to `scenario`.
struct SimConfig {
  explicit SimConfig(Scenario s) : scenario(std::move(s)) {}

  Scenario scenario;
  std::size_t n = 1;
  double horizon = 1.0;
  double sample_step = 0.01;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::vector<double> snapshot_times;
  std::vector<double> snapshot_x;  // test points shared by both tails
  /// Renewal arrivals: draws are divided by (mean * n * lambda). Poisson
  /// arrivals when unset.
  std::optional<DistributionModel> interarrival;
  /// Re-check conservation, non-idling and FCFS after every event.
  bool check_invariants = false;
  std::uint64_t max_events = 1'000'000'000;
  unsigned threads = 0;  // 0: one per hardware thread
};

enum class CustomerStatus { waiting, in_service, abandoned_in_buffer, abandoned_left, departed };

struct CustomerRecord {
  double arrival = 0.0;
  double patience = 0.0;
  double service = 0.0;
  CustomerStatus status = CustomerStatus::waiting;

  double remaining_patience(double t) const { return arrival + patience - t; }
};

struct SimCounters {
  std::uint64_t arrivals = 0;  // includes the initial population
  std::uint64_t entered_service = 0;
  std::uint64_t departures = 0;
  std::uint64_t abandonments = 0;
  std::uint64_t events = 0;
  std::uint64_t waiting = 0;
  std::uint64_t busy = 0;
};

struct SimReplication {
  Trajectory paths;  // fluid-scaled; A_renewal unused
  SimCounters counters;
};

struct SimResult {
  std::vector<SimReplication> replications;
};

/// Stream seed of a replication: splitmix64 finalizer of (seed xor rep).
std::uint64_t replication_seed(std::uint64_t master, std::size_t rep);

SimResult simulate(const SimConfig& cfg);

/// Pointwise mean over replications of every path and snapshot tail.
Trajectory average(const SimResult& result);

struct SnapshotGap {
  double t = 0.0;
  double pool = 0.0;
  double buffer = 0.0;
};

struct Discrepancy {
  double X = 0.0;
  double Q = 0.0;
  double Z = 0.0;
  double R = 0.0;
  std::vector<SnapshotGap> snapshots;
};

/// Sup-norm gaps between a simulated (or any) trajectory and a fluid
/// trajectory. Every simulated sample time must be a fluid grid point and
/// every simulated snapshot must have a fluid counterpart.
Discrepancy discrepancy(const Trajectory& sim, const Trajectory& fluid);

}  // namespace fluidq
