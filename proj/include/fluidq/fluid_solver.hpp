#pragma once

#include <cstddef>
#include <vector>

#include "fluidq/distributions.hpp"
#include "fluidq/grid.hpp"

namespace fluidq {

/// Arrival rate, service law G, patience law F and the initial condition.
/// The initial buffer measure is fixed by its total mass R0 (the buffer
/// dynamics determine its shape); the initial pool is given by its tail
/// x -> Z0(C_x) on x >= 0.
struct Scenario {
  double lambda = 0.0;
  DistributionModel service;
  DistributionModel patience;
  double R0 = 0.0;
  MeasureTail Z0;
};

/// A scenario whose initial condition passed the non-idling checks.
struct ValidatedScenario {
  Scenario scenario;
  double mu = 0.0;  // 1 / mean service time
  double Q0 = 0.0;  // lambda * F_d(R0 / lambda)
  double X0 = 0.0;  // Q0 + Z0(C_0)

  double rho() const { return scenario.lambda / mu; }
};

struct Snapshot {
  double t = 0.0;
  MeasureTail buffer;  // x -> R(t)(C_x), x may be negative
  MeasureTail pool;    // x -> Z(t)(C_x), x >= 0
};

struct SolveDiagnostics {
  int max_iterations = 0;           // worst fixed-point iteration count per step
  double z0_extrapolated_max = 0.0; // largest Z0 value read beyond its grid
};

/// Gridded processes of one run. Fluid and simulated runs share this layout;
/// A_renewal is only filled by the fluid solver.
struct Trajectory {
  double step = 0.0;
  std::vector<double> t, X, Q, Z, R, A, B, S, L1, L2, L;
  std::vector<double> A_renewal;
  std::vector<Snapshot> snapshots;
  SolveDiagnostics diagnostics;

  std::size_t size() const { return t.size(); }
  const Snapshot* snapshot_at(double time) const;
};

struct SolverOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
};

/// Internal-consistency tolerance 10 (1 + lambda + mu) step.
double consistency_tolerance(const ValidatedScenario& s, double step);

/// Computes Q(0), X(0) and rejects initial conditions violating non-idling,
/// a non-monotone or out-of-range Z0 tail, or an invalid law.
ValidatedScenario validate_initial(const Scenario& s);

/// Solves the key renewal-type equation for X on [0, horizon]:
///   X(t) = Z0(C_t) + Q0 G^c(t) + (lambda/mu) int_0^t H((X(t-s)-1)^+) dG_e(s)
///          + int_0^t (X(t-s)-1)^+ dG(s),
/// and fills t, X, Q, Z. Each step runs a fixed-point refinement on the
/// last quadrature cell; failure to converge raises numerical_failure.
Trajectory solve(const ValidatedScenario& s, double horizon, double step,
                 const SolverOptions& options = {});

/// Largest residual of the discretized key equation over the grid.
double key_equation_residual(const ValidatedScenario& s, const Trajectory& traj);

/// R(t) = lambda F_d^{-1}(Q(t) / lambda).
std::vector<double> buffer_content(const ValidatedScenario& s, const Trajectory& traj);

struct EnteredService {
  std::vector<double> integral;  // lambda int_0^t H(Q) ds - Q(t) + Q(0)
  std::vector<double> renewal;   // (Z(t) - Z0(C_t)) * U_G
};

EnteredService entered_service(const ValidatedScenario& s, const Trajectory& traj);

/// x -> Z(t)(C_x) = Z0(C_{x+t}) + int_0^t G^c(x+t-s) dA(s). Needs A.
MeasureTail pool_measure(const ValidatedScenario& s, const Trajectory& traj, double t,
                         const std::vector<double>& xgrid);

/// x -> R(t)(C_x) = lambda int_0^{R(t)/lambda} F^c(x+s) ds. Needs R.
MeasureTail buffer_measure(const ValidatedScenario& s, const Trajectory& traj, double t,
                           const std::vector<double>& xgrid);

struct Flows {
  std::vector<double> B, S, L1, L2, L;
};

/// B = lambda t - R, S = Z0((0,t]) + int_0^t G(t-s) dA(s), L1 = R - Q,
/// L2 = B - B(0) - A, L = L1 + L2. Needs R and A.
Flows flows(const ValidatedScenario& s, const Trajectory& traj);

/// Largest |Z(t) - Z(0) - A(t) + S(t)|.
double balance_residual(const Trajectory& traj);

/// Initial condition (R(tau), Z(tau)) as a new scenario. The pool tail is
/// sampled on [0, x_extent] at the trajectory step; x_extent <= 0 selects the
/// larger of the remaining horizon and the original Z0 grid end.
Scenario time_shift(const ValidatedScenario& s, const Trajectory& traj, double tau,
                    double x_extent = 0.0);

/// Measure grid for snapshots: [-R_max/lambda, x_max] at spacing dx.
struct MeasureGridSpec {
  double x_max = 10.0;
  double dx = 0.01;
};

std::vector<double> snapshot_grid(const ValidatedScenario& s, const Trajectory& traj,
                                  const MeasureGridSpec& spec);

/// solve + buffer_content + entered_service + flows + snapshots.
Trajectory solve_full(const ValidatedScenario& s, double horizon, double step,
                      const std::vector<double>& snapshot_times = {},
                      const MeasureGridSpec& grid = {}, const SolverOptions& options = {});

}  // namespace fluidq
