#pragma once

#include <string>
#include <vector>

#include "fluidq/fluid_solver.hpp"

namespace fluidq {

/// Solution set {w : F(w) = target} of the virtual-waiting-time equation,
/// target = max((rho - 1) / rho, 0).
struct WaitingTime {
  double lo = 0.0;
  double hi = 0.0;
  double selected = 0.0;  // always lo
  double target = 0.0;
};

struct EquilibriumState {
  WaitingTime w;
  double rho = 0.0;
  double Q_inf = 0.0;
  double R_inf = 0.0;
  double Z_inf = 0.0;
  double X_inf = 0.0;
  double abandonment_fraction = 0.0;  // F(w)
  MeasureTail R_tail;                 // x -> lambda int_0^w F^c(x+s) ds
  MeasureTail Z_tail;                 // x -> min(rho,1) (1 - G_e(x))
};

/// Throws no_equilibrium when the target is not below sup F.
WaitingTime solve_w(const DistributionModel& patience, double rho);

EquilibriumState equilibrium_state(const Scenario& s, const std::vector<double>& xgrid);

/// Closed-form tails of the equilibrium selected by w.
double equilibrium_buffer_tail(const Scenario& s, double w, double x);
double equilibrium_pool_tail(const Scenario& s, double x);

/// min(rho, 1) + lambda int_0^w F^c.
double limit_X(const Scenario& s);

/// A scenario starting in the equilibrium state, with the pool tail sampled
/// on [0, x_extent] at spacing dx.
Scenario equilibrium_scenario(const Scenario& s, double x_extent, double dx);

struct ConvergenceRow {
  double t = 0.0;
  double d_R = 0.0;  // sup_x |R(t)(C_x) - R_inf(C_x)|
  double d_Z = 0.0;  // sup_x |Z(t)(C_x) - Z_inf(C_x)|
  double d_X = 0.0;
  double d_Q = 0.0;
  double d_Rmass = 0.0;
};

struct ConvergenceReport {
  EquilibriumState equilibrium;
  std::vector<ConvergenceRow> rows;
  /// Human-readable notes for metrics that grew between consecutive times.
  std::vector<std::string> trend_violations;
};

/// Distances from trajectory snapshots to the equilibrium, one row per time.
/// Every requested time needs a snapshot in the trajectory. A metric that
/// grows by more than (1 + lambda + mu) step^2 between consecutive times is
/// reported as a trend violation.
ConvergenceReport convergence_report(const Scenario& s, const Trajectory& traj,
                                     const std::vector<double>& times);

}  // namespace fluidq
