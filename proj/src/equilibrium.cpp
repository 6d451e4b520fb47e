#include "fluidq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidq/errors.hpp"

namespace fluidq {

namespace {

double bisect_width(double hi) { return 1e-13 * std::max(1.0, hi); }

double load(const Scenario& s) {
  require_service_law(s.service);
  if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda))
    fail(ErrorKind::invalid_config, "arrival rate must be finite and non-negative");
  return s.lambda * s.service.mean().value;
}

}  // namespace

WaitingTime solve_w(const DistributionModel& patience, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) fail(ErrorKind::invalid_argument, "solve_w: rho must be finite and >= 0");
  WaitingTime w;
  w.target = rho > 1.0 ? (rho - 1.0) / rho : 0.0;

  // Below critical load only w = 0 is compatible with non-idling: any w > 0
  // would leave fluid queued while servers idle.
  if (rho < 1.0) return w;
  if (!(w.target < 1.0)) {
    std::ostringstream os;
    os << "no finite w solves F(w) = " << w.target << " (rho = " << rho << ")";
    fail(ErrorKind::no_equilibrium, os.str());
  }

  double hi = 1.0;
  for (int i = 0; !(patience.cdf(hi) > w.target); ++i) {
    if (i > 2000) fail(ErrorKind::no_equilibrium, "solve_w: F never exceeds the target");
    hi *= 2.0;
  }

  if (w.target > 0.0) {
    double lo = 0.0;
    double up = hi;
    while (up - lo > bisect_width(up)) {
      const double mid = 0.5 * (lo + up);
      if (patience.cdf(mid) >= w.target) up = mid; else lo = mid;
    }
    w.lo = up;
  }

  double lo = w.lo;
  double up = hi;
  while (up - lo > bisect_width(up)) {
    const double mid = 0.5 * (lo + up);
    if (patience.cdf(mid) > w.target) up = mid; else lo = mid;
  }
  w.hi = lo;
  w.selected = w.lo;
  return w;
}

double equilibrium_buffer_tail(const Scenario& s, double w, double x) {
  if (!(w > 0.0)) return 0.0;
  return s.lambda * (s.patience.integrated_tail(x + w) - s.patience.integrated_tail(x));
}

double equilibrium_pool_tail(const Scenario& s, double x) {
  const double rho = load(s);
  return std::min(rho, 1.0) * (1.0 - equilibrium_cdf(s.service, std::max(x, 0.0)));
}

EquilibriumState equilibrium_state(const Scenario& s, const std::vector<double>& xgrid) {
  EquilibriumState eq;
  eq.rho = load(s);
  eq.w = solve_w(s.patience, eq.rho);
  const double w = eq.w.selected;
  eq.Q_inf = s.lambda * s.patience.integrated_tail(w);
  eq.R_inf = s.lambda * w;
  eq.Z_inf = std::min(eq.rho, 1.0);
  eq.X_inf = eq.Z_inf + eq.Q_inf;
  eq.abandonment_fraction = s.patience.cdf(w);

  std::vector<double> r(xgrid.size());
  std::vector<double> z(xgrid.size());
  for (std::size_t k = 0; k < xgrid.size(); ++k) {
    r[k] = equilibrium_buffer_tail(s, w, xgrid[k]);
    z[k] = equilibrium_pool_tail(s, xgrid[k]);
  }
  eq.R_tail = MeasureTail(xgrid, std::move(r));
  eq.Z_tail = MeasureTail(xgrid, std::move(z));
  return eq;
}

double limit_X(const Scenario& s) {
  const double rho = load(s);
  const WaitingTime w = solve_w(s.patience, rho);
  return std::min(rho, 1.0) + s.lambda * s.patience.integrated_tail(w.selected);
}

Scenario equilibrium_scenario(const Scenario& s, double x_extent, double dx) {
  const double rho = load(s);
  const WaitingTime w = solve_w(s.patience, rho);
  Scenario out = s;
  out.R0 = s.lambda * w.selected;
  const std::vector<double> xs = linspace_step(0.0, x_extent, dx);
  std::vector<double> tail(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) tail[k] = equilibrium_pool_tail(s, xs[k]);
  // Exact value at 0 keeps the start valid when Q_inf > 0.
  tail[0] = std::min(rho, 1.0);
  out.Z0 = MeasureTail(xs, std::move(tail));
  return out;
}

ConvergenceReport convergence_report(const Scenario& s, const Trajectory& traj,
                                     const std::vector<double>& times) {
  ConvergenceReport report;
  report.equilibrium = equilibrium_state(s, {0.0});
  const EquilibriumState& eq = report.equilibrium;
  const double w = eq.w.selected;

  for (double t : times) {
    const Snapshot* snap = traj.snapshot_at(t);
    if (snap == nullptr) {
      std::ostringstream os;
      os << "convergence_report: no measure snapshot at t = " << t;
      fail(ErrorKind::invalid_argument, os.str());
    }
    const std::size_t i = grid_index(t, traj.step);
    ConvergenceRow row;
    row.t = t;
    const auto& bx = snap->buffer.x();
    for (std::size_t k = 0; k < bx.size(); ++k)
      row.d_R = std::max(row.d_R, std::abs(snap->buffer.values()[k] - equilibrium_buffer_tail(s, w, bx[k])));
    const auto& px = snap->pool.x();
    for (std::size_t k = 0; k < px.size(); ++k)
      row.d_Z = std::max(row.d_Z, std::abs(snap->pool.values()[k] - equilibrium_pool_tail(s, px[k])));
    row.d_X = std::abs(traj.X[i] - eq.X_inf);
    row.d_Q = std::abs(traj.Q[i] - eq.Q_inf);
    if (i < traj.R.size()) row.d_Rmass = std::abs(traj.R[i] - eq.R_inf);
    report.rows.push_back(row);
  }

  // Increases below the quadrature error scale are not trends.
  const double slack = (1.0 + s.lambda + 1.0 / s.service.mean().value) * traj.step * traj.step;
  auto check = [&](const char* name, auto member) {
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
      const double before = report.rows[k - 1].*member;
      const double after = report.rows[k].*member;
      if (after > before + slack) {
        std::ostringstream os;
        os << name << " increased from " << before << " at t = " << report.rows[k - 1].t << " to "
           << after << " at t = " << report.rows[k].t;
        report.trend_violations.push_back(os.str());
      }
    }
  };
  check("d_R", &ConvergenceRow::d_R);
  check("d_Z", &ConvergenceRow::d_Z);
  check("d_X", &ConvergenceRow::d_X);
  check("d_Q", &ConvergenceRow::d_Q);
  check("d_Rmass", &ConvergenceRow::d_Rmass);
  return report;
}

}  // namespace fluidq
