#include "fluidq/fluid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidq/errors.hpp"
#include "fluidq/renewal.hpp"
#include "stieltjes.hpp"

namespace fluidq {

namespace {

constexpr double kSlack = 1e-12;

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// H(q) with the zero-arrival convention: without arrivals the H-term of the
// key equation carries a zero factor, so its value is irrelevant.
double survival(const Scenario& s, double q) {
  return s.lambda > 0.0 ? survival_fraction(s.patience, s.lambda, q) : 0.0;
}

// Inverse of Q = lambda F_d(R / lambda), tolerant of Q reaching lambda N_F
// through rounding.
double buffer_mass(const Scenario& s, double q) {
  if (!(s.lambda > 0.0) || !(q > 0.0)) return 0.0;
  double target = q / s.lambda;
  const Extent nf = s.patience.mean();
  if (!nf.unbounded && target >= nf.value) {
    const double end = s.patience.support_end();
    if (std::isfinite(end)) return s.lambda * end;
    target = std::nextafter(nf.value, 0.0);
  }
  return s.lambda * patience_area_inverse(s.patience, target);
}

std::vector<double> survival_path(const Scenario& s, const std::vector<double>& q) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = survival(s, q[i]);
  return out;
}

// lambda * int_0^{kh} G^c, the cumulative mass of (lambda/mu) dG_e.
std::vector<double> scaled_equilibrium_cdf(const Scenario& s, std::size_t n, double step) {
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    out[k] = s.lambda * s.service.integrated_tail(static_cast<double>(k) * step);
  return out;
}

std::vector<double> cdf_samples(const DistributionModel& d, std::size_t n, double step) {
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = d.cdf(static_cast<double>(k) * step);
  return out;
}

void require_length(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() < n) {
    std::ostringstream os;
    os << "trajectory is missing " << what;
    fail(ErrorKind::invalid_argument, os.str());
  }
}

// Values G^c((m + 1/2) h) for the x-on-grid fast path of pool_measure.
struct MidpointTail {
  const DistributionModel& g;
  double step;
  std::vector<double> cache;

  double operator()(std::size_t m) {
    while (cache.size() <= m)
      cache.push_back(g.tail((static_cast<double>(cache.size()) + 0.5) * step));
    return cache[m];
  }
};

}  // namespace

const Snapshot* Trajectory::snapshot_at(double time) const {
  for (const auto& snap : snapshots)
    if (std::abs(snap.t - time) <= 1e-9 * std::max(1.0, time)) return &snap;
  return nullptr;
}

double consistency_tolerance(const ValidatedScenario& s, double step) {
  return 10.0 * (1.0 + s.scenario.lambda + s.mu) * step;
}

ValidatedScenario validate_initial(const Scenario& s) {
  if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda))
    fail(ErrorKind::invalid_config, "arrival rate must be finite and non-negative");
  require_service_law(s.service);
  check_lipschitz(s.patience, 1e-3);

  if (!(s.R0 >= 0.0) || !std::isfinite(s.R0))
    fail(ErrorKind::invalid_initial, "initial buffer mass R0 must be finite and non-negative");
  if (s.lambda == 0.0 && s.R0 > 0.0)
    fail(ErrorKind::invalid_initial, "a positive buffer mass needs a positive arrival rate");

  const MeasureTail& z0 = s.Z0;
  if (!z0.empty()) {
    if (z0.x().front() < 0.0) fail(ErrorKind::invalid_initial, "Z0 tail must be given on x >= 0");
    if (z0.max_increase() > kSlack) fail(ErrorKind::invalid_initial, "Z0 tail is increasing somewhere");
    for (double v : z0.values())
      if (v < -kSlack) fail(ErrorKind::invalid_initial, "Z0 tail must be non-negative");
  }
  const double z_init = z0.at(0.0);
  if (z_init > 1.0 + kSlack) fail(ErrorKind::invalid_initial, "Z0(C_0) exceeds the server capacity 1");

  ValidatedScenario out{s, 1.0 / s.service.mean().value, 0.0, 0.0};
  out.Q0 = s.lambda > 0.0 ? s.lambda * s.patience.integrated_tail(s.R0 / s.lambda) : 0.0;
  if (out.Q0 > kSlack && z_init < 1.0 - 1e-9)
    fail(ErrorKind::invalid_initial, "queue is positive while servers are idle (Z0(C_0) < 1)");
  out.X0 = out.Q0 + z_init;
  return out;
}

Trajectory solve(const ValidatedScenario& vs, double horizon, double step,
                 const SolverOptions& options) {
  const Scenario& s = vs.scenario;
  const std::size_t n = grid_intervals(horizon, step);

  const detail::CellWeights arrivals(scaled_equilibrium_cdf(s, n, step));
  const detail::CellWeights service(cdf_samples(s.service, n, step));

  Trajectory traj;
  traj.step = step;
  traj.t.resize(n + 1);
  traj.X.resize(n + 1);
  traj.Q.resize(n + 1);
  traj.Z.resize(n + 1);
  std::vector<double> hq(n + 1);

  traj.X[0] = vs.X0;
  traj.Q[0] = positive_part(vs.X0 - 1.0);
  traj.Z[0] = std::min(vs.X0, 1.0);
  hq[0] = survival(s, traj.Q[0]);

  const double z0_end = s.Z0.empty() ? 0.0 : s.Z0.x().back();
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) * step;
    traj.t[i] = t;
    const double z0 = s.Z0.at(t);
    if (t > z0_end && z0 > traj.diagnostics.z0_extrapolated_max)
      traj.diagnostics.z0_extrapolated_max = z0;

    const double known = z0 + vs.Q0 * s.service.tail(t) + arrivals.history(hq.data(), i) +
                         service.history(traj.Q.data(), i);

    double x = traj.X[i - 1];
    int iter = 0;
    for (;; ++iter) {
      if (iter >= options.max_iterations) {
        std::ostringstream os;
        os << "fixed-point iteration did not converge at t = " << t << "; reduce the step";
        fail(ErrorKind::numerical_failure, os.str());
      }
      const double q = positive_part(x - 1.0);
      const double next = known + survival(s, q) * arrivals.folded(0) + q * service.folded(0);
      const bool done = std::abs(next - x) <= options.tolerance;
      x = next;
      if (done) break;
    }
    traj.diagnostics.max_iterations = std::max(traj.diagnostics.max_iterations, iter + 1);

    traj.X[i] = x;
    traj.Q[i] = positive_part(x - 1.0);
    traj.Z[i] = std::min(x, 1.0);
    hq[i] = survival(s, traj.Q[i]);
  }
  return traj;
}

double key_equation_residual(const ValidatedScenario& vs, const Trajectory& traj) {
  const Scenario& s = vs.scenario;
  const std::size_t n = traj.size() - 1;
  const double h = traj.step;
  const auto ge = scaled_equilibrium_cdf(s, n, h);
  const auto g = cdf_samples(s.service, n, h);
  const auto hq = survival_path(s, traj.Q);

  double worst = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * h;
    double rhs = s.Z0.at(t) + vs.Q0 * s.service.tail(t);
    for (std::size_t k = 1; k <= i; ++k) {
      rhs += 0.5 * (hq[i - k + 1] + hq[i - k]) * (ge[k] - ge[k - 1]);
      rhs += 0.5 * (traj.Q[i - k + 1] + traj.Q[i - k]) * (g[k] - g[k - 1]);
    }
    worst = std::max(worst, std::abs(traj.X[i] - rhs));
  }
  return worst;
}

std::vector<double> buffer_content(const ValidatedScenario& vs, const Trajectory& traj) {
  std::vector<double> r(traj.Q.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = buffer_mass(vs.scenario, traj.Q[i]);
  return r;
}

EnteredService entered_service(const ValidatedScenario& vs, const Trajectory& traj) {
  const Scenario& s = vs.scenario;
  const std::size_t len = traj.size();
  require_length(traj.Z, len, "Z");
  const double h = traj.step;

  EnteredService out;
  out.integral.resize(len);
  const auto hq = survival_path(s, traj.Q);
  double cum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0) cum += 0.5 * (hq[i - 1] + hq[i]) * h;
    out.integral[i] = s.lambda * cum - traj.Q[i] + traj.Q[0];
  }

  const double horizon = static_cast<double>(len - 1) * h;
  if (len == 1) {
    out.renewal = {0.0};
    return out;
  }
  GridFunction forcing{h, std::vector<double>(len)};
  for (std::size_t i = 0; i < len; ++i)
    forcing.values[i] = traj.Z[i] - s.Z0.at(static_cast<double>(i) * h);
  const GridFunction u = renewal_function(s.service, horizon, h);
  out.renewal = stieltjes_convolve(forcing, u, horizon).values;
  return out;
}

MeasureTail pool_measure(const ValidatedScenario& vs, const Trajectory& traj, double t,
                         const std::vector<double>& xgrid) {
  const Scenario& s = vs.scenario;
  const std::size_t i = grid_index(t, traj.step);
  require_length(traj.A, i + 1, "A on [0, t]");
  const double h = traj.step;

  MidpointTail mid{s.service, h, {}};
  std::vector<double> values(xgrid.size());
  for (std::size_t k = 0; k < xgrid.size(); ++k) {
    const double x = xgrid[k];
    double v = s.Z0.at(x + t);
    const double m = std::round(x / h);
    if (x >= 0.0 && std::abs(m * h - x) <= 1e-9 * std::max(1.0, x)) {
      const auto off = static_cast<std::size_t>(m);
      for (std::size_t j = 1; j <= i; ++j) v += mid(off + i - j) * (traj.A[j] - traj.A[j - 1]);
    } else {
      for (std::size_t j = 1; j <= i; ++j)
        v += s.service.tail(x + t - (static_cast<double>(j) - 0.5) * h) * (traj.A[j] - traj.A[j - 1]);
    }
    values[k] = v;
  }
  return MeasureTail(xgrid, std::move(values));
}

MeasureTail buffer_measure(const ValidatedScenario& vs, const Trajectory& traj, double t,
                           const std::vector<double>& xgrid) {
  const Scenario& s = vs.scenario;
  const std::size_t i = grid_index(t, traj.step);
  require_length(traj.R, i + 1, "R on [0, t]");
  const double span = s.lambda > 0.0 ? traj.R[i] / s.lambda : 0.0;

  std::vector<double> values(xgrid.size(), 0.0);
  if (span > 0.0) {
    for (std::size_t k = 0; k < xgrid.size(); ++k) {
      const double x = xgrid[k];
      values[k] = s.lambda * (s.patience.integrated_tail(x + span) - s.patience.integrated_tail(x));
    }
  }
  return MeasureTail(xgrid, std::move(values));
}

Flows flows(const ValidatedScenario& vs, const Trajectory& traj) {
  const Scenario& s = vs.scenario;
  const std::size_t len = traj.size();
  require_length(traj.R, len, "R");
  require_length(traj.A, len, "A");
  const double h = traj.step;

  std::vector<double> g_mid(len);
  for (std::size_t m = 0; m < len; ++m) g_mid[m] = s.service.cdf((static_cast<double>(m) + 0.5) * h);
  std::vector<double> da(len, 0.0);
  for (std::size_t j = 1; j < len; ++j) da[j] = traj.A[j] - traj.A[j - 1];

  Flows out;
  out.B.resize(len);
  out.S.resize(len);
  out.L1.resize(len);
  out.L2.resize(len);
  out.L.resize(len);
  const double z0_total = s.Z0.at(0.0);
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) * h;
    out.B[i] = s.lambda * t - traj.R[i];
    double acc = z0_total - s.Z0.at(t);
    const double* gm = g_mid.data() + i;
    for (std::size_t j = 1; j <= i; ++j) acc += *(gm - j) * da[j];
    out.S[i] = acc;
  }
  for (std::size_t i = 0; i < len; ++i) {
    out.L1[i] = traj.R[i] - traj.Q[i];
    out.L2[i] = out.B[i] - out.B[0] - traj.A[i];
    out.L[i] = out.L1[i] + out.L2[i];
  }
  return out;
}

double balance_residual(const Trajectory& traj) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    worst = std::max(worst, std::abs(traj.Z[i] - traj.Z[0] - traj.A[i] + traj.S[i]));
  return worst;
}

Scenario time_shift(const ValidatedScenario& vs, const Trajectory& traj, double tau, double x_extent) {
  const std::size_t i = grid_index(tau, traj.step);
  if (i >= traj.size()) fail(ErrorKind::invalid_argument, "time_shift: tau is beyond the horizon");
  require_length(traj.R, i + 1, "R");

  Scenario out = vs.scenario;
  out.R0 = traj.R[i];
  if (i == 0) return out;

  const double remaining = traj.t.back() - tau;
  const double z0_end = vs.scenario.Z0.empty() ? 0.0 : vs.scenario.Z0.x().back();
  if (!(x_extent > 0.0)) x_extent = std::max({remaining, z0_end, traj.step});
  const std::vector<double> xgrid = linspace_step(0.0, x_extent, traj.step);
  const MeasureTail raw = pool_measure(vs, traj, tau, xgrid);

  // Project onto valid tails: value at 0 is the pool content Z(tau), and the
  // tail is non-increasing.
  std::vector<double> values = raw.values();
  values[0] = traj.Z[i];
  for (std::size_t k = 1; k < values.size(); ++k)
    values[k] = std::clamp(values[k], 0.0, values[k - 1]);
  out.Z0 = MeasureTail(xgrid, std::move(values));
  return out;
}

std::vector<double> snapshot_grid(const ValidatedScenario& vs, const Trajectory& traj,
                                  const MeasureGridSpec& spec) {
  if (!(spec.dx > 0.0) || !(spec.x_max > 0.0))
    fail(ErrorKind::invalid_argument, "snapshot grid needs dx > 0 and x_max > 0");
  double r_max = 0.0;
  for (double r : traj.R) r_max = std::max(r_max, r);
  const double lambda = vs.scenario.lambda;
  const double reach = lambda > 0.0 ? r_max / lambda : 0.0;

  std::vector<double> grid;
  const auto neg = static_cast<long>(std::ceil(reach / spec.dx - 1e-9));
  for (long k = neg; k >= 1; --k) grid.push_back(-static_cast<double>(k) * spec.dx);
  for (double x : linspace_step(0.0, spec.x_max, spec.dx)) grid.push_back(x);
  return grid;
}

Trajectory solve_full(const ValidatedScenario& vs, double horizon, double step,
                      const std::vector<double>& snapshot_times, const MeasureGridSpec& grid,
                      const SolverOptions& options) {
  for (double t : snapshot_times) {
    if (grid_index(t, step) > grid_intervals(horizon, step)) {
      std::ostringstream os;
      os << "snapshot time " << t << " is beyond the horizon " << horizon;
      fail(ErrorKind::invalid_config, os.str());
    }
  }
  Trajectory traj = solve(vs, horizon, step, options);
  traj.R = buffer_content(vs, traj);
  EnteredService a = entered_service(vs, traj);
  traj.A = std::move(a.integral);
  traj.A_renewal = std::move(a.renewal);
  Flows f = flows(vs, traj);
  traj.B = std::move(f.B);
  traj.S = std::move(f.S);
  traj.L1 = std::move(f.L1);
  traj.L2 = std::move(f.L2);
  traj.L = std::move(f.L);

  if (!snapshot_times.empty()) {
    const std::vector<double> xgrid = snapshot_grid(vs, traj, grid);
    std::vector<double> positive;
    for (double x : xgrid)
      if (x >= 0.0) positive.push_back(x);
    for (double t : snapshot_times) {
      Snapshot snap;
      snap.t = t;
      snap.buffer = buffer_measure(vs, traj, t, xgrid);
      snap.pool = pool_measure(vs, traj, t, positive);
      traj.snapshots.push_back(std::move(snap));
    }
  }
  return traj;
}

}  // namespace fluidq
