// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed; nothing is tuned per run.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fluidq/equilibrium.hpp"
#include "fluidq/errors.hpp"
#include "fluidq/fluid_solver.hpp"
#include "fluidq/renewal.hpp"
#include "fluidq/stochastic_sim.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fluidq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

Scenario make(double lambda, DistributionModel g, DistributionModel f) {
  return Scenario{lambda, std::move(g), std::move(f), 0.0, MeasureTail()};
}

Scenario mm(double lambda) {
  return make(lambda, DistributionModel::exponential(1.0), DistributionModel::exponential(1.0));
}

Scenario regime_a() {
  return make(0.5, DistributionModel::lognormal_mean(1.0, 1.0), DistributionModel::uniform(0.0, 1.0));
}
Scenario regime_b() {
  return make(1.0, DistributionModel::erlang(2, 2.0), DistributionModel::uniform(0.0, 2.0));
}
Scenario regime_c() {
  return make(2.0, DistributionModel::exponential(1.0), DistributionModel::uniform(0.0, 1.0));
}

double sup_gap(const std::vector<double>& a, const std::vector<double>& b, std::size_t off = 0) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[off + i]));
  return g;
}

// Every trajectory solved here, for the dual-computation check.
struct Solved {
  std::string name;
  double gap_A = 0.0;
  double balance = 0.0;
  double tol = 0.0;
};
std::vector<Solved> g_solved;

Trajectory run(const std::string& name, const ValidatedScenario& vs, double horizon, double step,
               const std::vector<double>& snapshots = {}) {
  Trajectory traj = solve_full(vs, horizon, step, snapshots);
  g_solved.push_back({name, sup_gap(traj.A, traj.A_renewal), balance_residual(traj),
                      consistency_tolerance(vs, step)});
  return traj;
}

// The M/M+M trajectory shared by criteria 1, 2 and 9.
struct Shared {
  ValidatedScenario vs = validate_initial(mm(2.0));
  Trajectory traj;
  double seconds = 0.0;
};
Shared& mm_reference() {
  static Shared s = [] {
    Shared out;
    const auto start = Clock::now();
    out.traj = run("M/M+M", out.vs, 30.0, 1e-3, {15.0, 30.0});
    out.seconds = seconds_since(start);
    return out;
  }();
  return s;
}

Outcome ode_reduction() {
  const Shared& ref = mm_reference();
  const std::vector<double> ode = oracle::mm_ode(2.0, 1.0, 1.0, 0.0, 30.0, 1e-3, 100);
  const double gap = sup_gap(ref.traj.X, ode);
  return {gap <= 2e-3 && ref.seconds <= 10.0,
          fmt("sup|X - X_ode| = %.3g (<= 2e-3), solve %.2f s (<= 10 s)", gap, ref.seconds)};
}

Outcome overloaded_convergence() {
  const Shared& ref = mm_reference();
  const std::size_t k = ref.traj.size() - 1;
  const double eX = std::abs(ref.traj.X[k] - 2.0);
  const double eQ = std::abs(ref.traj.Q[k] - 1.0);
  const double eR = std::abs(ref.traj.R[k] - 2.0 * std::log(2.0));
  const ConvergenceReport rep = convergence_report(ref.vs.scenario, ref.traj, {15.0, 30.0});
  const ConvergenceRow& end = rep.rows.back();
  const bool ok = eX <= 1e-3 && eQ <= 1e-3 && eR <= 2e-3 && end.d_R <= 5e-3 && end.d_Z <= 5e-3 &&
                  rep.trend_violations.empty();
  return {ok, fmt("|X-2| = %.2g, |Q-1| = %.2g, |R-2ln2| = %.2g, d_R = %.2g, d_Z = %.2g (d_R(15) = %.2g, d_Z(15) = %.2g, %zu trend violations)",
                  eX, eQ, eR, end.d_R, end.d_Z, rep.rows.front().d_R, rep.rows.front().d_Z,
                  rep.trend_violations.size())};
}

Outcome load_regimes() {
  const double step = 2e-3;
  const Trajectory a = run("regime a", validate_initial(regime_a()), 40.0, step);
  const Trajectory b = run("regime b", validate_initial(regime_b()), 60.0, step);
  const Trajectory c = run("regime c", validate_initial(regime_c()), 40.0, step);
  const double xa = std::abs(a.X.back() - 0.5);
  const double qa = a.Q.back();
  const double xb = std::abs(b.X.back() - 1.0);
  const double q_ref = 2.0 * oracle::trapezoid([](double x) { return 1.0 - x; }, 0.0, 0.5, 1e-4);
  const double qc = std::abs(c.Q.back() - q_ref);
  return {xa <= 1e-2 && qa <= 1e-3 && xb <= 1e-2 && qc <= 1e-2,
          fmt("(a) |X(40)-0.5| = %.2g, Q(40) = %.2g; (b) |X(60)-1| = %.2g; (c) |Q(40)-%.4g| = %.2g", xa, qa, xb,
              q_ref, qc)};
}

Outcome equilibrium_fixed_point() {
  const double step = 1e-3;
  bool ok = true;
  std::string detail;
  const char* names[] = {"a", "b", "c"};
  const Scenario bases[] = {regime_a(), regime_b(), regime_c()};
  for (int r = 0; r < 3; ++r) {
    const ValidatedScenario vs = validate_initial(equilibrium_scenario(bases[r], 40.0, step));
    const Trajectory traj = run(std::string("equilibrium ") + names[r], vs, 20.0, step);
    const double x_inf = limit_X(bases[r]);
    double gap = 0.0;
    for (double x : traj.X) gap = std::max(gap, std::abs(x - x_inf));
    const double tol = consistency_tolerance(vs, step);
    ok = ok && gap <= tol;
    detail += fmt("%s%s: %.2g (tol %.3g)", r ? ", " : "", names[r], gap, tol);
  }
  return {ok, "sup|X - X_inf| " + detail};
}

Outcome comparison() {
  gen::Source src(2101);
  const double step = 5e-3;
  int violations = 0;
  double worst = -1e300;
  for (int c = 0; c < 25; ++c) {
    Scenario lo = src.scenario(0.2, 2.5);
    Scenario hi = lo;
    hi.lambda = lo.lambda + src.uniform(0.05, 1.5);
    const Trajectory a = run("comparison low", validate_initial(lo), 10.0, step);
    const Trajectory b = run("comparison high", validate_initial(hi), 10.0, step);
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst = std::max({worst, a.A[i] - b.A[i], a.S[i] - b.S[i]});
      if (a.A[i] > b.A[i] + 5e-3 || a.S[i] > b.S[i] + 5e-3) ++violations;
    }
  }
  return {violations == 0, fmt("25 pairs, %d violations, max(A1-A2, S1-S2) = %.2g (<= 5e-3)", violations, worst)};
}

Outcome time_shift_property() {
  gen::Source src(2102);
  const double step = 5e-3;
  const double horizon = 10.0;
  bool ok = true;
  double worst_ratio = 0.0;
  for (int c = 0; c < 10; ++c) {
    const ValidatedScenario vs = validate_initial(src.scenario());
    const Trajectory traj = run("time shift", vs, horizon, step);
    const double tol = consistency_tolerance(vs, step);
    for (double tau : {1.0, 5.0}) {
      const ValidatedScenario restarted = validate_initial(time_shift(vs, traj, tau));
      const Trajectory rest = run("time shift restart", restarted, horizon - tau, step);
      const std::size_t off = grid_index(tau, step);
      const double gap = std::max({sup_gap(rest.X, traj.X, off), sup_gap(rest.Q, traj.Q, off),
                                   sup_gap(rest.Z, traj.Z, off), sup_gap(rest.R, traj.R, off)});
      worst_ratio = std::max(worst_ratio, gap / tol);
      ok = ok && gap <= 2.0 * tol;
    }
  }
  return {ok, fmt("20 restarts, worst gap / tol = %.3g (<= 2)", worst_ratio)};
}

Outcome growth_bound() {
  Scenario s = make(2.0, DistributionModel::exponential(1.0),
                    DistributionModel::piecewise({{0.0, 0.0}, {1.0, 0.5}}, 1.0));
  s.R0 = 1.0;
  s.Z0 = gen::Source::exponential_tail(1.0, 1.0);
  const ValidatedScenario vs = validate_initial(s);
  const Trajectory traj = run("growth", vs, 200.0, 1e-2);
  // int_0^t F^c: linear part on [0, 1], then 0.5 / x.
  auto area = [](double t) { return t <= 1.0 ? t - 0.25 * t * t : 0.75 + 0.5 * std::log(t); };
  double excess = -1e300;
  for (std::size_t i = 0; i < traj.size(); ++i)
    excess = std::max(excess, traj.Q[i] - (vs.Q0 + s.lambda * area(traj.t[i])));
  const double ratio = traj.Q.back() / 200.0;
  return {excess <= 1e-9 && ratio <= 0.02,
          fmt("max(Q - bound) = %.3g (<= 0), Q(200)/200 = %.3g (<= 0.02)", excess, ratio)};
}

Outcome dual_computation() {
  bool ok = true;
  double worst = 0.0;
  std::string bad;
  for (const Solved& s : g_solved) {
    const double r = std::max(s.gap_A, s.balance) / s.tol;
    worst = std::max(worst, r);
    if (s.gap_A > s.tol || s.balance > s.tol) {
      ok = false;
      bad += " " + s.name + fmt("(A %.2g, balance %.2g, tol %.2g)", s.gap_A, s.balance, s.tol);
    }
  }
  return {ok, fmt("%zu trajectories, worst max(A gap, balance) / tol = %.3g", g_solved.size(), worst) + bad};
}

Outcome fluid_limit() {
  const Shared& ref = mm_reference();
  const auto start = Clock::now();
  double gaps[2] = {0.0, 0.0};
  double rep_mean[2] = {0.0, 0.0};
  const std::size_t ns[2] = {50, 500};
  for (int k = 0; k < 2; ++k) {
    SimConfig cfg(ref.vs.scenario);
    cfg.n = ns[k];
    cfg.horizon = 30.0;
    cfg.sample_step = 0.01;
    cfg.seed = 2024;
    cfg.replications = 20;
    const SimResult res = simulate(cfg);
    gaps[k] = discrepancy(average(res), ref.traj).X;
    for (const SimReplication& r : res.replications) rep_mean[k] += discrepancy(r.paths, ref.traj).X;
    rep_mean[k] /= static_cast<double>(res.replications.size());
  }
  const double secs = seconds_since(start);
  return {gaps[0] <= 0.25 && gaps[1] <= 0.08 && gaps[1] < gaps[0] && secs <= 120.0,
          fmt("averaged sup|X^n - X|: n=50 %.3g (<= 0.25), n=500 %.3g (<= 0.08); per-replication mean %.3g / %.3g; "
              "%.1f s",
              gaps[0], gaps[1], rep_mean[0], rep_mean[1], secs)};
}

Outcome renewal() {
  const GridFunction u = renewal_function(DistributionModel::exponential(1.0), 10.0, 1e-3);
  double closed = 0.0;
  double erlang = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u.step * static_cast<double>(i);
    closed = std::max(closed, std::abs(u[i] - (1.0 + t)));
    if (i % 100 == 0) erlang = std::max(erlang, std::abs(u[i] - oracle::erlang_renewal(1, 1.0, t)));
  }
  return {closed <= 1e-3 && erlang <= 1e-3,
          fmt("sup|U - (1+t)| = %.3g, sup|U - Erlang sum| = %.3g (<= 1e-3)", closed, erlang)};
}

}  // namespace

int main() {
  // Criterion 7 reads every trajectory solved before it, so it runs last.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, ode_reduction},   {2, overloaded_convergence}, {3, load_regimes},  {4, equilibrium_fixed_point},
      {5, comparison},      {6, time_shift_property},    {8, growth_bound},  {9, fluid_limit},
      {10, renewal},        {7, dual_computation},
  };
  std::vector<std::string> lines(11);
  int failures = 0;
  for (const auto& [id, body] : criteria) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    lines[id] = fmt("%s criterion %d: ", o.pass ? "PASS" : "FAIL", id) + o.detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
  }
  for (int id = 1; id <= 10; ++id) std::printf("%s\n", lines[id].c_str());
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
