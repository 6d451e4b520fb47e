#include "fluidq/stochastic_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>

#include "fluidq/errors.hpp"

namespace fluidq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double below_one(double p) { return std::min(p, std::nextafter(1.0, 0.0)); }

// Smallest a in [0, span] with a - F_d(a) >= level; a - F_d(a) = int_0^a F is
// non-decreasing.
double abandoned_age(const DistributionModel& f, double span, double level) {
  double lo = 0.0;
  double hi = span;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - f.integrated_tail(mid) >= level) hi = mid; else lo = mid;
  }
  return hi;
}

class Replication {
 public:
  Replication(const SimConfig& cfg, const ValidatedScenario& vs, std::uint64_t seed)
      : cfg_(cfg), vs_(vs), s_(vs.scenario), rng_(seed) {}

  SimReplication run() {
    init_population();
    next_arrival_ = draw_interarrival();

    const std::size_t samples = grid_intervals(cfg_.horizon, cfg_.sample_step);
    std::vector<double> snap_times = cfg_.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t g = 0;
    std::size_t k = 0;

    for (;;) {
      const double next = next_event_time();
      while (g <= samples && static_cast<double>(g) * cfg_.sample_step < next) {
        record(static_cast<double>(g) * cfg_.sample_step);
        ++g;
      }
      while (k < snap_times.size() && snap_times[k] < next) {
        if (snap_times[k] <= cfg_.horizon) snapshot(snap_times[k]);
        ++k;
      }
      if (next > cfg_.horizon) break;
      if (++counters_.events > cfg_.max_events)
        fail(ErrorKind::numerical_failure, "simulation exceeded the event budget");
      process(next);
      if (cfg_.check_invariants) check();
    }

    out_.paths.step = cfg_.sample_step;
    counters_.waiting = waiting_;
    counters_.busy = departures_.size();
    out_.counters = counters_;
    return std::move(out_);
  }

 private:
  using Deadline = std::pair<double, std::size_t>;

  double scale() const { return static_cast<double>(cfg_.n); }

  double draw_interarrival() {
    if (!(s_.lambda > 0.0)) return kInf;
    const double rate = s_.lambda * scale();
    if (!cfg_.interarrival) return std::exponential_distribution<double>(rate)(rng_);
    const double mean = cfg_.interarrival->mean().value;
    return cfg_.interarrival->sample(rng_) / (mean * rate);
  }

  void init_population() {
    const double n = scale();
    const auto n_wait = static_cast<std::size_t>(std::llround(n * vs_.Q0));
    const auto n_buffer = static_cast<std::size_t>(std::llround(n * s_.R0));
    const std::size_t n_abandoned = n_buffer > n_wait ? n_buffer - n_wait : 0;
    const double z_init = s_.Z0.at(0.0);
    const auto n_busy = static_cast<std::size_t>(std::llround(n * z_init));
    if (n_busy > cfg_.n) fail(ErrorKind::invalid_initial, "initial pool exceeds the server count");
    if (n_wait > 0 && n_busy < cfg_.n)
      fail(ErrorKind::invalid_initial, "initial sampling left waiting customers with idle servers");

    for (std::size_t i = 0; i < n_busy; ++i) {
      const double residual = s_.Z0.inverse(uniform01(rng_) * z_init);
      push_departure(std::max(residual, std::numeric_limits<double>::min()));
    }

    const DistributionModel& f = s_.patience;
    const double span = s_.lambda > 0.0 ? s_.R0 / s_.lambda : 0.0;
    std::vector<CustomerRecord> initial;
    if (n_wait > 0) {
      const double mass = f.integrated_tail(span);
      for (std::size_t i = 0; i < n_wait; ++i) {
        const double age = patience_area_inverse(f, uniform01(rng_) * mass);
        const double fa = f.cdf(age);
        double p = f.quantile(below_one(fa + uniform01(rng_) * (1.0 - fa)));
        p = std::max(p, std::nextafter(age, kInf));
        initial.push_back({-age, p, 0.0, CustomerStatus::waiting});
      }
    }
    if (n_abandoned > 0) {
      const double mass = span - f.integrated_tail(span);
      for (std::size_t i = 0; i < n_abandoned; ++i) {
        const double age = abandoned_age(f, span, uniform01(rng_) * mass);
        const double p = std::min(f.quantile(below_one(uniform01(rng_) * f.cdf(age))), age);
        initial.push_back({-age, p, 0.0, CustomerStatus::abandoned_in_buffer});
      }
    }
    std::sort(initial.begin(), initial.end(),
              [](const CustomerRecord& a, const CustomerRecord& b) { return a.arrival < b.arrival; });
    for (auto& c : initial) {
      c.service = s_.service.sample(rng_);
      const std::size_t idx = customers_.size();
      customers_.push_back(c);
      buffer_.push_back(idx);
      if (c.status == CustomerStatus::waiting) {
        ++waiting_;
        deadlines_.push({c.arrival + c.patience, idx});
      } else {
        ++counters_.abandonments;
      }
    }
    counters_.arrivals = initial.size() + n_busy;
    initial_buffer_ = static_cast<double>(buffer_.size());
  }

  void push_departure(double when) {
    departures_.push_back(when);
    std::push_heap(departures_.begin(), departures_.end(), std::greater<>());
  }

  double next_event_time() {
    while (!deadlines_.empty() &&
           customers_[deadlines_.top().second].status != CustomerStatus::waiting)
      deadlines_.pop();
    double next = next_arrival_;
    if (!departures_.empty()) next = std::min(next, departures_.front());
    if (!deadlines_.empty()) next = std::min(next, deadlines_.top().first);
    return next;
  }

  void enter_service(std::size_t idx, double now) {
    CustomerRecord& c = customers_[idx];
    if (cfg_.check_invariants && last_entered_ != kNone && idx <= last_entered_)
      fail(ErrorKind::numerical_failure, "FCFS violated: service entry out of arrival order");
    last_entered_ = idx;
    c.status = CustomerStatus::in_service;
    ++counters_.entered_service;
    push_departure(now + c.service);
  }

  void process(double now) {
    if (!departures_.empty() && departures_.front() == now) {
      std::pop_heap(departures_.begin(), departures_.end(), std::greater<>());
      departures_.pop_back();
      ++counters_.departures;
      // Head-of-line scheduling: abandoned customers leave the virtual buffer
      // as the pointer passes them.
      while (!buffer_.empty()) {
        const std::size_t idx = buffer_.front();
        buffer_.pop_front();
        if (customers_[idx].status == CustomerStatus::abandoned_in_buffer) {
          customers_[idx].status = CustomerStatus::abandoned_left;
          continue;
        }
        --waiting_;
        enter_service(idx, now);
        break;
      }
      return;
    }
    if (!deadlines_.empty() && deadlines_.top().first == now) {
      const std::size_t idx = deadlines_.top().second;
      deadlines_.pop();
      customers_[idx].status = CustomerStatus::abandoned_in_buffer;
      --waiting_;
      ++counters_.abandonments;
      return;
    }
    // Arrival.
    next_arrival_ = now + draw_interarrival();
    ++counters_.arrivals;
    ++arrivals_after_start_;
    const std::size_t idx = customers_.size();
    customers_.push_back({now, s_.patience.sample(rng_), s_.service.sample(rng_), CustomerStatus::waiting});
    if (departures_.size() < cfg_.n) {
      enter_service(idx, now);
    } else {
      buffer_.push_back(idx);
      ++waiting_;
      deadlines_.push({now + customers_[idx].patience, idx});
    }
  }

  void check() const {
    const std::uint64_t busy = departures_.size();
    if (busy > cfg_.n) fail(ErrorKind::numerical_failure, "more busy servers than servers");
    if (waiting_ > 0 && busy < cfg_.n)
      fail(ErrorKind::numerical_failure, "non-idling violated: customers wait while a server is free");
    if (counters_.arrivals != waiting_ + busy + counters_.departures + counters_.abandonments)
      fail(ErrorKind::numerical_failure, "conservation violated");
  }

  void record(double t) {
    const double n = scale();
    Trajectory& p = out_.paths;
    const double q = static_cast<double>(waiting_) / n;
    const double z = static_cast<double>(departures_.size()) / n;
    const double r = static_cast<double>(buffer_.size()) / n;
    const double b = static_cast<double>(arrivals_after_start_) / n - r;
    const double a = static_cast<double>(counters_.entered_service) / n;
    p.t.push_back(t);
    p.X.push_back(q + z);
    p.Q.push_back(q);
    p.Z.push_back(z);
    p.R.push_back(r);
    p.A.push_back(a);
    p.B.push_back(b);
    p.S.push_back(static_cast<double>(counters_.departures) / n);
    p.L1.push_back(r - q);
    p.L2.push_back(b + initial_buffer_ / n - a);
    p.L.push_back(p.L1.back() + p.L2.back());
  }

  void snapshot(double t) {
    const double n = scale();
    std::vector<double> service_left;
    service_left.reserve(departures_.size());
    for (double d : departures_) service_left.push_back(d - t);
    std::sort(service_left.begin(), service_left.end());
    std::vector<double> patience_left;
    patience_left.reserve(buffer_.size());
    for (std::size_t idx : buffer_) patience_left.push_back(customers_[idx].remaining_patience(t));
    std::sort(patience_left.begin(), patience_left.end());

    auto count_above = [](const std::vector<double>& v, double x) {
      return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), x));
    };
    std::vector<double> pool(cfg_.snapshot_x.size());
    std::vector<double> buf(cfg_.snapshot_x.size());
    for (std::size_t k = 0; k < cfg_.snapshot_x.size(); ++k) {
      pool[k] = count_above(service_left, cfg_.snapshot_x[k]) / n;
      buf[k] = count_above(patience_left, cfg_.snapshot_x[k]) / n;
    }
    out_.paths.snapshots.push_back({t, MeasureTail(cfg_.snapshot_x, std::move(buf)),
                                    MeasureTail(cfg_.snapshot_x, std::move(pool))});
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  const SimConfig& cfg_;
  const ValidatedScenario& vs_;
  const Scenario& s_;
  Rng rng_;

  std::vector<CustomerRecord> customers_;
  std::deque<std::size_t> buffer_;  // virtual buffer, arrival order
  std::vector<double> departures_;  // min-heap of departure times
  std::priority_queue<Deadline, std::vector<Deadline>, std::greater<>> deadlines_;
  double next_arrival_ = kInf;
  std::uint64_t waiting_ = 0;
  std::uint64_t arrivals_after_start_ = 0;
  double initial_buffer_ = 0.0;
  std::size_t last_entered_ = kNone;
  SimCounters counters_;
  SimReplication out_;
};

void validate_config(const SimConfig& cfg) {
  if (cfg.n < 1) fail(ErrorKind::invalid_config, "server count n must be >= 1");
  if (!(cfg.horizon > 0.0)) fail(ErrorKind::invalid_config, "horizon must be positive");
  if (cfg.replications < 1) fail(ErrorKind::invalid_config, "replications must be >= 1");
  if (!(cfg.sample_step > 0.0)) fail(ErrorKind::invalid_config, "sample step must be positive");
  if (cfg.interarrival) require_service_law(*cfg.interarrival);
  for (std::size_t k = 1; k < cfg.snapshot_x.size(); ++k)
    if (!(cfg.snapshot_x[k] > cfg.snapshot_x[k - 1]))
      fail(ErrorKind::invalid_config, "snapshot x-grid must increase strictly");
  if (!cfg.snapshot_times.empty() && cfg.snapshot_x.empty())
    fail(ErrorKind::invalid_config, "snapshots need an x-grid");
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
  std::uint64_t z = master ^ static_cast<std::uint64_t>(rep);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SimResult simulate(const SimConfig& cfg) {
  validate_config(cfg);
  const ValidatedScenario vs = validate_initial(cfg.scenario);

  SimResult result;
  result.replications.resize(cfg.replications);
  std::vector<std::exception_ptr> errors(cfg.replications);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t rep = next++; rep < cfg.replications; rep = next++) {
      try {
        result.replications[rep] = Replication(cfg, vs, replication_seed(cfg.seed, rep)).run();
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.replications));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

Trajectory average(const SimResult& result) {
  if (result.replications.empty()) fail(ErrorKind::invalid_argument, "average: no replications");
  Trajectory mean = result.replications.front().paths;
  const double reps = static_cast<double>(result.replications.size());
  using Member = std::vector<double> Trajectory::*;
  const Member members[] = {&Trajectory::X, &Trajectory::Q, &Trajectory::Z, &Trajectory::R,
                            &Trajectory::A, &Trajectory::B, &Trajectory::S, &Trajectory::L1,
                            &Trajectory::L2, &Trajectory::L};
  for (Member m : members) {
    auto& acc = mean.*m;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& rep : result.replications) {
      const auto& v = rep.paths.*m;
      if (v.size() != acc.size()) fail(ErrorKind::grid_mismatch, "average: replications differ in length");
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    }
    for (double& a : acc) a /= reps;
  }
  for (std::size_t k = 0; k < mean.snapshots.size(); ++k) {
    std::vector<double> pool(mean.snapshots[k].pool.x().size(), 0.0);
    std::vector<double> buf(mean.snapshots[k].buffer.x().size(), 0.0);
    for (const auto& rep : result.replications) {
      const Snapshot& s = rep.paths.snapshots.at(k);
      for (std::size_t j = 0; j < pool.size(); ++j) pool[j] += s.pool.values()[j];
      for (std::size_t j = 0; j < buf.size(); ++j) buf[j] += s.buffer.values()[j];
    }
    for (double& v : pool) v /= reps;
    for (double& v : buf) v /= reps;
    mean.snapshots[k].pool = MeasureTail(mean.snapshots[k].pool.x(), std::move(pool));
    mean.snapshots[k].buffer = MeasureTail(mean.snapshots[k].buffer.x(), std::move(buf));
  }
  return mean;
}

Discrepancy discrepancy(const Trajectory& sim, const Trajectory& fluid) {
  Discrepancy d;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const std::size_t k = grid_index(sim.t[i], fluid.step);
    if (k >= fluid.size()) fail(ErrorKind::grid_mismatch, "discrepancy: sample time beyond the fluid horizon");
    d.X = std::max(d.X, std::abs(sim.X[i] - fluid.X[k]));
    d.Q = std::max(d.Q, std::abs(sim.Q[i] - fluid.Q[k]));
    d.Z = std::max(d.Z, std::abs(sim.Z[i] - fluid.Z[k]));
    if (i < sim.R.size() && k < fluid.R.size()) d.R = std::max(d.R, std::abs(sim.R[i] - fluid.R[k]));
  }
  for (const Snapshot& snap : sim.snapshots) {
    const Snapshot* ref = fluid.snapshot_at(snap.t);
    if (ref == nullptr) {
      std::ostringstream os;
      os << "discrepancy: fluid trajectory has no snapshot at t = " << snap.t;
      fail(ErrorKind::grid_mismatch, os.str());
    }
    SnapshotGap gap{snap.t, 0.0, 0.0};
    for (std::size_t j = 0; j < snap.pool.x().size(); ++j) {
      const double x = snap.pool.x()[j];
      if (x >= 0.0) gap.pool = std::max(gap.pool, std::abs(snap.pool.values()[j] - ref->pool.at(x)));
    }
    for (std::size_t j = 0; j < snap.buffer.x().size(); ++j) {
      const double x = snap.buffer.x()[j];
      gap.buffer = std::max(gap.buffer, std::abs(snap.buffer.values()[j] - ref->buffer.at(x)));
    }
    d.snapshots.push_back(gap);
  }
  return d;
}

}  // namespace fluidq
