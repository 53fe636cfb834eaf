#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aqm/controllers.hpp"
#include "aqm/fluid.hpp"

namespace aqm {

// One evaluation scenario: the dumbbell's access links are folded into a
// single total propagation delay Tp = 2*access + bottleneck, which is the
// abstraction the fluid equations see.
struct Scenario {
  std::string name;
  NProfile n_profile{100.0};
  double access_delay = 0.0;      // seconds, one side
  double bottleneck_delay = 0.06; // seconds
  double horizon = 100.0;
  double target_queue = 150.0;

  double total_prop_delay() const {
    return 2.0 * access_delay + bottleneck_delay;
  }
};

inline std::vector<Scenario> scenario_catalog() {
  std::vector<Scenario> list;
  Scenario s1;
  s1.name = "s1";
  s1.n_profile = NProfile(100.0);
  list.push_back(s1);

  Scenario s2;
  s2.name = "s2";
  s2.n_profile = NProfile{{0.0, 100.0}, {30.0, 130.0}, {60.0, 70.0}, {80.0, 100.0}};
  list.push_back(s2);

  Scenario s3s;
  s3s.name = "s3-short";
  s3s.access_delay = 0.002;
  s3s.bottleneck_delay = 0.010;
  list.push_back(s3s);

  Scenario s3l;
  s3l.name = "s3-long";
  s3l.access_delay = 0.020;
  s3l.bottleneck_delay = 0.140;
  list.push_back(s3l);
  return list;
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
  for (const auto& s : scenario_catalog())
    if (s.name == name) return s;
  return std::nullopt;
}

struct SeriesPoint {
  double t;
  double q;
  double w;
  double r;
  double p;
  double departure_rate;
  double arrival_rate;
};

struct RunSummary {
  double iae = 0.0;
  double utilization = 0.0;
  double loss_rate = 0.0;
  double overshoot = 0.0;
  double settling_time = 0.0;
};

struct RunRecord {
  std::string scenario;
  std::string controller;
  double target_queue = 150.0;
  double sample_period = 0.01;
  std::vector<SeriesPoint> series;
  double forced_drops = 0.0; // packets clipped at the buffer
  RunSummary summary;
};

// Trapezoidal time-average of |e| over the series span.
inline double iae(const std::vector<double>& t, const std::vector<double>& e) {
  if (t.size() != e.size() || t.size() < 2)
    throw std::invalid_argument("iae: need at least two samples");
  double total = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    total += 0.5 * (std::abs(e[i]) + std::abs(e[i - 1])) * (t[i] - t[i - 1]);
  return total / (t.back() - t.front());
}

namespace detail {

inline double trapezoid(const std::vector<SeriesPoint>& s,
                        double (*value)(const SeriesPoint&)) {
  double total = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i)
    total += 0.5 * (value(s[i]) + value(s[i - 1])) * (s[i].t - s[i - 1].t);
  return total;
}

} // namespace detail

inline double utilization(const RunRecord& run, double capacity) {
  const auto& s = run.series;
  if (s.size() < 2) throw std::invalid_argument("utilization: empty run");
  double span = s.back().t - s.front().t;
  double integral = detail::trapezoid(s, [](const SeriesPoint& p) { return p.departure_rate; });
  return integral / (span * capacity);
}

inline double loss_rate(const RunRecord& run) {
  const auto& s = run.series;
  if (s.size() < 2) throw std::invalid_argument("loss_rate: empty run");
  double marked = detail::trapezoid(s, [](const SeriesPoint& p) { return p.p * p.arrival_rate; });
  double arrived = detail::trapezoid(s, [](const SeriesPoint& p) { return p.arrival_rate; });
  if (arrived <= 0.0) throw std::invalid_argument("loss_rate: zero total arrivals");
  return std::min((marked + run.forced_drops) / arrived, 1.0);
}

// First time after which |q - q_t| stays below band for the rest of the
// run; the horizon if it never settles.
inline double settling_time(const RunRecord& run, double band = 10.0) {
  const auto& s = run.series;
  double settled_since = s.back().t;
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (std::abs(it->q - run.target_queue) >= band) break;
    settled_since = it->t;
  }
  return settled_since;
}

inline RunSummary summarize(const RunRecord& run, double capacity) {
  RunSummary out;
  std::vector<double> t, e;
  t.reserve(run.series.size());
  e.reserve(run.series.size());
  double peak = 0.0;
  for (const auto& p : run.series) {
    t.push_back(p.t);
    e.push_back(p.q - run.target_queue);
    peak = std::max(peak, p.q - run.target_queue);
  }
  out.iae = iae(t, e);
  out.utilization = utilization(run, capacity);
  out.loss_rate = loss_rate(run);
  out.overshoot = std::max(peak, 0.0);
  out.settling_time = settling_time(run);
  return out;
}

// Closed-loop run of one scenario with the given controller. Series are
// sampled at sample_period; the summary is computed from the stored series
// (plus the forced-drop tally) so it is recomputable from the record.
inline RunRecord run_scenario(const Scenario& scenario, Controller& controller,
                              NetworkParams params, SimOptions opts = {},
                              double sample_period = 0.01) {
  params.prop_delay = scenario.total_prop_delay();
  params.horizon = scenario.horizon;
  params.n_profile = scenario.n_profile;
  params.validate();

  RunRecord record;
  record.scenario = scenario.name;
  record.controller = controller.name();
  record.target_queue = scenario.target_queue;
  record.sample_period = sample_period;

  controller.reset();
  FluidSim sim(params, opts);

  long steps_per_sample = std::max(1L, std::lround(sample_period / params.dt));
  long total_steps = std::lround(scenario.horizon / params.dt);

  double p = 0.0;
  auto record_point = [&]() {
    const FluidState& st = sim.state();
    record.series.push_back({st.t, st.q, st.w, st.r, p,
                             sim.departure_rate(), sim.arrival_rate()});
  };

  for (long k = 0; k < total_steps; ++k) {
    const FluidState& st = sim.state();
    p = saturate(controller.update({st.t, st.q, sim.arrival_rate(), params.dt}));
    if (k % steps_per_sample == 0) record_point();
    sim.step(p);
  }
  record_point();

  record.forced_drops = sim.forced_drops();
  record.summary = summarize(record, params.capacity);
  return record;
}

struct SweepRow {
  double x = 0.0;
  bool ok = false;
  std::string error;
  double utilization = 0.0;
  double loss_rate = 0.0;
};

enum class SweepKind { Connections, Delay };

inline std::vector<double> default_sweep_grid(SweepKind kind) {
  std::vector<double> grid;
  if (kind == SweepKind::Connections)
    for (double n = 70; n <= 160; n += 10) grid.push_back(n);
  else
    for (double d = 0.020; d <= 0.1401; d += 0.020) grid.push_back(d);
  return grid;
}

// One run per grid point; failures are recorded and the sweep continues.
template <typename ControllerFactory>
std::vector<SweepRow> sweep(SweepKind kind, ControllerFactory make_controller,
                            const std::vector<double>& grid,
                            NetworkParams params, SimOptions opts = {}) {
  std::vector<SweepRow> rows;
  for (double x : grid) {
    Scenario s = *find_scenario("s1");
    if (kind == SweepKind::Connections)
      s.n_profile = NProfile(x);
    else
      s.bottleneck_delay = x;
    SweepRow row;
    row.x = x;
    try {
      auto controller = make_controller();
      RunRecord run = run_scenario(s, *controller, params, opts);
      row.ok = true;
      row.utilization = run.summary.utilization;
      row.loss_rate = run.summary.loss_rate;
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace aqm
