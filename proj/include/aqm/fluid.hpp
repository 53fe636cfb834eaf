#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqm {

// Piecewise-constant connection-count profile N(t). The value at a
// changepoint applies from that instant onward.
class NProfile {
public:
  NProfile() = default;
  explicit NProfile(double constant) { set(0.0, constant); }
  NProfile(std::initializer_list<std::pair<double, double>> steps) {
    for (const auto& [t, n] : steps) set(t, n);
  }

  void set(double t, double n) {
    if (n < 1.0) throw std::invalid_argument("NProfile: N must be >= 1");
    steps_[t] = n;
  }

  double at(double t) const {
    if (steps_.empty()) throw std::logic_error("NProfile: empty profile");
    auto it = steps_.upper_bound(t);
    if (it == steps_.begin()) return it->second;
    return std::prev(it)->second;
  }

  const std::map<double, double>& steps() const { return steps_; }

private:
  std::map<double, double> steps_;
};

struct NetworkParams {
  double capacity = 1250.0;    // packets/second
  double prop_delay = 0.06;    // seconds
  double buffer = 300.0;       // packets
  double packet_size = 1000.0; // bytes, unit conversion only
  double horizon = 100.0;      // seconds
  double dt = 1e-3;            // integration step, seconds
  NProfile n_profile{100.0};

  void validate() const {
    if (capacity <= 0) throw std::invalid_argument("capacity must be > 0");
    if (prop_delay < 0) throw std::invalid_argument("prop_delay must be >= 0");
    if (buffer <= 0) throw std::invalid_argument("buffer must be > 0");
    if (dt <= 0 || dt > horizon)
      throw std::invalid_argument("dt must satisfy 0 < dt <= horizon");
  }
};

inline double rtt(double q, const NetworkParams& params) {
  if (q < 0) throw std::invalid_argument("rtt: q must be >= 0");
  return q / params.capacity + params.prop_delay;
}

// Input saturation: clamps the raw control signal to a probability.
inline double saturate(double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("saturate: non-finite input");
  if (u >= 1.0) return 1.0;
  if (u < 0.0) return 0.0;
  return u;
}

// dW/dt = 1/R - W * W_d / (2 * R_d) * p
inline double window_derivative(double w, double r, double w_d, double r_d,
                                double p) {
  return 1.0 / r - (w * w_d) / (2.0 * r_d) * p;
}

// dq/dt = -C + N*W/R, with the empty-queue branch unable to drain further.
inline double queue_derivative(double q, double w, double r, double n,
                               double capacity) {
  double rate = -capacity + n * w / r;
  if (q > 0.0) return rate;
  return std::max(0.0, rate);
}

struct HistorySample {
  double t;
  double w;
  double r;
  double p; // control applied from t onward
};

// Ordered (t, W, R, p) samples serving the delayed terms W(t-R), R(t-R).
class HistoryBuffer {
public:
  void append(const HistorySample& s) {
    if (!samples_.empty() && s.t <= samples_.back().t)
      throw std::invalid_argument("HistoryBuffer: sample times must be strictly increasing");
    samples_.push_back(s);
  }

  // Linear interpolation between bracketing samples. Queries before the
  // first sample return the initial condition.
  HistorySample lookup(double tau) const {
    if (samples_.empty()) throw std::logic_error("HistoryBuffer: empty");
    if (tau > samples_.back().t + 1e-12)
      throw std::invalid_argument("HistoryBuffer: query beyond current time");
    if (tau <= samples_.front().t) return samples_.front();
    auto it = std::lower_bound(samples_.begin(), samples_.end(), tau,
                               [](const HistorySample& s, double v) { return s.t < v; });
    if (it == samples_.end()) return samples_.back();
    if (it->t == tau) return *it;
    const HistorySample& hi = *it;
    const HistorySample& lo = *std::prev(it);
    double f = (tau - lo.t) / (hi.t - lo.t);
    return {tau, lo.w + f * (hi.w - lo.w), lo.r + f * (hi.r - lo.r),
            lo.p + f * (hi.p - lo.p)};
  }

  void set_latest_control(double p) {
    if (samples_.empty()) throw std::logic_error("HistoryBuffer: empty");
    samples_.back().p = p;
  }

  void evict_before(double t) {
    while (samples_.size() > 2 && samples_[1].t < t) samples_.pop_front();
  }

  std::size_t size() const { return samples_.size(); }

private:
  std::deque<HistorySample> samples_;
};

struct FluidState {
  double t = 0.0;
  double w = 1.0; // mean TCP window, packets
  double q = 0.0; // queue, packets
  double r = 0.0; // round-trip time, seconds (derived)
};

struct SimOptions {
  double w0 = 1.0;
  double q0 = 0.0;
  // Apply p(t - R) instead of p(t) in the window equation.
  bool delayed_drop_probability = false;
};

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-step explicit Euler integration of the coupled window/queue
// equations, with queue clamping at the buffer and a forced-drop tally
// for the clipped inflow.
class FluidSim {
public:
  explicit FluidSim(NetworkParams params, SimOptions opts = {})
      : params_(std::move(params)), opts_(opts) {
    params_.validate();
    state_.t = 0.0;
    state_.w = opts_.w0;
    state_.q = opts_.q0;
    state_.r = rtt(state_.q, params_);
    history_.append({0.0, state_.w, state_.r, 0.0});
  }

  const FluidState& state() const { return state_; }
  const NetworkParams& params() const { return params_; }
  const HistoryBuffer& history() const { return history_; }
  double forced_drops() const { return forced_drops_; }

  double connections() const { return params_.n_profile.at(state_.t); }
  double arrival_rate() const { return connections() * state_.w / state_.r; }
  double departure_rate() const {
    if (state_.q > 0.0) return params_.capacity;
    return std::min(arrival_rate(), params_.capacity);
  }

  // Advance one dt with the given (pre-saturation) control signal.
  void step(double u) {
    double p = saturate(u);
    history_.set_latest_control(p);

    double n = connections();
    HistorySample delayed = history_.lookup(state_.t - state_.r);
    double p_eff = opts_.delayed_drop_probability ? delayed.p : p;

    double dw = window_derivative(state_.w, state_.r, delayed.w, delayed.r, p_eff);
    double dq = queue_derivative(state_.q, state_.w, state_.r, n, params_.capacity);
    if (!std::isfinite(dw) || !std::isfinite(dq))
      throw SimulationError("non-finite derivative at t=" + std::to_string(state_.t) +
                            " (W=" + std::to_string(state_.w) +
                            ", q=" + std::to_string(state_.q) + ")");

    state_.w = std::max(state_.w + dw * params_.dt, kMinWindow);
    double q_next = state_.q + dq * params_.dt;
    if (q_next > params_.buffer) {
      forced_drops_ += q_next - params_.buffer;
      q_next = params_.buffer;
    }
    state_.q = std::max(q_next, 0.0);
    state_.t += params_.dt;
    state_.r = rtt(state_.q, params_);

    history_.append({state_.t, state_.w, state_.r, p});
    history_.evict_before(state_.t - retention_window());
  }

private:
  static constexpr double kMinWindow = 1e-6;

  double retention_window() const {
    return params_.buffer / params_.capacity + params_.prop_delay + 1.0;
  }

  NetworkParams params_;
  SimOptions opts_;
  FluidState state_;
  HistoryBuffer history_;
  double forced_drops_ = 0.0;
};

} // namespace aqm
