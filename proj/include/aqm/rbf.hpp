#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aqm {

// Gaussian radial basis network over the queue-tracking error, linear in
// its output weights. An optional integral gain augments the output with
// an error-integral term.
struct RbfSpec {
  std::vector<double> centers; // packets, error space
  std::vector<double> spreads; // packets
  std::vector<double> weights;
  double integral_gain = 0.0; // 0 disables the integral term

  void validate() const {
    if (centers.empty()) throw std::invalid_argument("RbfSpec: no centers");
    if (centers.size() != spreads.size() || centers.size() != weights.size())
      throw std::invalid_argument("RbfSpec: centers/spreads/weights size mismatch");
    for (double s : spreads)
      if (s <= 0) throw std::invalid_argument("RbfSpec: spreads must be > 0");
  }

  // n centers evenly spaced over [-150, 150], all spreads 40, zero weights.
  static RbfSpec evenly_spaced(int n, double lo = -150.0, double hi = 150.0,
                               double spread = 40.0) {
    if (n < 1) throw std::invalid_argument("RbfSpec: need at least one center");
    RbfSpec spec;
    for (int i = 0; i < n; ++i) {
      double c = (n == 1) ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
      spec.centers.push_back(c);
      spec.spreads.push_back(spread);
      spec.weights.push_back(0.0);
    }
    return spec;
  }
};

inline std::vector<double> rbf_basis(double e, const RbfSpec& spec) {
  if (!std::isfinite(e)) throw std::invalid_argument("rbf_basis: non-finite input");
  std::vector<double> phi(spec.centers.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double d = (e - spec.centers[i]) / spec.spreads[i];
    phi[i] = std::exp(-d * d);
  }
  return phi;
}

// Raw (pre-saturation) control signal u = w^T phi(e).
inline double rbf_control(double e, const RbfSpec& spec) {
  auto phi = rbf_basis(e, spec);
  double u = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) u += spec.weights[i] * phi[i];
  return u;
}

struct IntegralState {
  double accumulator = 0.0; // packet-seconds
  double previous_error = 0.0;
  bool has_previous = false;
};

// Accumulate the error integral one control period, clamped so the integral
// contribution never exceeds kWindupBound in magnitude.
inline void integrate_error(IntegralState& state, double e, double period,
                            double integral_gain, bool trapezoid = false) {
  if (trapezoid && state.has_previous)
    state.accumulator += 0.5 * (e + state.previous_error) * period;
  else
    state.accumulator += e * period;
  state.previous_error = e;
  state.has_previous = true;
  constexpr double kWindupBound = 2.0;
  if (integral_gain > 0.0) {
    double limit = kWindupBound / integral_gain;
    if (state.accumulator > limit) state.accumulator = limit;
    if (state.accumulator < -limit) state.accumulator = -limit;
  }
}

inline double irbf_control(double e, const RbfSpec& spec,
                           const IntegralState& state) {
  return rbf_control(e, spec) + spec.integral_gain * state.accumulator;
}

} // namespace aqm
