#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "aqm/fluid.hpp"
#include "aqm/rbf.hpp"

namespace aqm {

struct Observation {
  double t;            // seconds
  double q;            // packets
  double arrival_rate; // packets/second
  double dt;           // integration step
};

// Queue controller: observes the queue each step and emits a drop/mark
// probability in [0,1]. Instances are bound to one simulation run.
class Controller {
public:
  virtual ~Controller() = default;
  virtual double update(const Observation& obs) = 0;
  virtual void reset() = 0;
  virtual std::string name() const = 0;
};

// Holds its output between samples of a fixed control period.
class SampledController : public Controller {
public:
  explicit SampledController(double period) : period_(period) {
    if (period <= 0) throw std::invalid_argument("control period must be > 0");
  }

  double update(const Observation& obs) final {
    if (obs.t + 1e-12 >= next_sample_) {
      held_ = sample(obs);
      next_sample_ += period_;
    }
    return held_;
  }

  void reset() override {
    next_sample_ = 0.0;
    held_ = 0.0;
  }

  double period() const { return period_; }

protected:
  virtual double sample(const Observation& obs) = 0;

private:
  double period_;
  double next_sample_ = 0.0;
  double held_ = 0.0;
};

// Fluid Drop Tail: no early marking, unit drop only at a full buffer
// (overflow itself is booked by the simulator's forced-drop tally).
class DropTailController final : public Controller {
public:
  explicit DropTailController(double buffer) : buffer_(buffer) {}
  double update(const Observation& obs) override {
    return obs.q >= buffer_ ? 1.0 : 0.0;
  }
  void reset() override {}
  std::string name() const override { return "droptail"; }

private:
  double buffer_;
};

struct PiParams {
  double a = 1.822e-5;
  double b = 1.816e-5;
  double sample_period = 1.0 / 160.0;
  double target_queue = 150.0;
  // The published gains act on byte-denominated queue error (the ns-2 PI
  // convention); applied to raw packet counts they are too weak to reach
  // this plant's equilibrium drop probability within the run horizon.
  double error_scale = 100.0;
};

// Incremental PI law p_k = sat(p_{k-1} + a e_k - b e_{k-1}), e = q - q_t.
inline double pi_control(double e_k, double e_km1, double p_km1,
                         const PiParams& params) {
  return saturate(p_km1 + params.a * e_k - params.b * e_km1);
}

class PiController final : public SampledController {
public:
  explicit PiController(PiParams params = {})
      : SampledController(params.sample_period), params_(params) {
    if (!(params.a > params.b && params.b > 0))
      throw std::invalid_argument("PiParams: require a > b > 0");
  }

  void reset() override {
    SampledController::reset();
    p_prev_ = 0.0;
    e_prev_ = 0.0;
  }
  std::string name() const override { return "pi"; }

protected:
  double sample(const Observation& obs) override {
    double e = (obs.q - params_.target_queue) * params_.error_scale;
    p_prev_ = pi_control(e, e_prev_, p_prev_, params_);
    e_prev_ = e;
    return p_prev_;
  }

private:
  PiParams params_;
  double p_prev_ = 0.0;
  double e_prev_ = 0.0;
};

struct RemParams {
  double gamma = 0.001;
  double phi = 1.001;
  double alpha = 0.1;  // queue-term gain; 0 gives the rate-only price
  double q_ref = 0.0;  // REM runs target-free by default
  double capacity = 1250.0;
};

// Price-based exponential marking: the price integrates queue and rate
// mismatch, the mark probability is 1 - phi^(-price).
class RemController final : public Controller {
public:
  explicit RemController(RemParams params = {}) : params_(params) {
    if (params.phi <= 1.0) throw std::invalid_argument("RemParams: phi must be > 1");
  }

  double update(const Observation& obs) override {
    double mismatch = params_.alpha * (obs.q - params_.q_ref) +
                      obs.arrival_rate - params_.capacity;
    price_ = std::max(0.0, price_ + params_.gamma * mismatch);
    return 1.0 - std::pow(params_.phi, -price_);
  }

  void reset() override { price_ = 0.0; }
  std::string name() const override { return "rem"; }
  double price() const { return price_; }

private:
  RemParams params_;
  double price_ = 0.0;
};

struct AredParams {
  double min_th = 100.0;
  double max_th = 215.0;
  double capacity = 1250.0;
  double target_queue = 150.0;
  double adapt_interval = 0.5;
  double increment = 0.01;
  double decrease_factor = 0.9;
  double max_p_min = 0.01;
  double max_p_max = 0.5;
};

// Gentle RED ramp over an EWMA queue average, with AIMD adaptation of
// max_p every adapt_interval. The per-packet EWMA weight w_q = 1-exp(-1/C)
// is applied per expected arrival, so the per-tick weight is
// 1 - (1-w_q)^(arrival_rate*dt) = 1 - exp(-arrival_rate*dt/C).
class AredController final : public Controller {
public:
  explicit AredController(AredParams params = {}) : params_(params) {
    if (!(params.min_th > 0 && params.min_th < params.max_th))
      throw std::invalid_argument("AredParams: require 0 < min_th < max_th");
  }

  double update(const Observation& obs) override {
    if (!initialized_) {
      avg_ = obs.q;
      initialized_ = true;
    }
    double w_eff = 1.0 - std::exp(-obs.arrival_rate * obs.dt / params_.capacity);
    avg_ = (1.0 - w_eff) * avg_ + w_eff * obs.q;

    adapt_timer_ += obs.dt;
    if (adapt_timer_ + 1e-12 >= params_.adapt_interval) {
      adapt_timer_ = 0.0;
      if (avg_ > params_.target_queue)
        max_p_ += params_.increment;
      else if (avg_ < params_.target_queue)
        max_p_ *= params_.decrease_factor;
      max_p_ = std::clamp(max_p_, params_.max_p_min, params_.max_p_max);
    }
    return mark_probability(avg_, max_p_, params_);
  }

  static double mark_probability(double avg, double max_p, const AredParams& params) {
    if (avg < params.min_th) return 0.0;
    if (avg < params.max_th)
      return max_p * (avg - params.min_th) / (params.max_th - params.min_th);
    // gentle region: ramp from max_p at max_th to 1 at 2*max_th
    double p = max_p + (1.0 - max_p) * (avg - params.max_th) / params.max_th;
    return std::min(p, 1.0);
  }

  void reset() override {
    avg_ = 0.0;
    initialized_ = false;
    max_p_ = 0.1;
    adapt_timer_ = 0.0;
  }

  std::string name() const override { return "ared"; }
  double average() const { return avg_; }
  double max_p() const { return max_p_; }

private:
  AredParams params_;
  double avg_ = 0.0;
  bool initialized_ = false;
  double max_p_ = 0.1;
  double adapt_timer_ = 0.0;
};

// RBF / I-RBF controller: e = q - q_t each control period, saturated
// network output as the drop probability.
class RbfController final : public SampledController {
public:
  RbfController(RbfSpec spec, double target_queue,
                double period = 1.0 / 160.0, bool trapezoid = false)
      : SampledController(period), spec_(std::move(spec)),
        target_queue_(target_queue), trapezoid_(trapezoid) {
    spec_.validate();
    if (target_queue <= 0)
      throw std::invalid_argument("RbfController: target queue must be > 0");
  }

  void reset() override {
    SampledController::reset();
    integral_ = IntegralState{};
  }

  std::string name() const override {
    return spec_.integral_gain != 0.0 ? "irbf" : "rbf";
  }

  const RbfSpec& spec() const { return spec_; }

protected:
  double sample(const Observation& obs) override {
    double e = obs.q - target_queue_;
    if (spec_.integral_gain != 0.0)
      integrate_error(integral_, e, period(), spec_.integral_gain, trapezoid_);
    return saturate(irbf_control(e, spec_, integral_));
  }

private:
  RbfSpec spec_;
  double target_queue_;
  bool trapezoid_;
  IntegralState integral_;
};

} // namespace aqm
