#pragma once

#include <map>

#include "aqm/controllers.hpp"
#include "aqm/ga.hpp"
#include "aqm/pso.hpp"
#include "aqm/scenario.hpp"

namespace aqm {

struct TuningSetup {
  Scenario scenario;          // objective scenario (horizon may be shortened)
  NetworkParams params;
  SimOptions opts;
  bool tune_integral_gain = false;
  double control_period = 1.0 / 160.0;
  Bounds weight_bounds{-1.0, 1.0};
  Bounds integral_gain_bounds{0.0, 0.01};
};

inline RbfSpec spec_from_position(const std::vector<double>& position,
                                  const RbfSpec& geometry,
                                  bool tune_integral_gain) {
  RbfSpec spec = geometry;
  std::size_t n = geometry.centers.size();
  for (std::size_t i = 0; i < n; ++i) spec.weights[i] = position[i];
  spec.integral_gain = tune_integral_gain ? position[n] : 0.0;
  return spec;
}

// IAE of a closed-loop run with the candidate weights; non-finite runs
// score +infinity so the swarm keeps moving.
inline Objective make_iae_objective(const RbfSpec& geometry,
                                    const TuningSetup& setup) {
  return [geometry, setup](const std::vector<double>& position) {
    RbfSpec spec = spec_from_position(position, geometry, setup.tune_integral_gain);
    RbfController controller(spec, setup.scenario.target_queue, setup.control_period);
    try {
      RunRecord run = run_scenario(setup.scenario, controller, setup.params, setup.opts);
      return run.summary.iae;
    } catch (const SimulationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

inline std::vector<Bounds> weight_position_bounds(std::size_t n_weights,
                                                  const TuningSetup& setup) {
  std::vector<Bounds> bounds(n_weights, setup.weight_bounds);
  if (setup.tune_integral_gain) bounds.push_back(setup.integral_gain_bounds);
  return bounds;
}

struct TunedController {
  RbfSpec spec;
  double iae = 0.0;
  std::vector<double> trace;
};

// PSO weight tuning for a fixed hidden-layer geometry.
inline TunedController tune_weights(const RbfSpec& geometry, PsoConfig pso,
                                    const TuningSetup& setup) {
  pso.position_bounds = weight_position_bounds(geometry.centers.size(), setup);
  PsoResult result = pso_optimize(make_iae_objective(geometry, setup), pso);
  TunedController out;
  out.spec = spec_from_position(result.best_position, geometry, setup.tune_integral_gain);
  out.iae = result.best_cost;
  out.trace = result.trace;
  return out;
}

// Mean squared tracking error of the tuned controller, the GA's raw score.
inline double tuned_mse(const RbfSpec& spec, const TuningSetup& setup) {
  RbfController controller(spec, setup.scenario.target_queue, setup.control_period);
  RunRecord run = run_scenario(setup.scenario, controller, setup.params, setup.opts);
  double sum = 0.0;
  for (const auto& p : run.series) {
    double e = p.q - setup.scenario.target_queue;
    sum += e * e;
  }
  return sum / static_cast<double>(run.series.size());
}

struct StructureSearchResult {
  GaResult ga;
  std::map<int, TunedController> tuned; // per evaluated neuron count
};

// Nested GA over the neuron count with an inner PSO per candidate geometry.
// Fitness is memoized by decoded count; the inner PSO seed derives from the
// master seed and the count, so the cache is exact.
inline StructureSearchResult structure_search(GaConfig ga, PsoConfig inner_pso,
                                              const TuningSetup& setup) {
  StructureSearchResult result;
  auto fitness_of_n = [&](int n) {
    auto it = result.tuned.find(n);
    if (it == result.tuned.end()) {
      PsoConfig pso = inner_pso;
      pso.seed = detail::splitmix64(ga.seed ^ static_cast<std::uint64_t>(n));
      RbfSpec geometry = RbfSpec::evenly_spaced(n);
      it = result.tuned.emplace(n, tune_weights(geometry, pso, setup)).first;
    }
    double mse;
    try {
      mse = tuned_mse(it->second.spec, setup);
    } catch (const SimulationError&) {
      return 0.0;
    }
    return fitness_from_mse(mse);
  };
  result.ga = evolve(fitness_of_n, ga);
  return result;
}

} // namespace aqm
