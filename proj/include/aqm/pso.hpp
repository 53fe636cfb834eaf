#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace aqm {

struct Bounds {
  double lo;
  double hi;
};

struct PsoConfig {
  int swarm_size = 20;
  double max_velocity = 4.0;
  double alpha1 = 2.0;
  double alpha2 = 2.0;
  double inertia_start = 0.9;
  double inertia_end = 0.2;
  int max_iterations = 300;
  std::vector<Bounds> position_bounds;
  // gamma1/gamma2 are scalar per particle per iteration by default
  bool per_dimension_random = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (swarm_size < 2) throw std::invalid_argument("PsoConfig: swarm_size must be >= 2");
    if (!(inertia_start >= inertia_end && inertia_end > 0))
      throw std::invalid_argument("PsoConfig: require inertia_start >= inertia_end > 0");
    if (position_bounds.empty())
      throw std::invalid_argument("PsoConfig: empty position bounds");
    for (const auto& b : position_bounds)
      if (!(b.lo < b.hi)) throw std::invalid_argument("PsoConfig: degenerate bounds");
  }
};

// Linearly decaying inertia weight.
inline double inertia(int k, const PsoConfig& config) {
  return config.inertia_start +
         (config.inertia_end - config.inertia_start) *
             static_cast<double>(k) / config.max_iterations;
}

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_cost = std::numeric_limits<double>::infinity();
};

// v' = phi(k) v + a1 g1 (P - x) + a2 g2 (G - x), componentwise clamped.
// gamma1/gamma2 have either one entry (scalar broadcast) or one per dimension.
inline std::vector<double> velocity_update(const Particle& particle,
                                           const std::vector<double>& global_best,
                                           int k, const PsoConfig& config,
                                           const std::vector<double>& gamma1,
                                           const std::vector<double>& gamma2) {
  double phi = inertia(k, config);
  std::size_t dim = particle.position.size();
  std::vector<double> v(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    double g1 = gamma1.size() == 1 ? gamma1[0] : gamma1[d];
    double g2 = gamma2.size() == 1 ? gamma2[0] : gamma2[d];
    double next = phi * particle.velocity[d] +
                  config.alpha1 * g1 * (particle.best_position[d] - particle.position[d]) +
                  config.alpha2 * g2 * (global_best[d] - particle.position[d]);
    v[d] = std::clamp(next, -config.max_velocity, config.max_velocity);
  }
  return v;
}

// x += v, clamped to bounds; a clamped component zeroes its velocity.
inline void position_update(Particle& particle, const PsoConfig& config) {
  for (std::size_t d = 0; d < particle.position.size(); ++d) {
    double x = particle.position[d] + particle.velocity[d];
    const Bounds& b = config.position_bounds[d];
    if (x < b.lo) {
      x = b.lo;
      particle.velocity[d] = 0.0;
    } else if (x > b.hi) {
      x = b.hi;
      particle.velocity[d] = 0.0;
    }
    particle.position[d] = x;
  }
}

struct PsoResult {
  std::vector<double> best_position;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> trace; // best cost after each iteration (trace[0]: initial)
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent stream per (seed, iteration, particle): parallel and
// serial evaluation orders agree.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t iteration,
                              std::uint64_t particle) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ (iteration << 20)) ^ particle));
}

} // namespace detail

using Objective = std::function<double(const std::vector<double>&)>;

inline PsoResult pso_optimize(const Objective& objective, const PsoConfig& config) {
  config.validate();
  std::size_t dim = config.position_bounds.size();

  auto evaluate = [&](const std::vector<double>& x) {
    double c = objective(x);
    return std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
  };

  std::vector<Particle> swarm(config.swarm_size);
  std::vector<double> global_best;
  double global_cost = std::numeric_limits<double>::infinity();

  for (int i = 0; i < config.swarm_size; ++i) {
    auto rng = detail::stream(config.seed, 0, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Particle& p = swarm[i];
    p.position.resize(dim);
    p.velocity.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const Bounds& b = config.position_bounds[d];
      p.position[d] = b.lo + unit(rng) * (b.hi - b.lo);
      p.velocity[d] = (unit(rng) - 0.5) * config.max_velocity / 2.0;
    }
    p.best_position = p.position;
    p.best_cost = evaluate(p.position);
    if (p.best_cost < global_cost) {
      global_cost = p.best_cost;
      global_best = p.best_position;
    }
  }

  PsoResult result;
  result.trace.push_back(global_cost);

  for (int k = 0; k < config.max_iterations; ++k) {
    for (int i = 0; i < config.swarm_size; ++i) {
      auto rng = detail::stream(config.seed, static_cast<std::uint64_t>(k) + 1,
                                static_cast<std::uint64_t>(i));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::size_t n_draws = config.per_dimension_random ? dim : 1;
      std::vector<double> g1(n_draws), g2(n_draws);
      for (auto& g : g1) g = unit(rng);
      for (auto& g : g2) g = unit(rng);

      Particle& p = swarm[i];
      p.velocity = velocity_update(p, global_best, k, config, g1, g2);
      position_update(p, config);
      double cost = evaluate(p.position);
      if (cost < p.best_cost) {
        p.best_cost = cost;
        p.best_position = p.position;
      }
    }
    for (const Particle& p : swarm) {
      if (p.best_cost < global_cost) {
        global_cost = p.best_cost;
        global_best = p.best_position;
      }
    }
    result.trace.push_back(global_cost);
  }

  result.best_position = global_best;
  result.best_cost = global_cost;
  return result;
}

} // namespace aqm
