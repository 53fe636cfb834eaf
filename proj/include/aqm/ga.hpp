#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "aqm/pso.hpp"

namespace aqm {

struct GaConfig {
  int population = 40;
  int elite_count = 2;
  int crossover_count = 26;
  int mutation_count = 12;
  double crossover_fraction = 0.7;
  double shrink = 1.0;
  int generations = 15;
  int neuron_min = 2;
  int neuron_max = 12;
  double sigma0 = 2.0; // initial mutation std-dev, neuron units
  std::uint64_t seed = 0;

  void validate() const {
    if (elite_count <= 0 || crossover_count <= 0 || mutation_count <= 0)
      throw std::invalid_argument("GaConfig: counts must be > 0");
    if (elite_count + crossover_count + mutation_count != population)
      throw std::invalid_argument("GaConfig: elite + crossover + mutation != population");
    if (neuron_min < 1 || neuron_min > neuron_max)
      throw std::invalid_argument("GaConfig: bad neuron range");
    if (generations < 1) throw std::invalid_argument("GaConfig: generations must be >= 1");
  }
};

// Real scalar genome decoded by rounding into the neuron range.
inline int decode_neurons(double genome, const GaConfig& config) {
  int n = static_cast<int>(std::lround(genome));
  return std::clamp(n, config.neuron_min, config.neuron_max);
}

// F = 1/MSE^2, capped when the error vanishes.
inline constexpr double kMaxFitness = 1e18;

inline double fitness_from_mse(double mse) {
  if (mse <= 0.0) return kMaxFitness;
  return std::min(1.0 / (mse * mse), kMaxFitness);
}

// Rank scaling: score depends only on rank order, score(r) = 1/sqrt(r) with
// r = 1 for the best fitness. Ties broken by genome value then index.
inline std::vector<double> rank_scale(const std::vector<double>& fitness,
                                      const std::vector<double>& genomes) {
  std::size_t n = fitness.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
    if (genomes[a] != genomes[b]) return genomes[a] < genomes[b];
    return a < b;
  });
  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n; ++r)
    scores[order[r]] = 1.0 / std::sqrt(static_cast<double>(r + 1));
  return scores;
}

// Stochastic uniform sampling proportional to the scaled scores.
inline std::vector<std::size_t> select_parents(const std::vector<double>& scores,
                                               std::size_t count,
                                               std::mt19937_64& rng) {
  double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (total <= 0.0) throw std::invalid_argument("select_parents: all scores zero");
  double step = total / static_cast<double>(count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double pointer = unit(rng) * step;
  std::vector<std::size_t> parents;
  parents.reserve(count);
  double cumulative = 0.0;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < count; ++k) {
    double target = pointer + step * static_cast<double>(k);
    while (idx + 1 < scores.size() && cumulative + scores[idx] < target)
      cumulative += scores[idx++];
    parents.push_back(idx);
  }
  return parents;
}

// Arithmetic blend crossover.
inline double crossover(double a, double b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double lambda = unit(rng);
  return lambda * a + (1.0 - lambda) * b;
}

// Gaussian mutation with linearly shrinking std-dev.
inline double mutate(double genome, int generation, const GaConfig& config,
                     std::mt19937_64& rng) {
  double sigma = config.sigma0 *
                 (1.0 - config.shrink * static_cast<double>(generation) /
                            config.generations);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    genome += noise(rng);
  }
  return std::clamp(genome, static_cast<double>(config.neuron_min),
                    static_cast<double>(config.neuron_max));
}

struct GaGeneration {
  int best_n = 0;
  double best_fitness = 0.0;
};

struct GaResult {
  int best_n = 0;
  double best_fitness = 0.0;
  std::vector<GaGeneration> trace;
};

// Elitist generational GA over the hidden-layer size. fitness_of_n maps a
// decoded neuron count to F; callers may memoize it (the genome space
// decodes to few distinct counts).
inline GaResult evolve(const std::function<double(int)>& fitness_of_n,
                       const GaConfig& config) {
  config.validate();
  std::mt19937_64 rng(detail::splitmix64(config.seed ^ 0x67656e65ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> genomes(config.population);
  for (double& g : genomes)
    g = config.neuron_min + unit(rng) * (config.neuron_max - config.neuron_min);

  GaResult result;
  std::vector<double> fitness(config.population);

  for (int gen = 0; gen < config.generations; ++gen) {
    for (int i = 0; i < config.population; ++i)
      fitness[i] = fitness_of_n(decode_neurons(genomes[i], config));

    std::vector<std::size_t> order(genomes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
      if (genomes[a] != genomes[b]) return genomes[a] < genomes[b];
      return a < b;
    });

    GaGeneration g;
    g.best_n = decode_neurons(genomes[order[0]], config);
    g.best_fitness = fitness[order[0]];
    result.trace.push_back(g);

    if (gen + 1 == config.generations) break;

    std::vector<double> next;
    next.reserve(config.population);
    for (int e = 0; e < config.elite_count; ++e)
      next.push_back(genomes[order[e]]);

    auto scores = rank_scale(fitness, genomes);
    std::size_t n_parents =
        2 * static_cast<std::size_t>(config.crossover_count) +
        static_cast<std::size_t>(config.mutation_count);
    auto parents = select_parents(scores, n_parents, rng);
    std::shuffle(parents.begin(), parents.end(), rng);

    std::size_t cursor = 0;
    for (int c = 0; c < config.crossover_count; ++c) {
      double a = genomes[parents[cursor++]];
      double b = genomes[parents[cursor++]];
      next.push_back(crossover(a, b, rng));
    }
    for (int m = 0; m < config.mutation_count; ++m)
      next.push_back(mutate(genomes[parents[cursor++]], gen, config, rng));

    genomes = std::move(next);
  }

  const GaGeneration& last =
      *std::max_element(result.trace.begin(), result.trace.end(),
                        [](const GaGeneration& a, const GaGeneration& b) {
                          return a.best_fitness < b.best_fitness;
                        });
  result.best_n = last.best_n;
  result.best_fitness = last.best_fitness;
  return result;
}

} // namespace aqm
