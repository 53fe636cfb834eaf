#include <catch_amalgamated.hpp>

#include <map>

#include "aqm/ga.hpp"

using namespace aqm;
using Catch::Approx;

TEST_CASE("fitness from MSE") {
  CHECK(fitness_from_mse(1.0) == 1.0);
  CHECK(fitness_from_mse(0.1) == Approx(100.0).epsilon(1e-12));
  CHECK(fitness_from_mse(0.01427) == Approx(4.911e3).epsilon(1e-3));
  CHECK(fitness_from_mse(0.0) == kMaxFitness);
}

TEST_CASE("rank scaling") {
  SECTION("scores depend on rank only") {
    auto s = rank_scale({100.0, 1.0, 10.0}, {4.0, 5.0, 6.0});
    CHECK(s[0] == Approx(1.0));
    CHECK(s[1] == Approx(1.0 / std::sqrt(3.0)));
    CHECK(s[2] == Approx(1.0 / std::sqrt(2.0)));
  }
  SECTION("equal fitness still yields the fixed sequence") {
    auto s = rank_scale({5.0, 5.0, 5.0}, {3.0, 1.0, 2.0});
    // ties broken by genome value: genome 1.0 ranks first
    CHECK(s[1] == Approx(1.0));
    CHECK(s[2] == Approx(1.0 / std::sqrt(2.0)));
    CHECK(s[0] == Approx(1.0 / std::sqrt(3.0)));
  }
  SECTION("single individual") {
    auto s = rank_scale({42.0}, {5.0});
    CHECK(s[0] == 1.0);
  }
}

TEST_CASE("stochastic uniform selection") {
  std::mt19937_64 rng(123);
  SECTION("single nonzero score wins everything") {
    auto parents = select_parents({0.7}, 10, rng);
    for (auto p : parents) CHECK(p == 0);
  }
  SECTION("zero scores are never selected") {
    auto parents = select_parents({1.0, 0.0}, 100, rng);
    for (auto p : parents) CHECK(p == 0);
  }
  SECTION("draw counts follow the score proportions") {
    auto parents = select_parents({2.0, 1.0, 1.0}, 4000, rng);
    std::map<std::size_t, int> counts;
    for (auto p : parents) counts[p]++;
    CHECK(counts[0] == Approx(2000).margin(100));
    CHECK(counts[1] == Approx(1000).margin(50));
    CHECK(counts[2] == Approx(1000).margin(50));
  }
  SECTION("all-zero scores rejected") {
    CHECK_THROWS_AS(select_parents({0.0, 0.0}, 2, rng), std::invalid_argument);
  }
}

TEST_CASE("arithmetic crossover") {
  std::mt19937_64 rng(5);
  SECTION("identical parents reproduce themselves") {
    CHECK(crossover(4.0, 4.0, rng) == 4.0);
  }
  SECTION("child lies between the parents") {
    for (int i = 0; i < 200; ++i) {
      double child = crossover(4.0, 8.0, rng);
      REQUIRE(child >= 4.0);
      REQUIRE(child <= 8.0);
    }
  }
}

TEST_CASE("gaussian mutation schedule") {
  GaConfig c;
  c.generations = 10;
  std::mt19937_64 rng(9);
  SECTION("fully shrunk mutation is the identity") {
    CHECK(mutate(5.3, c.generations, c, rng) == 5.3);
  }
  SECTION("mid-schedule sigma is half the initial") {
    // statistical check on the sample standard deviation
    auto sample_sigma = [&](int gen) {
      double sum = 0.0, sumsq = 0.0;
      int n = 4000;
      for (int i = 0; i < n; ++i) {
        GaConfig wide = c;
        wide.neuron_min = -1000;
        wide.neuron_max = 1000;
        double d = mutate(0.0, gen, wide, rng);
        sum += d;
        sumsq += d * d;
      }
      return std::sqrt(sumsq / n - (sum / n) * (sum / n));
    };
    CHECK(sample_sigma(0) == Approx(c.sigma0).epsilon(0.1));
    CHECK(sample_sigma(5) == Approx(c.sigma0 / 2).epsilon(0.1));
  }
  SECTION("result clamped to the neuron range") {
    GaConfig tight;
    tight.sigma0 = 100.0;
    for (int i = 0; i < 100; ++i) {
      double g = mutate(7.0, 0, tight, rng);
      REQUIRE(g >= tight.neuron_min);
      REQUIRE(g <= tight.neuron_max);
    }
  }
}

TEST_CASE("genome decoding") {
  GaConfig c;
  CHECK(decode_neurons(4.6, c) == 5);
  CHECK(decode_neurons(4.4, c) == 4);
  CHECK(decode_neurons(0.2, c) == c.neuron_min);
  CHECK(decode_neurons(99.0, c) == c.neuron_max);
}

TEST_CASE("surrogate objective finds n = 5") {
  GaConfig c;
  c.seed = 3;
  auto result = evolve([](int n) { return -double(n - 5) * double(n - 5); }, c);
  CHECK(result.best_n == 5);
}

TEST_CASE("elite fitness trace is non-decreasing") {
  GaConfig c;
  c.seed = 21;
  auto result = evolve([](int n) { return 1.0 / (1.0 + std::abs(n - 7)); }, c);
  for (std::size_t g = 1; g < result.trace.size(); ++g)
    REQUIRE(result.trace[g].best_fitness >= result.trace[g - 1].best_fitness);
}

TEST_CASE("decoded counts stay in range and evolve is deterministic") {
  GaConfig c;
  c.seed = 8;
  std::vector<int> seen_a, seen_b;
  auto run = [&](std::vector<int>& seen) {
    return evolve(
        [&](int n) {
          REQUIRE(n >= c.neuron_min);
          REQUIRE(n <= c.neuron_max);
          seen.push_back(n);
          return double(n);
        },
        c);
  };
  auto a = run(seen_a);
  auto b = run(seen_b);
  CHECK(seen_a == seen_b);
  CHECK(a.best_n == b.best_n);
}

TEST_CASE("config validation enforces offspring accounting") {
  GaConfig c;
  c.elite_count = 3; // 3 + 26 + 12 != 40
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = GaConfig{};
  CHECK(c.elite_count + c.crossover_count + c.mutation_count == c.population);
  CHECK_NOTHROW(c.validate());
}
