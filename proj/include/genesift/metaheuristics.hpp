#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "genesift/dataset.hpp"
#include "genesift/rng.hpp"

namespace genesift {

enum class Sex : std::uint8_t { Male, Female };

// One search individual. The position lives in the unit hypercube; the mask
// actually scored is binarize(position), kept in sync after mutation. Sex,
// clan and age only matter to the elephant algorithm.
struct Agent {
  std::vector<double> position;
  double fitness = 0.0;
  bool evaluated = false;
  Sex sex = Sex::Female;
  int clan_id = 0;
  int age = 0;
};

struct FireflyParams {
  std::size_t population = 20;
  std::size_t iterations = 20;
  double gamma_absorption = 0.001;  // light absorption coefficient
  double beta_min = 0.33;           // attractiveness floor at large distance
  double beta_zero = 1.0;           // attractiveness at distance zero
  double alpha_step = 0.5;          // random walk scale
  double chaotic_coefficient = 4.0;
  double mutation_prob = 0.01;
  std::size_t report_frequency = 20;
  std::uint64_t seed = 1;
};

struct ElephantParams {
  std::size_t population = 20;
  std::size_t iterations = 20;
  std::size_t n_clans = 2;
  double male_fraction = 0.2;
  double female_visual_radius = 0.0;  // <= 0 resolves to 0.1 * sqrt(d)
  double male_visual_radius = 0.0;    // <= 0 resolves to 0.3 * sqrt(d)
  int max_age = 10;
  double chaotic_coefficient = 4.0;
  double mutation_prob = 0.01;
  std::size_t report_frequency = 20;
  std::uint64_t seed = 1;
};

struct HistoryPoint {
  std::size_t iteration = 0;
  double best_fitness = 0.0;
  std::size_t best_popcount = 0;
};

struct SearchResult {
  FeatureMask best_mask;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<HistoryPoint> history;
  std::size_t evaluations = 0;
};

// Best-ever mask across a run; makes best-so-far fitness monotone.
struct Archive {
  FeatureMask best_mask;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;

  void offer(const FeatureMask& mask, double fitness) {
    if (fitness > best_fitness) {
      best_fitness = fitness;
      best_mask = mask;
    }
  }
};

using ObjectiveFn = std::function<double(const FeatureMask&)>;

enum class SearchAlgorithm { Firefly, Elephant };

// x -> r * x * (1 - x); stays in [0,1] for r <= 4.
double logistic_map(double x, double r);

// One logistic-map stream per agent, seeded away from the map's fixed points,
// iterated d times to fill the coordinates.
std::vector<Agent> chaotic_init(std::size_t pop, std::size_t d, double r, std::uint64_t seed);

// bit i = position[i] > threshold; an all-zero result gets its largest
// coordinate's bit set instead.
FeatureMask binarize(const std::vector<double>& position, double threshold = 0.5);

// Independent per-bit flips; an all-zero result gets one uniform random bit.
FeatureMask bit_flip_mutate(const FeatureMask& mask, double p, Rng& rng);

// beta_min + (beta_zero - beta_min) * exp(-gamma * r^2).
double attractiveness(double distance, const FireflyParams& params);

// Visual-range contest phase: for every pair closer than the smaller of the
// two visual radii, the higher-fitness agent stays and the other is
// re-placed uniformly at random from its own stream (ties keep the lower
// index). rngs holds one stream per agent.
void visual_range_prune(std::vector<Agent>& pop, double female_radius, double male_radius,
                        std::vector<Rng>& rngs);

// One generation. `iteration` keys the per-agent random substreams (so
// replays are exact); `jobs` bounds the parallel fitness evaluation fan-out
// and never changes the result.
void firefly_step(std::vector<Agent>& pop, const FireflyParams& params, const ObjectiveFn& objective,
                  std::size_t iteration, Archive& archive, int jobs = 1);
void elephant_step(std::vector<Agent>& pop, const ElephantParams& params, const ObjectiveFn& objective,
                   std::size_t iteration, Archive& archive, int jobs = 1);

SearchResult run_search(const FireflyParams& params, const ObjectiveFn& objective, std::size_t d,
                        int jobs = 1);
SearchResult run_search(const ElephantParams& params, const ObjectiveFn& objective, std::size_t d,
                        int jobs = 1);

}  // namespace genesift
