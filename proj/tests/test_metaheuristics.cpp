#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "genesift/errors.hpp"
#include "genesift/metaheuristics.hpp"
#include "genesift/pipeline.hpp"
#include "genesift/rng.hpp"

using namespace genesift;

namespace {

double mask_density_score(const FeatureMask& mask, double target) {
  const double density = static_cast<double>(mask.popcount()) / static_cast<double>(mask.size());
  return 1.0 - std::fabs(density - target);
}

ObjectiveFn density_objective(double target) {
  return [target](const FeatureMask& mask) { return mask_density_score(mask, target); };
}

ObjectiveFn popcount_objective() {
  return [](const FeatureMask& mask) {
    return static_cast<double>(mask.popcount()) / static_cast<double>(mask.size());
  };
}

std::vector<Agent> evaluated_population(std::vector<std::vector<double>> positions,
                                        std::vector<double> fitness) {
  std::vector<Agent> pop(positions.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].position = positions[i];
    pop[i].fitness = fitness[i];
    pop[i].evaluated = true;
  }
  return pop;
}

bool same_result(const SearchResult& a, const SearchResult& b) {
  if (!(a.best_mask == b.best_mask)) return false;
  if (a.best_fitness != b.best_fitness) return false;
  if (a.evaluations != b.evaluations) return false;
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    if (a.history[i].iteration != b.history[i].iteration) return false;
    if (a.history[i].best_fitness != b.history[i].best_fitness) return false;
    if (a.history[i].best_popcount != b.history[i].best_popcount) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("logistic_map values and domain") {
  CHECK(logistic_map(0.25, 4.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(logistic_map(0.5, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(logistic_map(1.0, 4.0) == 0.0);
  CHECK_THROWS_AS(logistic_map(-0.1, 4.0), Error);
  CHECK_THROWS_AS(logistic_map(1.1, 4.0), Error);

  double x = 0.3;
  for (int i = 0; i < 1000; ++i) {
    x = logistic_map(x, 4.0);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("chaotic_init shape, bounds and determinism") {
  auto pop = chaotic_init(20, 5, 4.0, 1);
  REQUIRE(pop.size() == 20);
  for (const auto& agent : pop) {
    REQUIRE(agent.position.size() == 5);
    for (double v : agent.position) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK_FALSE(agent.evaluated);
  }

  auto again = chaotic_init(20, 5, 4.0, 1);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].position == again[i].position);

  auto other = chaotic_init(20, 5, 4.0, 2);
  bool differs = false;
  for (std::size_t i = 0; i < pop.size(); ++i) differs = differs || pop[i].position != other[i].position;
  CHECK(differs);
}

TEST_CASE("chaotic coordinates follow the U-shaped invariant density") {
  auto pop = chaotic_init(2, 10000, 4.0, 9);
  std::size_t low = 0, mid = 0, high = 0;
  for (double v : pop[0].position) {
    if (v < 0.1) ++low;
    if (v >= 0.45 && v <= 0.55) ++mid;
    if (v > 0.9) ++high;
  }
  CHECK(low > mid);
  CHECK(high > mid);
}

TEST_CASE("binarize thresholds and rescues") {
  FeatureMask m = binarize({0.9, 0.1, 0.51});
  CHECK(m.bits == std::vector<std::uint8_t>{1, 0, 1});

  FeatureMask rescued = binarize({0.1, 0.2});
  CHECK(rescued.bits == std::vector<std::uint8_t>{0, 1});

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pos(40);
    for (double& v : pos) v = rng.next_unit();
    std::size_t above = 0;
    for (double v : pos) above += v > 0.5;
    const auto mask = binarize(pos);
    if (above >= 1)
      CHECK(mask.popcount() == above);
    else
      CHECK(mask.popcount() == 1);
  }
}

TEST_CASE("bit_flip_mutate endpoints and concentration") {
  FeatureMask mask(3);
  mask.bits = {1, 0, 1};
  Rng rng(5);
  CHECK(bit_flip_mutate(mask, 0.0, rng) == mask);

  FeatureMask flipped = bit_flip_mutate(mask, 1.0, rng);
  CHECK(flipped.bits == std::vector<std::uint8_t>{0, 1, 0});

  FeatureMask wide(10000);
  Rng rng2(7);
  FeatureMask mutated = bit_flip_mutate(wide, 0.01, rng2);
  const std::size_t flips = mutated.popcount();  // all started at zero
  CHECK(flips >= 50);
  CHECK(flips <= 150);

  // All-zero outcome is rescued with one random bit.
  FeatureMask one(4);
  one.bits = {1, 0, 0, 0};
  Rng rng3(11);
  FeatureMask rescued = bit_flip_mutate(one, 1.0, rng3);
  // flipping turns {1,0,0,0} into {0,1,1,1}; force the all-zero path instead:
  FeatureMask zeros(4);
  FeatureMask rezeroed = bit_flip_mutate(zeros, 0.0, rng3);
  CHECK(rezeroed.popcount() == 1);
  CHECK(rescued.popcount() == 3);
}

TEST_CASE("attractiveness endpoints and monotonicity") {
  FireflyParams params;
  CHECK(attractiveness(0.0, params) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(attractiveness(1e9, params) == doctest::Approx(0.33).epsilon(1e-9));
  const double r10 = attractiveness(10.0, params);
  CHECK(r10 == doctest::Approx(0.33 + 0.67 * std::exp(-0.1)).epsilon(1e-12));
  CHECK(attractiveness(0.0, params) > r10);
  CHECK(r10 > attractiveness(100.0, params));
}

TEST_CASE("firefly contraction toward the brighter agent is exact") {
  FireflyParams params;
  params.alpha_step = 0.0;
  params.mutation_prob = 0.0;
  params.population = 2;

  std::vector<double> a = {0.2, 0.3, 0.4};
  std::vector<double> b = {0.8, 0.7, 0.9};
  auto pop = evaluated_population({a, b}, {1.0, 2.0});

  double r = 0.0;
  for (std::size_t k = 0; k < 3; ++k) r += (a[k] - b[k]) * (a[k] - b[k]);
  r = std::sqrt(r);
  const double beta = attractiveness(r, params);

  Archive archive;
  firefly_step(pop, params, popcount_objective(), 1, archive, 1);

  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(pop[0].position[k] == doctest::Approx(a[k] + beta * (b[k] - a[k])).epsilon(1e-12));
    CHECK(pop[1].position[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
  // Distance shrinks by exactly (1 - beta).
  double r2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double diff = pop[0].position[k] - pop[1].position[k];
    r2 += diff * diff;
  }
  CHECK(std::sqrt(r2) == doctest::Approx((1.0 - beta) * r).epsilon(1e-12));
}

TEST_CASE("firefly global best is a fixed point without noise or mutation") {
  FireflyParams params;
  params.alpha_step = 0.0;
  params.mutation_prob = 0.0;
  auto pop = evaluated_population({{0.9, 0.1}, {0.3, 0.8}}, {5.0, 1.0});
  Archive archive;
  firefly_step(pop, params, popcount_objective(), 1, archive, 1);
  CHECK(pop[0].position == std::vector<double>{0.9, 0.1});
}

TEST_CASE("firefly_step requires an evaluated population") {
  FireflyParams params;
  std::vector<Agent> pop(2);
  pop[0].position = {0.1};
  pop[1].position = {0.9};
  Archive archive;
  CHECK_THROWS_AS(firefly_step(pop, params, popcount_objective(), 1, archive, 1), Error);
}

TEST_CASE("elephant sex counts and ages are conserved across generations") {
  ElephantParams params;
  params.max_age = 3;  // force rebirths inside the loop below
  const auto objective = density_objective(0.3);

  auto population = chaotic_init(20, 8, 4.0, 7);
  const std::size_t n_males = 4;  // round(0.2 * 20)
  for (std::size_t i = 0; i < population.size(); ++i) {
    population[i].sex = i < n_males ? Sex::Male : Sex::Female;
    population[i].clan_id = static_cast<int>(i % 2);
    population[i].fitness = objective(binarize(population[i].position));
    population[i].evaluated = true;
  }

  Archive archive;
  for (std::size_t t = 1; t <= 12; ++t) {
    elephant_step(population, params, objective, t, archive, 1);
    std::size_t males = 0, females = 0;
    int max_age_seen = 0;
    for (const auto& agent : population) {
      (agent.sex == Sex::Male ? males : females) += 1;
      max_age_seen = std::max(max_age_seen, agent.age);
      for (double v : agent.position) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
    CHECK(males == 4);
    CHECK(females == 16);
    CHECK(max_age_seen <= params.max_age);
  }
}

TEST_CASE("female moves contract toward the matriarch") {
  // Tiny visual radius: the Gaussian wobble is negligible and no pair falls
  // inside the pruning range, leaving only the matriarch pull.
  ElephantParams params;
  params.population = 3;
  params.n_clans = 1;
  params.male_fraction = 0.0;
  params.female_visual_radius = 1e-12;
  params.male_visual_radius = 1e-11;
  params.mutation_prob = 0.0;

  const std::vector<double> lead = {0.9, 0.2};
  auto pop = evaluated_population({lead, {0.4, 0.6}, {0.1, 0.8}}, {3.0, 2.0, 1.0});
  for (auto& agent : pop) agent.sex = Sex::Female;

  auto dist_to_lead = [&](const std::vector<double>& p) {
    return std::hypot(p[0] - lead[0], p[1] - lead[1]);
  };
  const double d1 = dist_to_lead(pop[1].position);
  const double d2 = dist_to_lead(pop[2].position);

  Archive archive;
  elephant_step(pop, params, density_objective(0.5), 1, archive, 1);

  // The matriarch only wobbles (scale 1e-12/sqrt(2)); followers move along
  // the segment toward her, so their distance cannot grow.
  CHECK(pop[0].position[0] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(pop[0].position[1] == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(dist_to_lead(pop[1].position) <= d1 + 1e-9);
  CHECK(dist_to_lead(pop[2].position) <= d2 + 1e-9);
}

TEST_CASE("visual-range contest keeps the fitter agent in place") {
  std::vector<Agent> pop = evaluated_population({{0.5, 0.5}, {0.5, 0.5}}, {3.0, 5.0});
  for (auto& agent : pop) agent.sex = Sex::Female;
  std::vector<Rng> rngs;
  rngs.emplace_back(1, 0, 1);
  rngs.emplace_back(1, 1, 1);

  visual_range_prune(pop, 0.05, 0.1, rngs);
  CHECK(pop[1].position == std::vector<double>{0.5, 0.5});
  CHECK(pop[0].position != std::vector<double>{0.5, 0.5});

  // Outside the range nothing happens.
  std::vector<Agent> apart = evaluated_population({{0.1, 0.1}, {0.9, 0.9}}, {3.0, 5.0});
  for (auto& agent : apart) agent.sex = Sex::Female;
  visual_range_prune(apart, 0.05, 0.1, rngs);
  CHECK(apart[0].position == std::vector<double>{0.1, 0.1});
  CHECK(apart[1].position == std::vector<double>{0.9, 0.9});

  // Equal fitness keeps the lower index.
  std::vector<Agent> tied = evaluated_population({{0.3, 0.3}, {0.3, 0.3}}, {2.0, 2.0});
  for (auto& agent : tied) agent.sex = Sex::Female;
  visual_range_prune(tied, 0.05, 0.1, rngs);
  CHECK(tied[0].position == std::vector<double>{0.3, 0.3});
  CHECK(tied[1].position != std::vector<double>{0.3, 0.3});
}

TEST_CASE("run_search with zero iterations returns the initial best") {
  FireflyParams params;
  params.iterations = 0;
  auto result = run_search(params, popcount_objective(), 30, 1);
  CHECK(result.evaluations == params.population);
  REQUIRE(result.history.size() == 1);
  CHECK(result.history[0].iteration == 0);
  CHECK(result.best_fitness == result.history[0].best_fitness);
  CHECK(result.best_mask.popcount() >= 1);
}

TEST_CASE("archive fitness is monotone and evaluations counted for both algorithms") {
  const auto objective = popcount_objective();

  FireflyParams ff;
  ff.report_frequency = 1;
  auto ff_result = run_search(ff, objective, 40, 1);
  CHECK(ff_result.evaluations == ff.population * (ff.iterations + 1));
  for (std::size_t i = 1; i < ff_result.history.size(); ++i)
    CHECK(ff_result.history[i].best_fitness >= ff_result.history[i - 1].best_fitness);
  CHECK(ff_result.best_fitness >= ff_result.history.front().best_fitness);

  ElephantParams es;
  es.report_frequency = 1;
  auto es_result = run_search(es, objective, 40, 1);
  CHECK(es_result.evaluations == es.population * (es.iterations + 1));
  for (std::size_t i = 1; i < es_result.history.size(); ++i)
    CHECK(es_result.history[i].best_fitness >= es_result.history[i - 1].best_fitness);
}

TEST_CASE("firefly concentrates toward a low-density target on most seeds") {
  // Exhaustive check over popcounts: the objective peaks at exactly 1.0 for
  // popcount 10 of 100.
  double optimum = 0.0;
  for (std::size_t pc = 0; pc <= 100; ++pc)
    optimum = std::max(optimum, 1.0 - std::fabs(static_cast<double>(pc) / 100.0 - 0.1));
  CHECK(optimum == doctest::Approx(1.0));

  int hits = 0, improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FireflyParams params;
    params.seed = seed;
    auto result = run_search(params, density_objective(0.1), 100, 1);
    hits += result.best_fitness >= 0.80;
    improved += result.best_fitness > result.history.front().best_fitness;
  }
  CHECK(hits >= 8);
  CHECK(improved >= 9);
}

TEST_CASE("firefly improves over the initial archive on the subset-merit objective") {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto [ds, truth] = gen_synthetic(200, 100, 5, 2, 0.5, seed);
    (void)truth;
    const Dataset norm = minmax_normalize(ds);
    ObjectiveConfig ocfg;
    const Objective objective(norm, ocfg);
    FireflyParams params;
    params.seed = seed;
    auto result = run_search(params, std::cref(objective), 100, 1);
    improved += result.best_fitness > result.history.front().best_fitness;
  }
  CHECK(improved >= 9);
}

TEST_CASE("search is bit-identical across parallel evaluation widths") {
  const auto objective = density_objective(0.2);

  FireflyParams ff;
  ff.seed = 3;
  auto ff1 = run_search(ff, objective, 64, 1);
  auto ff4 = run_search(ff, objective, 64, 4);
  CHECK(same_result(ff1, ff4));

  ElephantParams es;
  es.seed = 3;
  auto es1 = run_search(es, objective, 64, 1);
  auto es4 = run_search(es, objective, 64, 4);
  CHECK(same_result(es1, es4));
}

TEST_CASE("agent fitness always matches the binarized position, even under heavy mutation") {
  const auto objective = density_objective(0.3);
  FireflyParams ff;
  ff.population = 6;
  ff.mutation_prob = 0.5;
  auto pop = chaotic_init(ff.population, 12, ff.chaotic_coefficient, 3);
  Archive archive;
  for (auto& agent : pop) {
    agent.fitness = objective(binarize(agent.position));
    agent.evaluated = true;
  }
  for (std::size_t t = 1; t <= 5; ++t) {
    firefly_step(pop, ff, objective, t, archive, 1);
    for (const auto& agent : pop)
      CHECK(agent.fitness == objective(binarize(agent.position)));
  }

  ElephantParams es;
  es.population = 6;
  es.n_clans = 1;
  es.mutation_prob = 0.5;
  auto herd = chaotic_init(es.population, 12, es.chaotic_coefficient, 5);
  for (std::size_t i = 0; i < herd.size(); ++i) {
    herd[i].sex = i < 1 ? Sex::Male : Sex::Female;
    herd[i].clan_id = 0;
    herd[i].fitness = objective(binarize(herd[i].position));
    herd[i].evaluated = true;
  }
  Archive herd_archive;
  for (std::size_t t = 1; t <= 5; ++t) {
    elephant_step(herd, es, objective, t, herd_archive, 1);
    for (const auto& agent : herd)
      CHECK(agent.fitness == objective(binarize(agent.position)));
  }
}

TEST_CASE("objective failures carry the offending mask") {
  FireflyParams params;
  params.population = 4;
  params.iterations = 1;
  const ObjectiveFn failing = [](const FeatureMask&) -> double {
    throw Error(ErrorKind::Numeric, "synthetic objective failure");
  };
  CHECK_THROWS_WITH_AS(run_search(params, failing, 10, 1), doctest::Contains("popcount"), Error);
}

TEST_CASE("parameter validation") {
  FireflyParams bad_pop;
  bad_pop.population = 1;
  CHECK_THROWS_AS(run_search(bad_pop, popcount_objective(), 5, 1), Error);

  FireflyParams bad_beta;
  bad_beta.beta_min = 1.5;
  CHECK_THROWS_AS(run_search(bad_beta, popcount_objective(), 5, 1), Error);

  ElephantParams bad_clans;
  bad_clans.n_clans = 50;
  CHECK_THROWS_AS(run_search(bad_clans, popcount_objective(), 5, 1), Error);

  ElephantParams bad_radius;
  bad_radius.female_visual_radius = 0.5;
  bad_radius.male_visual_radius = 0.2;
  CHECK_THROWS_AS(run_search(bad_radius, popcount_objective(), 5, 1), Error);
}
