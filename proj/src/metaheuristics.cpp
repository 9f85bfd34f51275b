#include "genesift/metaheuristics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <type_traits>

#include "genesift/errors.hpp"

namespace genesift {

namespace {

// Stream tags so the init draw and each generation's draws never overlap.
constexpr std::uint64_t kInitStream = 0;

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

void require_evaluated(const std::vector<Agent>& pop) {
  for (const auto& a : pop)
    if (!a.evaluated) throw Error(ErrorKind::State, "population has unevaluated agents");
}

// Fill a position by iterating the logistic map from a fresh start point.
void chaotic_position(std::vector<double>& pos, double r, Rng& rng) {
  static constexpr double fixed_points[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  double x = rng.next_open_unit();
  for (bool near_fixed = true; near_fixed;) {
    near_fixed = false;
    for (double fp : fixed_points) near_fixed = near_fixed || std::fabs(x - fp) < 1e-12;
    if (near_fixed) x = rng.next_open_unit();
  }
  for (double& coord : pos) {
    x = logistic_map(x, r);
    coord = x;
  }
}

// Reflect coordinates whose threshold bit disagrees with the evaluated mask,
// so that fitness always corresponds to binarize(position).
void sync_position_with_mask(std::vector<double>& pos, const FeatureMask& mask) {
  for (std::size_t j = 0; j < pos.size(); ++j) {
    const bool bit = pos[j] > 0.5;
    if (bit == static_cast<bool>(mask.bits[j])) continue;
    pos[j] = 1.0 - pos[j];
    if ((pos[j] > 0.5) != static_cast<bool>(mask.bits[j]))  // exact 0.5 edge
      pos[j] = mask.bits[j] ? 0.75 : 0.25;
  }
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

// Evaluates masks[i] into pop[i].fitness (in parallel when jobs > 1) and
// feeds the archive in agent-index order. Objective failures surface with
// the offending mask attached, lowest agent index first.
void evaluate_population(std::vector<Agent>& pop, const std::vector<FeatureMask>& masks,
                         const ObjectiveFn& objective, Archive& archive, int jobs) {
  const std::size_t n = pop.size();
  std::vector<double> fitness(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
  auto eval_one = [&](std::size_t i) {
    try {
      fitness[i] = objective(masks[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (jobs > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
#endif
    for (std::size_t i = 0; i < n; ++i) eval_one(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) eval_one(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    std::string detail;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    throw Error(ErrorKind::Eval, "objective failed for agent " + std::to_string(i) +
                                     " (mask popcount " + std::to_string(masks[i].popcount()) +
                                     "): " + detail);
  }
  for (std::size_t i = 0; i < n; ++i) {
    pop[i].fitness = fitness[i];
    pop[i].evaluated = true;
    archive.offer(masks[i], fitness[i]);
    ++archive.evaluations;
  }
}

// Binarize + mutate every agent, re-sync positions, then evaluate.
void finish_generation(std::vector<Agent>& pop, double mutation_prob, const ObjectiveFn& objective,
                       std::vector<Rng>& rngs, Archive& archive, int jobs) {
  std::vector<FeatureMask> masks(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    for (double& v : pop[i].position) v = clamp_unit(v);
    masks[i] = bit_flip_mutate(binarize(pop[i].position), mutation_prob, rngs[i]);
    sync_position_with_mask(pop[i].position, masks[i]);
  }
  evaluate_population(pop, masks, objective, archive, jobs);
}

void validate_common(std::size_t population, double chaotic_coefficient, double mutation_prob) {
  if (population < 2) throw Error(ErrorKind::Config, "population must be at least 2");
  if (!(chaotic_coefficient > 0.0 && chaotic_coefficient <= 4.0))
    throw Error(ErrorKind::Config, "chaotic_coefficient must lie in (0,4]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw Error(ErrorKind::Config, "mutation_prob must lie in [0,1]");
}

void validate(const FireflyParams& p) {
  validate_common(p.population, p.chaotic_coefficient, p.mutation_prob);
  if (!(p.beta_min >= 0.0 && p.beta_min <= p.beta_zero))
    throw Error(ErrorKind::Config, "need 0 <= beta_min <= beta_zero");
  if (p.report_frequency == 0) throw Error(ErrorKind::Config, "report_frequency must be positive");
}

struct ElephantLayout {
  std::size_t n_males = 0;
  double female_radius = 0.0;
  double male_radius = 0.0;
};

ElephantLayout elephant_layout(const ElephantParams& p, std::size_t d) {
  validate_common(p.population, p.chaotic_coefficient, p.mutation_prob);
  if (p.report_frequency == 0) throw Error(ErrorKind::Config, "report_frequency must be positive");
  if (p.max_age < 1) throw Error(ErrorKind::Config, "max_age must be positive");
  ElephantLayout layout;
  layout.n_males = static_cast<std::size_t>(
      std::llround(p.male_fraction * static_cast<double>(p.population)));
  layout.n_males = std::min(layout.n_males, p.population - 1);
  const std::size_t n_females = p.population - layout.n_males;
  if (p.n_clans == 0 || p.n_clans > n_females)
    throw Error(ErrorKind::Config, "n_clans must lie in [1, female count]");
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  layout.female_radius = p.female_visual_radius > 0.0 ? p.female_visual_radius : 0.1 * sqrt_d;
  layout.male_radius = p.male_visual_radius > 0.0 ? p.male_visual_radius : 0.3 * sqrt_d;
  if (!(layout.male_radius > layout.female_radius))
    throw Error(ErrorKind::Config, "male_visual_radius must exceed female_visual_radius");
  return layout;
}

void assign_sexes_and_clans(std::vector<Agent>& pop, const ElephantLayout& layout, std::size_t n_clans) {
  std::size_t female_rank = 0, male_rank = 0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (i < layout.n_males) {
      pop[i].sex = Sex::Male;
      pop[i].clan_id = static_cast<int>(male_rank++ % n_clans);
    } else {
      pop[i].sex = Sex::Female;
      pop[i].clan_id = static_cast<int>(female_rank++ % n_clans);
    }
    pop[i].age = 0;
  }
}

template <typename Params>
SearchResult run_search_impl(const Params& params, const ObjectiveFn& objective, std::size_t d,
                             int jobs) {
  if (d == 0) throw Error(ErrorKind::Config, "dimension must be positive");
  ElephantLayout layout;
  if constexpr (std::is_same_v<Params, ElephantParams>)
    layout = elephant_layout(params, d);
  else
    validate(params);

  std::vector<Agent> pop = chaotic_init(params.population, d, params.chaotic_coefficient, params.seed);
  if constexpr (std::is_same_v<Params, ElephantParams>)
    assign_sexes_and_clans(pop, layout, params.n_clans);

  Archive archive;
  std::vector<FeatureMask> masks(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) masks[i] = binarize(pop[i].position);
  evaluate_population(pop, masks, objective, archive, jobs);

  SearchResult result;
  auto record = [&](std::size_t iteration) {
    result.history.push_back({iteration, archive.best_fitness, archive.best_mask.popcount()});
  };
  record(0);

  for (std::size_t t = 1; t <= params.iterations; ++t) {
    if constexpr (std::is_same_v<Params, FireflyParams>)
      firefly_step(pop, params, objective, t, archive, jobs);
    else
      elephant_step(pop, params, objective, t, archive, jobs);
    if (t % params.report_frequency == 0 || t == params.iterations) record(t);
  }

  result.best_mask = archive.best_mask;
  result.best_fitness = archive.best_fitness;
  result.evaluations = archive.evaluations;
  return result;
}

}  // namespace

double logistic_map(double x, double r) {
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorKind::Domain, "logistic_map: x outside [0,1]");
  return r * x * (1.0 - x);
}

std::vector<Agent> chaotic_init(std::size_t pop, std::size_t d, double r, std::uint64_t seed) {
  std::vector<Agent> agents(pop);
  for (std::size_t i = 0; i < pop; ++i) {
    agents[i].position.resize(d);
    Rng rng(seed, i, kInitStream);
    chaotic_position(agents[i].position, r, rng);
  }
  return agents;
}

FeatureMask binarize(const std::vector<double>& position, double threshold) {
  FeatureMask mask(position.size());
  bool any = false;
  for (std::size_t i = 0; i < position.size(); ++i) {
    mask.bits[i] = position[i] > threshold ? 1 : 0;
    any = any || mask.bits[i];
  }
  if (!any && !position.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < position.size(); ++i)
      if (position[i] > position[best]) best = i;
    mask.bits[best] = 1;
  }
  return mask;
}

FeatureMask bit_flip_mutate(const FeatureMask& mask, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::Domain, "bit_flip_mutate: p outside [0,1]");
  FeatureMask out = mask;
  bool any = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.next_unit() < p) out.bits[i] ^= 1;
    any = any || out.bits[i];
  }
  if (!any && !out.bits.empty()) out.bits[rng.next_index(out.size())] = 1;
  return out;
}

double attractiveness(double distance, const FireflyParams& params) {
  return params.beta_min + (params.beta_zero - params.beta_min) *
                               std::exp(-params.gamma_absorption * distance * distance);
}

void visual_range_prune(std::vector<Agent>& pop, double female_radius, double male_radius,
                        std::vector<Rng>& rngs) {
  const std::size_t n = pop.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double radius_i = pop[i].sex == Sex::Male ? male_radius : female_radius;
      const double radius_j = pop[j].sex == Sex::Male ? male_radius : female_radius;
      if (distance(pop[i].position, pop[j].position) > std::min(radius_i, radius_j)) continue;
      const std::size_t loser = pop[j].fitness > pop[i].fitness ? i : j;
      for (double& v : pop[loser].position) v = rngs[loser].next_unit();
    }
  }
}

void firefly_step(std::vector<Agent>& pop, const FireflyParams& params, const ObjectiveFn& objective,
                  std::size_t iteration, Archive& archive, int jobs) {
  validate(params);
  require_evaluated(pop);
  const std::size_t n = pop.size();
  const std::size_t d = pop.empty() ? 0 : pop[0].position.size();

  // Brightest agent overall; ties keep the lowest index. Any agent below it
  // follows it, the rest (the current best) walk randomly.
  std::size_t brightest = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (pop[i].fitness > pop[brightest].fitness) brightest = i;

  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(params.seed, i, iteration);

  const std::vector<Agent> snapshot = pop;
  for (std::size_t i = 0; i < n; ++i) {
    Agent& agent = pop[i];
    const bool has_brighter = snapshot[brightest].fitness > snapshot[i].fitness;
    if (has_brighter) {
      const double beta = attractiveness(distance(snapshot[i].position, snapshot[brightest].position), params);
      for (std::size_t k = 0; k < d; ++k) {
        const double u = rngs[i].next_unit();
        agent.position[k] = snapshot[i].position[k] +
                            beta * (snapshot[brightest].position[k] - snapshot[i].position[k]) +
                            params.alpha_step * (u - 0.5);
      }
    } else {
      for (std::size_t k = 0; k < d; ++k) {
        const double u = rngs[i].next_unit();
        agent.position[k] = snapshot[i].position[k] + params.alpha_step * (u - 0.5);
      }
    }
  }

  finish_generation(pop, params.mutation_prob, objective, rngs, archive, jobs);
}

void elephant_step(std::vector<Agent>& pop, const ElephantParams& params, const ObjectiveFn& objective,
                   std::size_t iteration, Archive& archive, int jobs) {
  require_evaluated(pop);
  const std::size_t n = pop.size();
  const std::size_t d = pop.empty() ? 0 : pop[0].position.size();
  const auto layout = elephant_layout(params, d);

  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(params.seed, i, iteration);

  // Matriarch: fittest female per clan, ties to the lowest index.
  std::vector<int> matriarch(params.n_clans, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (pop[i].clan_id < 0 || static_cast<std::size_t>(pop[i].clan_id) >= params.n_clans)
      throw Error(ErrorKind::State, "agent " + std::to_string(i) + " has clan " +
                                        std::to_string(pop[i].clan_id) + " outside [0, " +
                                        std::to_string(params.n_clans) + ")");
    if (pop[i].sex != Sex::Female) continue;
    int& m = matriarch[pop[i].clan_id];
    if (m < 0 || pop[i].fitness > pop[m].fitness) m = static_cast<int>(i);
  }
  for (std::size_t c = 0; c < params.n_clans; ++c)
    if (matriarch[c] < 0) throw Error(ErrorKind::State, "clan " + std::to_string(c) + " has no females");

  const double sigma = layout.female_radius / std::sqrt(static_cast<double>(d));
  const std::vector<Agent> snapshot = pop;

  // Females move toward their matriarch plus a local Gaussian wobble; the
  // matriarch herself only wobbles. Males restart globally every step.
  for (std::size_t i = 0; i < n; ++i) {
    Agent& agent = pop[i];
    if (agent.sex == Sex::Female) {
      const auto& lead = snapshot[matriarch[agent.clan_id]].position;
      const bool is_matriarch = matriarch[agent.clan_id] == static_cast<int>(i);
      const double s = is_matriarch ? 0.0 : rngs[i].next_unit();
      for (std::size_t k = 0; k < d; ++k) {
        const double pull = is_matriarch ? 0.0 : s * (lead[k] - snapshot[i].position[k]);
        agent.position[k] = snapshot[i].position[k] + pull + sigma * rngs[i].next_gaussian();
      }
    } else {
      for (std::size_t k = 0; k < d; ++k) agent.position[k] = rngs[i].next_unit();
    }
  }

  visual_range_prune(pop, layout.female_radius, layout.male_radius, rngs);

  // Aging; the dead are reborn same sex, same clan, at a fresh chaotic spot.
  for (std::size_t i = 0; i < n; ++i) {
    Agent& agent = pop[i];
    if (++agent.age > params.max_age) {
      chaotic_position(agent.position, params.chaotic_coefficient, rngs[i]);
      agent.age = 0;
    }
  }

  finish_generation(pop, params.mutation_prob, objective, rngs, archive, jobs);
}

SearchResult run_search(const FireflyParams& params, const ObjectiveFn& objective, std::size_t d,
                        int jobs) {
  return run_search_impl(params, objective, d, jobs);
}

SearchResult run_search(const ElephantParams& params, const ObjectiveFn& objective, std::size_t d,
                        int jobs) {
  return run_search_impl(params, objective, d, jobs);
}

}  // namespace genesift
