#ifndef UNMIX_EVOLUTION_HPP
#define UNMIX_EVOLUTION_HPP

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "core_types.hpp"
#include "random.hpp"

namespace unmix {

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t generations = 1000;
  double mutation_prob = 0.1;
  double crossover_prob = 1.0;
  std::size_t tournament_size = 3;
  std::size_t elite_count = 1;
  bool ivfm_enabled = false;
  bool vca_seed_enabled = false;
  std::uint64_t rng_seed = 0;

  void validate() const {
    detail::require(population_size >= 1, "population size must be positive");
    detail::require(mutation_prob >= 0.0 && mutation_prob <= 1.0, "mutation probability must lie in [0, 1]");
    detail::require(crossover_prob >= 0.0 && crossover_prob <= 1.0, "crossover probability must lie in [0, 1]");
    detail::require(tournament_size >= 1 && tournament_size <= population_size,
                    "tournament size must lie in [1, population size]");
    detail::require(elite_count < population_size, "elite count must be below population size");
  }
};

struct Population {
  std::vector<Chromosome> individuals;
  std::size_t generation = 0;
  Chromosome best_ever;
  std::vector<double> fitness_history;

  std::size_t size() const { return individuals.size(); }
};

/// Any callable scoring a gene list; larger is fitter.
template <typename F>
concept FitnessFunction = requires(const F &f, std::span<const PixelIndex> genes) {
  { f(genes) } -> std::convertible_to<double>;
};

namespace detail {

inline bool contains(const std::vector<PixelIndex> &genes, PixelIndex value) {
  return std::find(genes.begin(), genes.end(), value) != genes.end();
}

/// Uniform draw from [0, pixels) excluding `taken`; nullopt when nothing is free.
inline std::optional<PixelIndex> draw_unused(const std::vector<PixelIndex> &taken, std::size_t pixels, Rng &rng) {
  std::vector<PixelIndex> distinct = taken;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t in_range = static_cast<std::size_t>(
      std::count_if(distinct.begin(), distinct.end(), [&](PixelIndex g) { return g < pixels; }));
  const std::size_t free_count = pixels - in_range;
  if (free_count == 0)
    return std::nullopt;
  if (pixels >= 2 * in_range) {
    // Rejection: at least half the range is free.
    for (;;) {
      const PixelIndex x = rng.below(pixels);
      if (!std::binary_search(distinct.begin(), distinct.end(), x))
        return x;
    }
  }
  // Pick the k-th free index directly.
  std::uint64_t k = rng.below(free_count);
  for (PixelIndex x = 0; x < pixels; ++x) {
    if (std::binary_search(distinct.begin(), distinct.end(), x))
      continue;
    if (k-- == 0)
      return x;
  }
  return std::nullopt;
}

/// Replaces later duplicates by fresh unused indices.
inline void repair_duplicates(Chromosome &c, std::size_t pixels, Rng &rng) {
  for (std::size_t i = 1; i < c.genes.size(); ++i) {
    const auto first = c.genes.begin();
    if (std::find(first, first + static_cast<std::ptrdiff_t>(i), c.genes[i]) == first + static_cast<std::ptrdiff_t>(i))
      continue;
    if (auto fresh = draw_unused(c.genes, pixels, rng))
      c.genes[i] = *fresh;
    c.fitness.reset();
  }
}

template <FitnessFunction F>
void evaluate(Chromosome &c, const F &fitness_fn) {
  if (!c.fitness)
    c.fitness = static_cast<double>(fitness_fn(std::span<const PixelIndex>(c.genes)));
}

template <FitnessFunction F>
void evaluate(std::vector<Chromosome> &individuals, const F &fitness_fn) {
  for (auto &c : individuals)
    evaluate(c, fitness_fn);
}

/// Index of the fittest individual, lowest index on ties.
inline std::size_t fittest_index(const std::vector<Chromosome> &individuals) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < individuals.size(); ++i)
    if (individuals[i].fitness_or_zero() > individuals[best].fitness_or_zero())
      best = i;
  return best;
}

/// Indices sorted by descending fitness, ascending index on ties.
inline std::vector<std::size_t> rank_by_fitness(const std::vector<Chromosome> &individuals) {
  std::vector<std::size_t> order(individuals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return individuals[a].fitness_or_zero() > individuals[b].fitness_or_zero();
  });
  return order;
}

inline double mean_fitness(const std::vector<Chromosome> &individuals) {
  double acc = 0.0;
  for (const auto &c : individuals)
    acc += c.fitness_or_zero();
  return individuals.empty() ? 0.0 : acc / static_cast<double>(individuals.size());
}

} // namespace detail

/// p distinct pixels drawn uniformly without replacement (partial Fisher-Yates
/// over a virtual identity permutation).
inline Chromosome random_chromosome(std::size_t pixels, std::size_t p, Rng &rng) {
  Chromosome c;
  c.genes.reserve(p);
  std::vector<std::pair<PixelIndex, PixelIndex>> swapped; // sparse permutation
  auto lookup = [&](PixelIndex i) {
    for (const auto &[from, to] : swapped)
      if (from == i)
        return to;
    return i;
  };
  auto assign = [&](PixelIndex i, PixelIndex v) {
    for (auto &entry : swapped)
      if (entry.first == i) {
        entry.second = v;
        return;
      }
    swapped.emplace_back(i, v);
  };
  for (std::size_t k = 0; k < p; ++k) {
    const PixelIndex j = k + rng.below(pixels - k);
    const PixelIndex vk = lookup(k), vj = lookup(j);
    assign(j, vk);
    assign(k, vj);
    c.genes.push_back(vj);
  }
  return c;
}

/// n_pop random chromosomes; with a seed chromosome, individual 0 is that seed.
inline Population init_population(std::size_t pixels, std::size_t p, const GaConfig &config, Rng &rng,
                                  const std::optional<Chromosome> &seed_individual = std::nullopt) {
  config.validate();
  detail::require(p >= 1, "chromosome length must be positive");
  if (pixels < p)
    throw ValidationError("fewer pixels than endmembers");
  Population pop;
  pop.individuals.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i)
    pop.individuals.push_back(random_chromosome(pixels, p, rng));
  if (seed_individual) {
    detail::require(seed_individual->size() == p && is_valid(*seed_individual, pixels), "invalid seed individual");
    pop.individuals.front() = Chromosome{seed_individual->genes, std::nullopt};
  }
  return pop;
}

/// With-replacement tournament; returns a copy of the fittest contestant.
inline Chromosome tournament_select(const std::vector<Chromosome> &individuals, std::size_t tournament_size,
                                    Rng &rng) {
  detail::require(!individuals.empty(), "tournament over an empty population");
  detail::require(tournament_size >= 1, "tournament size must be positive");
  std::size_t winner = rng.below(individuals.size());
  for (std::size_t k = 1; k < tournament_size; ++k) {
    const std::size_t challenger = rng.below(individuals.size());
    const double wf = individuals[winner].fitness_or_zero();
    const double cf = individuals[challenger].fitness_or_zero();
    if (cf > wf || (cf == wf && challenger < winner))
      winner = challenger;
  }
  return individuals[winner];
}

/// Exchanges genes [first, last) between a and b in place; no repair.
inline void swap_segments(Chromosome &a, Chromosome &b, std::size_t first, std::size_t last) {
  detail::require(a.size() == b.size(), "crossover parents differ in length");
  detail::require(first <= last && last <= a.size(), "crossover cut points out of range");
  for (std::size_t i = first; i < last; ++i)
    std::swap(a.genes[i], b.genes[i]);
  if (first < last) {
    a.fitness.reset();
    b.fitness.reset();
  }
}

/// Two-point crossover with duplicate repair. With probability p_c, draws
/// cuts 0 <= i < j <= p and swaps [i, j); otherwise children copy parents.
inline std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome &a, const Chromosome &b,
                                                             double crossover_prob, std::size_t pixels, Rng &rng) {
  detail::require(a.size() == b.size(), "crossover parents differ in length");
  Chromosome x = a, y = b;
  if (a.size() < 2 || !rng.bernoulli(crossover_prob))
    return {std::move(x), std::move(y)};
  const std::size_t slots = a.size() + 1;
  std::size_t i = rng.below(slots);
  std::size_t j = rng.below(slots - 1);
  if (j >= i)
    ++j;
  if (i > j)
    std::swap(i, j);
  const bool changed = !std::equal(a.genes.begin() + static_cast<std::ptrdiff_t>(i),
                                   a.genes.begin() + static_cast<std::ptrdiff_t>(j),
                                   b.genes.begin() + static_cast<std::ptrdiff_t>(i));
  if (!changed)
    return {std::move(x), std::move(y)};
  swap_segments(x, y, i, j);
  detail::repair_duplicates(x, pixels, rng);
  detail::repair_duplicates(y, pixels, rng);
  return {std::move(x), std::move(y)};
}

/// Each gene, with probability p_m, becomes a uniformly drawn pixel not
/// already in the chromosome. Skipped when no such pixel exists.
inline Chromosome mutate(const Chromosome &c, double mutation_prob, std::size_t pixels, Rng &rng) {
  Chromosome out = c;
  for (std::size_t i = 0; i < out.genes.size(); ++i) {
    if (!rng.bernoulli(mutation_prob))
      continue;
    if (auto fresh = detail::draw_unused(out.genes, pixels, rng)) {
      out.genes[i] = *fresh;
      out.fitness.reset();
    }
  }
  return out;
}

/// In-vitro-fertilisation step over an evaluated population.
///
/// The fittest individual is the father. A random half of the population is
/// paired off and crossed (p_c = 1) to form the donor set; every donor is
/// then crossed with the father, and both children of each cross are kept.
/// Children are inserted best-first, each one replacing the current weakest
/// resident outside the top `elite_count` if and only if it is strictly
/// fitter than that resident. When no child qualifies the population is
/// left untouched.
template <FitnessFunction F>
void ivfm_step(std::vector<Chromosome> &individuals, std::size_t pixels, std::size_t elite_count,
               const F &fitness_fn, Rng &rng) {
  const std::size_t n = individuals.size();
  if (n < 2)
    return;
  detail::evaluate(individuals, fitness_fn);
  const Chromosome father = individuals[detail::fittest_index(individuals)];

  // Random half, without replacement, in draw order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k)
    std::swap(order[k], order[k + rng.below(n - k)]);

  std::vector<Chromosome> donors;
  donors.reserve(half);
  for (std::size_t k = 0; k + 1 < half; k += 2) {
    auto [x, y] = two_point_crossover(individuals[order[k]], individuals[order[k + 1]], 1.0, pixels, rng);
    donors.push_back(std::move(x));
    donors.push_back(std::move(y));
  }
  if (half % 2 == 1)
    donors.push_back(individuals[order[half - 1]]);

  std::vector<Chromosome> children;
  children.reserve(2 * donors.size());
  for (const auto &donor : donors) {
    auto [x, y] = two_point_crossover(father, donor, 1.0, pixels, rng);
    children.push_back(std::move(x));
    children.push_back(std::move(y));
  }
  detail::evaluate(children, fitness_fn);
  std::stable_sort(children.begin(), children.end(),
                   [](const Chromosome &a, const Chromosome &b) { return a.fitness_or_zero() > b.fitness_or_zero(); });

  // Residents eligible for replacement: everything outside the elite, weakest first.
  std::vector<std::size_t> ranked = detail::rank_by_fitness(individuals);
  std::vector<std::size_t> replaceable(ranked.begin() + static_cast<std::ptrdiff_t>(std::min(elite_count, n)),
                                       ranked.end());
  std::reverse(replaceable.begin(), replaceable.end());

  std::size_t next = 0;
  for (auto &child : children) {
    if (next == replaceable.size())
      break;
    const std::size_t slot = replaceable[next];
    if (!(child.fitness_or_zero() > individuals[slot].fitness_or_zero()))
      break; // children are sorted, none of the rest can qualify
    individuals[slot] = std::move(child);
    ++next;
  }
}

struct GenerationRecord {
  std::size_t generation;
  double best_fitness;
  double mean_fitness;
};

struct EvolutionResult {
  Chromosome best;
  std::vector<double> fitness_history; ///< best fitness after generation 0..n_gen
  std::vector<GenerationRecord> convergence;
};

/// Runs the generational GA. Each generation: keep the top `elite_count`,
/// breed the rest by tournament, crossover and mutation, optionally run the
/// IVF step over the offspring, then merge elites back in.
template <FitnessFunction F>
EvolutionResult evolve(std::size_t pixels, std::size_t p, const GaConfig &config, const F &fitness_fn,
                       const std::optional<Chromosome> &seed_individual = std::nullopt) {
  config.validate();
  Rng rng(derive_seed({config.rng_seed, 0x67616565ULL}));
  Population pop = init_population(pixels, p, config, rng, seed_individual);
  detail::evaluate(pop.individuals, fitness_fn);

  EvolutionResult result;
  auto record = [&](std::size_t generation) {
    const std::size_t top = detail::fittest_index(pop.individuals);
    if (!pop.best_ever.fitness || pop.individuals[top].fitness_or_zero() > pop.best_ever.fitness_or_zero())
      pop.best_ever = pop.individuals[top];
    pop.fitness_history.push_back(pop.individuals[top].fitness_or_zero());
    result.convergence.push_back(
        {generation, pop.individuals[top].fitness_or_zero(), detail::mean_fitness(pop.individuals)});
  };
  record(0);

  const std::size_t n = config.population_size;
  const std::size_t elites = config.elite_count;
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    const std::vector<std::size_t> ranked = detail::rank_by_fitness(pop.individuals);

    std::vector<Chromosome> offspring;
    offspring.reserve(n);
    while (offspring.size() < n - elites) {
      Chromosome a = tournament_select(pop.individuals, config.tournament_size, rng);
      Chromosome b = tournament_select(pop.individuals, config.tournament_size, rng);
      auto [x, y] = two_point_crossover(a, b, config.crossover_prob, pixels, rng);
      offspring.push_back(mutate(x, config.mutation_prob, pixels, rng));
      if (offspring.size() < n - elites)
        offspring.push_back(mutate(y, config.mutation_prob, pixels, rng));
    }
    detail::evaluate(offspring, fitness_fn);
    if (config.ivfm_enabled)
      ivfm_step(offspring, pixels, elites, fitness_fn, rng);

    std::vector<Chromosome> next;
    next.reserve(n);
    for (std::size_t k = 0; k < elites; ++k)
      next.push_back(pop.individuals[ranked[k]]);
    for (auto &c : offspring)
      next.push_back(std::move(c));
    pop.individuals = std::move(next);
    pop.generation = gen;
    record(gen);
  }
  result.best = pop.best_ever;
  result.fitness_history = std::move(pop.fitness_history);
  return result;
}

} // namespace unmix

#endif // UNMIX_EVOLUTION_HPP
