#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "swarm/cellular_automata.hpp"
#include "swarm/error.hpp"
#include "swarm/rng.hpp"

namespace swarm::evo {

struct Chromosome {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }

  std::string str() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }

  static Chromosome parse(std::string_view s) {
    Chromosome c;
    c.bits.reserve(s.size());
    for (char ch : s) {
      if (ch != '0' && ch != '1') {
        throw Error(ErrorCode::InvalidArgument, "chromosome strings contain only 0 and 1");
      }
      c.bits.push_back(ch == '1');
    }
    return c;
  }

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

using FitnessFn = std::function<double(const Chromosome&)>;

enum class Selection { Roulette, Tournament };

struct GaParams {
  int pop_size = 50;
  double pc = 0.7;
  double pm = 0.01;
  double p_inv = 0.0;
  double p_dup = 0.0;
  bool elitism = true;
  int max_gens = 200;
  Selection selection = Selection::Roulette;
  int tournament_size = 2;
  // Stop as soon as the best fitness reaches this value.
  std::optional<double> optimum;

  void validate() const {
    if (pop_size < 2 || pop_size % 2 != 0) {
      throw Error(ErrorCode::InvalidArgument, "pop_size must be even and >= 2");
    }
    for (double q : {pc, pm, p_inv, p_dup}) {
      if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "operator probabilities must lie in [0,1]");
      }
    }
    if (max_gens < 1) throw Error(ErrorCode::InvalidArgument, "max_gens must be >= 1");
    if (tournament_size < 1) throw Error(ErrorCode::InvalidArgument, "tournament_size must be >= 1");
  }
};

inline Chromosome random_chromosome(std::size_t len, Rng& rng) {
  Chromosome c;
  c.bits.resize(len);
  for (auto& b : c.bits) b = static_cast<std::uint8_t>(rng.below(2));
  return c;
}

// Index drawn with probability proportional to fitness; uniform when no
// fitness is positive.
inline std::size_t roulette_select(std::span<const double> fitness, Rng& rng) {
  if (fitness.empty()) throw Error(ErrorCode::EmptyPopulation, "cannot select from an empty population");
  return rng.weighted_index(fitness);
}

inline std::size_t tournament_select(std::span<const double> fitness, int size, Rng& rng) {
  if (fitness.empty()) throw Error(ErrorCode::EmptyPopulation, "cannot select from an empty population");
  auto best = static_cast<std::size_t>(rng.below(fitness.size()));
  for (int k = 1; k < size; ++k) {
    const auto c = static_cast<std::size_t>(rng.below(fitness.size()));
    if (fitness[c] > fitness[best]) best = c;
  }
  return best;
}

// Exchanges the prefixes [0, cut) of a and b.
inline std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& a, const Chromosome& b,
                                                             std::size_t cut) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "parents differ in length");
  if (cut < 1 || cut >= a.size()) {
    throw Error(ErrorCode::CutOutOfRange, "cut must lie in 1..len-1, got " + std::to_string(cut));
  }
  Chromosome x = b;
  Chromosome y = a;
  std::copy(a.bits.begin(), a.bits.begin() + static_cast<std::ptrdiff_t>(cut), x.bits.begin());
  std::copy(b.bits.begin(), b.bits.begin() + static_cast<std::ptrdiff_t>(cut), y.bits.begin());
  return {std::move(x), std::move(y)};
}

inline Chromosome mutate(Chromosome c, double pm, Rng& rng) {
  if (!(pm >= 0.0 && pm <= 1.0)) throw Error(ErrorCode::InvalidArgument, "pm must lie in [0,1]");
  for (auto& b : c.bits) {
    if (rng.bernoulli(pm)) b ^= 1;
  }
  return c;
}

// Reverses bits i..j inclusive.
inline Chromosome invert_segment(Chromosome c, std::size_t i, std::size_t j) {
  if (i > j || j >= c.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "inversion segment must satisfy i <= j < len");
  }
  std::reverse(c.bits.begin() + static_cast<std::ptrdiff_t>(i),
               c.bits.begin() + static_cast<std::ptrdiff_t>(j) + 1);
  return c;
}

// Copies bits i..j onto positions starting at k; whatever would run past
// the end is dropped, so the length never changes.
inline Chromosome duplicate_segment(Chromosome c, std::size_t i, std::size_t j, std::size_t k) {
  if (i > j || j >= c.size() || k >= c.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "duplication needs i <= j < len and k < len");
  }
  const std::vector<std::uint8_t> seg(c.bits.begin() + static_cast<std::ptrdiff_t>(i),
                                      c.bits.begin() + static_cast<std::ptrdiff_t>(j) + 1);
  for (std::size_t n = 0; n < seg.size() && k + n < c.size(); ++n) c.bits[k + n] = seg[n];
  return c;
}

struct GenerationStats {
  double best = 0.0;
  double mean = 0.0;
};

struct EvolveResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<GenerationStats> trace;  // one entry per evaluated generation
  std::vector<Chromosome> final_population;
};

namespace detail {

inline std::vector<double> evaluate(const std::vector<Chromosome>& pop, const FitnessFn& f) {
  std::vector<double> out;
  out.reserve(pop.size());
  for (const auto& c : pop) {
    const double v = f(c);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "fitness must be finite and >= 0");
    }
    out.push_back(v);
  }
  return out;
}

inline std::pair<std::size_t, std::size_t> random_segment(std::size_t len, Rng& rng) {
  auto i = static_cast<std::size_t>(rng.below(len));
  auto j = static_cast<std::size_t>(rng.below(len));
  if (i > j) std::swap(i, j);
  return {i, j};
}

}  // namespace detail

// Generational GA. Each generation: optional elite copy of the current best,
// then pairs are filled by select -> crossover(pc) -> mutate(pm) ->
// invert(p_inv) -> duplicate(p_dup).
inline EvolveResult evolve(const FitnessFn& f, std::size_t len, const GaParams& p, Seed seed) {
  p.validate();
  if (len < 1) throw Error(ErrorCode::InvalidArgument, "chromosome length must be >= 1");
  Rng rng(seed);
  std::vector<Chromosome> pop;
  pop.reserve(static_cast<std::size_t>(p.pop_size));
  for (int i = 0; i < p.pop_size; ++i) pop.push_back(random_chromosome(len, rng));

  auto select = [&](std::span<const double> fit) {
    return p.selection == Selection::Roulette ? roulette_select(fit, rng)
                                              : tournament_select(fit, p.tournament_size, rng);
  };
  auto vary = [&](Chromosome c) {
    c = mutate(std::move(c), p.pm, rng);
    if (rng.bernoulli(p.p_inv)) {
      const auto [i, j] = detail::random_segment(len, rng);
      c = invert_segment(std::move(c), i, j);
    }
    if (rng.bernoulli(p.p_dup)) {
      const auto [i, j] = detail::random_segment(len, rng);
      c = duplicate_segment(std::move(c), i, j, static_cast<std::size_t>(rng.below(len)));
    }
    return c;
  };

  EvolveResult out;
  for (int gen = 0;; ++gen) {
    const auto fit = detail::evaluate(pop, f);
    const auto best_it = std::max_element(fit.begin(), fit.end());
    const auto best_idx = static_cast<std::size_t>(best_it - fit.begin());
    double mean = 0.0;
    for (double v : fit) mean += v;
    mean /= static_cast<double>(fit.size());
    out.trace.push_back({*best_it, mean});
    if (gen == 0 || *best_it > out.best_fitness) {
      out.best = pop[best_idx];
      out.best_fitness = *best_it;
    }
    const bool done = gen + 1 >= p.max_gens || (p.optimum && out.best_fitness >= *p.optimum);
    if (done) break;

    std::vector<Chromosome> next;
    next.reserve(pop.size());
    if (p.elitism) next.push_back(pop[best_idx]);
    while (next.size() < pop.size()) {
      Chromosome a = pop[select(fit)];
      Chromosome b = pop[select(fit)];
      if (len >= 2 && rng.bernoulli(p.pc)) {
        const auto cut = 1 + static_cast<std::size_t>(rng.below(len - 1));
        std::tie(a, b) = one_point_crossover(a, b, cut);
      }
      next.push_back(vary(std::move(a)));
      if (next.size() < pop.size()) next.push_back(vary(std::move(b)));
    }
    pop = std::move(next);
  }
  out.final_population = std::move(pop);
  return out;
}

inline double one_max(const Chromosome& c) {
  return static_cast<double>(std::count(c.bits.begin(), c.bits.end(), std::uint8_t{1}));
}

// Elementary rule <-> 8-bit chromosome, most significant bit first, so the
// chromosome reads as the rule number in binary ("01011010" is rule 90).
inline Chromosome encode_rule(const ca::RuleTable& r) {
  const int n = ca::rule_number(r);
  Chromosome c;
  c.bits.resize(8);
  for (int k = 0; k < 8; ++k) c.bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>((n >> (7 - k)) & 1);
  return c;
}

inline ca::RuleTable decode_rule(const Chromosome& c) {
  if (c.size() != 8) throw Error(ErrorCode::LengthMismatch, "elementary rule chromosomes have 8 bits");
  int n = 0;
  for (auto b : c.bits) n = (n << 1) | (b & 1);
  return ca::rule_from_number(n);
}

// Fraction of cells on which the rule's trajectory from target[0] agrees
// with the target, counted over every state of the trajectory.
inline double trajectory_fitness(const ca::RuleTable& rule, std::span<const ca::CAState> target) {
  if (target.empty()) throw Error(ErrorCode::InvalidArgument, "empty target trajectory");
  const auto run = ca::ca_run(target.front(), rule, static_cast<int>(target.size()) - 1);
  std::size_t match = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target[t].cells.size() != run[t].cells.size()) {
      throw Error(ErrorCode::DimensionMismatch, "target frames differ in size");
    }
    for (std::size_t i = 0; i < run[t].cells.size(); ++i) match += run[t].cells[i] == target[t].cells[i];
    total += run[t].cells.size();
  }
  return static_cast<double>(match) / static_cast<double>(total);
}

struct CaRuleResult {
  ca::RuleTable rule;
  double fitness = 0.0;
  EvolveResult run;
};

inline CaRuleResult evolve_ca_rule(const std::vector<ca::CAState>& target, GaParams p, Seed seed) {
  if (!p.optimum) p.optimum = 1.0;
  auto fit = [&target](const Chromosome& c) { return trajectory_fitness(decode_rule(c), target); };
  auto run = evolve(fit, 8, p, seed);
  return {decode_rule(run.best), run.best_fitness, std::move(run)};
}

}  // namespace swarm::evo
