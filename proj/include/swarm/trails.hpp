#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/pgm.hpp"
#include "swarm/pheromone_field.hpp"
#include "swarm/rng.hpp"
#include "swarm/stats.hpp"
#include "swarm/torus.hpp"

namespace swarm::trails {

using ImageHabitat = GreyImage;

// Position is the whole state: trail ants carry no memory.
struct TrailAnt {
  Coord pos;

  friend bool operator==(const TrailAnt&, const TrailAnt&) = default;
};

struct TrailParams {
  double beta = 3.5;
  double delta = 0.2;
  double eta = 0.07;
  double gamma = 1.0;
  double rho = 0.015;
  int n_ants = 500;

  void validate() const {
    if (!(beta >= 0.0) || !(delta >= 0.0) || !(gamma >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "beta, delta and gamma must be >= 0");
    }
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be > 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::RhoOutOfRange, "rho must lie in [0,1]");
    if (n_ants < 0) throw Error(ErrorCode::InvalidArgument, "n_ants must be >= 0");
  }
};

struct CognitiveMap {
  TorusDims dims;
  std::vector<double> height;

  friend bool operator==(const CognitiveMap&, const CognitiveMap&) = default;
};

// Sensory response to pheromone sigma: (1 + sigma / (1 + delta sigma))^beta.
inline double response(double sigma, const TrailParams& p) {
  return std::pow(1.0 + sigma / (1.0 + p.delta * sigma), p.beta);
}

// Move probabilities over the 8 Moore neighbors, in kMooreSteps order.
inline std::array<double, 8> transition_distribution(const TrailAnt& a, const PheromoneField& f,
                                                     const TrailParams& p) {
  std::array<double, 8> w{};
  double total = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    w[k] = response(f.at({a.pos.x + kMooreSteps[k].x, a.pos.y + kMooreSteps[k].y}), p);
    total += w[k];
  }
  for (auto& x : w) x /= total;
  return w;
}

inline std::vector<TrailAnt> scatter_ants(int n, TorusDims dims, Rng& rng) {
  std::vector<TrailAnt> ants(static_cast<std::size_t>(n));
  for (auto& a : ants) a.pos = coord_of(static_cast<std::size_t>(rng.below(dims.cells())), dims);
  return ants;
}

// All ants choose their move from the field as it stood at the start of the
// step, then each deposits eta + gamma * grey/255 at its new cell, then the
// whole field evaporates once.
inline void colony_step(std::vector<TrailAnt>& ants, PheromoneField& f, const ImageHabitat& h,
                        const TrailParams& p, Rng& rng) {
  if (!(h.dims == f.dims())) {
    throw Error(ErrorCode::DimensionMismatch, "habitat and field dims differ");
  }
  for (auto& a : ants) {
    const auto dist = transition_distribution(a, f, p);
    const auto& step = kMooreSteps[rng.weighted_index(dist)];
    a.pos = torus_wrap({a.pos.x + step.x, a.pos.y + step.y}, f.dims());
  }
  for (const auto& a : ants) {
    f.deposit(a.pos, p.eta + p.gamma * static_cast<double>(h.at(a.pos)) / 255.0);
  }
  f.evaporate(p.rho);
}

inline CognitiveMap cognitive_map(const PheromoneField& f) {
  CognitiveMap m{f.dims(), std::vector<double>(f.values().begin(), f.values().end())};
  const double peak = f.max();
  if (peak > 0.0) {
    for (auto& v : m.height) v /= peak;
  } else {
    for (auto& v : m.height) v = 0.0;
  }
  return m;
}

inline std::optional<double> map_correlation(const CognitiveMap& a, const CognitiveMap& b) {
  if (!(a.dims == b.dims)) throw Error(ErrorCode::DimensionMismatch, "map dims differ");
  return pearson(a.height, b.height);
}

// First index whose map correlates with the reference at >= threshold;
// nullopt means no convergence.
inline std::optional<std::size_t> convergence_time(std::span<const PheromoneField> trace,
                                                   const CognitiveMap& reference, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "threshold must lie in (0,1]");
  }
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto r = map_correlation(cognitive_map(trace[t]), reference);
    if (r && *r >= threshold) return t;
  }
  return std::nullopt;
}

// Online variant: runs the colony for up to `steps` steps and reports the
// first step (0 = before any move) whose map reaches the threshold.
inline std::optional<std::size_t> run_until_converged(std::vector<TrailAnt>& ants, PheromoneField& f,
                                                      const ImageHabitat& h, const TrailParams& p,
                                                      Rng& rng, std::size_t steps,
                                                      const CognitiveMap& reference, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "threshold must lie in (0,1]");
  }
  for (std::size_t t = 0;; ++t) {
    const auto r = map_correlation(cognitive_map(f), reference);
    if (r && *r >= threshold) return t;
    if (t == steps) return std::nullopt;
    colony_step(ants, f, h, p, rng);
  }
}

inline CognitiveMap mean_map(std::span<const CognitiveMap> maps) {
  if (maps.empty()) throw Error(ErrorCode::InvalidArgument, "no maps to average");
  CognitiveMap out{maps.front().dims, std::vector<double>(maps.front().height.size(), 0.0)};
  for (const auto& m : maps) {
    if (!(m.dims == out.dims)) throw Error(ErrorCode::DimensionMismatch, "map dims differ");
    for (std::size_t i = 0; i < m.height.size(); ++i) out.height[i] += m.height[i];
  }
  for (auto& v : out.height) v /= static_cast<double>(maps.size());
  return out;
}

struct SwapConfig {
  std::size_t steps_per_phase = 1500;
  std::size_t reference_steps = 1500;
  std::size_t reference_runs = 4;
  double threshold = 0.4;
  std::size_t seeds = 10;
  Seed seed{};
};

struct SwapStats {
  CognitiveMap reference;
  // Steps to converge on B from an empty field (i) and from the A-trained
  // field (ii); nullopt = no convergence within steps_per_phase.
  std::vector<std::optional<std::size_t>> from_empty;
  std::vector<std::optional<std::size_t>> from_trained;
  // Fraction of seeds where (ii) >= (i), no convergence counting as +inf.
  double fraction_not_faster = 0.0;
};

namespace detail {

inline bool not_faster(std::optional<std::size_t> trained, std::optional<std::size_t> empty) {
  if (!trained) return true;
  if (!empty) return false;
  return *trained >= *empty;
}

}  // namespace detail

// Stream layout under cfg.seed: stream r (< reference_runs) builds the B
// reference; stream 1000 + 2k and 1000 + 2k + 1 drive the empty-start and
// trained-start runs of seed k.
inline SwapStats habitat_swap_experiment(const ImageHabitat& a, const ImageHabitat& b,
                                         const TrailParams& p, const SwapConfig& cfg) {
  p.validate();
  if (!(a.dims == b.dims)) throw Error(ErrorCode::DimensionMismatch, "habitats differ in size");
  SwapStats out;
  if (cfg.seeds == 0) return out;

  std::vector<CognitiveMap> ref_maps;
  for (std::size_t r = 0; r < std::max<std::size_t>(cfg.reference_runs, 1); ++r) {
    Rng rng = Rng::derive(cfg.seed, r);
    auto ants = scatter_ants(p.n_ants, b.dims, rng);
    PheromoneField f(b.dims);
    for (std::size_t t = 0; t < cfg.reference_steps; ++t) colony_step(ants, f, b, p, rng);
    ref_maps.push_back(cognitive_map(f));
  }
  out.reference = mean_map(ref_maps);

  std::size_t not_faster = 0;
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    {
      Rng rng = Rng::derive(cfg.seed, 1000 + 2 * k);
      auto ants = scatter_ants(p.n_ants, b.dims, rng);
      PheromoneField f(b.dims);
      out.from_empty.push_back(
          run_until_converged(ants, f, b, p, rng, cfg.steps_per_phase, out.reference, cfg.threshold));
    }
    {
      Rng rng = Rng::derive(cfg.seed, 1000 + 2 * k + 1);
      auto ants = scatter_ants(p.n_ants, a.dims, rng);
      PheromoneField f(a.dims);
      for (std::size_t t = 0; t < cfg.steps_per_phase; ++t) colony_step(ants, f, a, p, rng);
      out.from_trained.push_back(
          run_until_converged(ants, f, b, p, rng, cfg.steps_per_phase, out.reference, cfg.threshold));
    }
    if (detail::not_faster(out.from_trained.back(), out.from_empty.back())) ++not_faster;
  }
  out.fraction_not_faster = static_cast<double>(not_faster) / static_cast<double>(cfg.seeds);
  return out;
}

// Two bright Gaussian blobs on a dark ground.
inline ImageHabitat two_blob_habitat(TorusDims d) {
  ImageHabitat h{d, std::vector<std::uint8_t>(d.cells())};
  const double sx = d.width / 8.0;
  const double sy = d.height / 8.0;
  const double c[2][2] = {{d.width * 0.25, d.height * 0.3}, {d.width * 0.7, d.height * 0.7}};
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      double v = 0.0;
      for (const auto& ctr : c) {
        const double dx = torus_delta(ctr[0], static_cast<double>(x), static_cast<double>(d.width)) / sx;
        const double dy = torus_delta(ctr[1], static_cast<double>(y), static_cast<double>(d.height)) / sy;
        v = std::max(v, std::exp(-0.5 * (dx * dx + dy * dy)));
      }
      h.pixels[cell_index({x, y}, d)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }
  return h;
}

// Horizontal bright/dark bands of the given period (rows).
inline ImageHabitat stripe_habitat(TorusDims d, int period) {
  if (period < 2) throw Error(ErrorCode::InvalidArgument, "stripe period must be >= 2");
  ImageHabitat h{d, std::vector<std::uint8_t>(d.cells())};
  for (int y = 0; y < d.height; ++y) {
    const std::uint8_t v = (y % period) < period / 2 ? 255 : 0;
    for (int x = 0; x < d.width; ++x) h.pixels[cell_index({x, y}, d)] = v;
  }
  return h;
}

}  // namespace swarm::trails
