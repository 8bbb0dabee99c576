#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarm/aco.hpp"
#include "swarm/boids.hpp"
#include "swarm/cellular_automata.hpp"
#include "swarm/clustering.hpp"
#include "swarm/error.hpp"
#include "swarm/evolution.hpp"
#include "swarm/mc2/service.hpp"
#include "swarm/mc2/store.hpp"
#include "swarm/pgm.hpp"
#include "swarm/rng.hpp"
#include "swarm/trails.hpp"
#include "swarm/workbench/config.hpp"

namespace swarm::workbench {

inline constexpr const char* kToolVersion = "1.0.0";

// Shortest text that reads back as the same double.
inline std::string num(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Collects artifacts of one run; every write failure is IoFailure.
class Artifacts {
 public:
  explicit Artifacts(fs::path root) : root_(std::move(root)) { ensure_dir(root_); }

  const fs::path& root() const noexcept { return root_; }

  static void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, "cannot create directory " + dir.string());
  }

  void write(const fs::path& rel, const std::function<void(std::ostream&)>& body) {
    const fs::path path = root_ / rel;
    ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    files_.push_back(rel.generic_string());
  }

  // Records a file written by a nested Artifacts.
  void note(const fs::path& rel) { files_.push_back(rel.generic_string()); }

  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

// Member k of an ensemble runs on its own derived seed.
inline Seed member_seed(Seed base, std::uint64_t k) { return Seed{Rng::derive(base, k).next_u64()}; }

// ---- parameter parsing ------------------------------------------------------

inline TorusDims dims_from(Fields& f, TorusDims fallback) {
  TorusDims d{f.get<int>("width", fallback.width), f.get<int>("height", fallback.height)};
  if (d.width < 1) invalid(f.name("width"), "must be >= 1");
  if (d.height < 1) invalid(f.name("height"), "must be >= 1");
  return d;
}

template <typename Fn>
void check(bool ok, Fields& f, std::string_view key, Fn&& reason) {
  if (!ok) invalid(f.name(key), reason());
}

// Runs a library validate() and reports its message as a config error.
template <typename T>
void validated(const T& params, const std::string& where) {
  try {
    params.validate();
  } catch (const Error& e) {
    invalid(where, e.what());
  }
}

struct CaSpec {
  int rule = 90;
  int width = 16;
  int steps = 32;
  std::string init = "single";
  double density = 0.5;
};

inline CaSpec parse_ca(Fields f) {
  CaSpec s;
  s.rule = f.required<int>("rule");
  s.width = f.required<int>("width");
  s.steps = f.required<int>("steps");
  s.init = f.get<std::string>("init", s.init);
  s.density = f.get<double>("density", s.density);
  check(s.rule >= 0 && s.rule <= 255, f, "rule", [] { return "must lie in 0..255"; });
  check(s.width >= 1, f, "width", [] { return "must be >= 1"; });
  check(s.steps >= 0, f, "steps", [] { return "must be >= 0"; });
  check(s.init == "single" || s.init == "random", f, "init", [] { return "must be single or random"; });
  check(s.density >= 0.0 && s.density <= 1.0, f, "density", [] { return "must lie in [0,1]"; });
  f.finish();
  return s;
}

inline void run_ca(const CaSpec& s, Seed seed, Artifacts& out) {
  ca::CAState init = ca::single_seed_row(s.width);
  if (s.init == "random") {
    Rng rng(seed);
    for (auto& c : init.cells) c = rng.bernoulli(s.density) ? 1 : 0;
  }
  const auto traj = ca::ca_run(init, ca::rule_from_number(s.rule), s.steps);
  out.write("trajectory.pgm", [&](std::ostream& o) { ca::write_trajectory_pgm(o, traj, 2); });
  out.write("metrics.csv", [&](std::ostream& o) {
    o << "step,live_cells,density\n";
    for (std::size_t t = 0; t < traj.size(); ++t) {
      std::size_t live = 0;
      for (auto c : traj[t].cells) live += c;
      o << t << ',' << live << ',' << num(static_cast<double>(live) / static_cast<double>(s.width)) << '\n';
    }
  });
}

struct BoidsSpec {
  boids::BoidParams params;
  std::vector<boids::Obstacle> obstacles;
  std::size_t n = 50;
  int steps = 500;
  double dt = 1.0;
  double link_radius = 5.0;
  bool trace = true;
  // Optional compact start: a disk instead of the whole world.
  std::optional<boids::Vec2> disk_center;
  double disk_radius = 10.0;
  double initial_speed = 0.95;
};

inline BoidsSpec parse_boids(Fields f) {
  BoidsSpec s;
  auto& p = s.params;
  p.r_sep = f.get("r_sep", p.r_sep);
  p.r_neigh = f.get("r_neigh", p.r_neigh);
  p.w_sep = f.get("w_sep", p.w_sep);
  p.w_align = f.get("w_align", p.w_align);
  p.w_coh = f.get("w_coh", p.w_coh);
  p.v_max = f.get("v_max", p.v_max);
  p.v_min = f.get("v_min", p.v_min);
  p.world.width = f.get("world_width", p.world.width);
  p.world.height = f.get("world_height", p.world.height);
  validated(p, "params");
  s.n = f.get<std::size_t>("n", s.n);
  s.steps = f.get("steps", s.steps);
  s.dt = f.get("dt", s.dt);
  s.link_radius = f.get("link_radius", s.link_radius);
  s.trace = f.get("trace", s.trace);
  check(s.steps >= 0, f, "steps", [] { return "must be >= 0"; });
  check(s.dt > 0.0, f, "dt", [] { return "must be > 0"; });
  check(s.link_radius > 0.0, f, "link_radius", [] { return "must be > 0"; });
  if (f.has("start_disk")) {
    auto d = f.object("start_disk");
    s.disk_center = boids::Vec2{d.required<double>("x"), d.required<double>("y")};
    s.disk_radius = d.get("radius", s.disk_radius);
    s.initial_speed = d.get("speed", s.initial_speed);
    check(s.disk_radius > 0.0, d, "radius", [] { return "must be > 0"; });
    d.finish();
  }
  if (f.has("obstacles")) {
    const auto& arr = f.raw("obstacles");
    if (!arr.is_array()) invalid(f.name("obstacles"), "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields o(arr[i], f.name("obstacles") + "[" + std::to_string(i) + "]");
      boids::Obstacle ob{{o.required<double>("x"), o.required<double>("y")},
                         o.required<double>("radius"), o.get("w_avoid", 1.0)};
      check(ob.radius > 0.0, o, "radius", [] { return "must be > 0"; });
      check(ob.w_avoid >= 0.0, o, "w_avoid", [] { return "must be >= 0"; });
      o.finish();
      s.obstacles.push_back(ob);
    }
  }
  f.finish();
  return s;
}

inline void run_boids(const BoidsSpec& s, Seed seed, Artifacts& out) {
  Rng rng(seed);
  std::vector<boids::Boid> flock;
  if (s.disk_center) {
    flock = boids::disk_flock(s.n, *s.disk_center, s.disk_radius, s.initial_speed * s.params.v_max,
                              s.params.world, rng);
  } else {
    flock = boids::random_flock(s.n, s.params, rng);
  }
  std::ostringstream metrics;
  std::ostringstream trace;
  metrics << "step,centroid_msd,subflocks\n";
  trace << "step,boid,x,y,vx,vy\n";
  auto record = [&](int t) {
    metrics << t << ',' << num(boids::centroid_msd(flock, s.params.world)) << ','
            << (flock.empty() ? 0 : boids::subflock_count(flock, s.link_radius, s.params.world)) << '\n';
    if (!s.trace) return;
    for (std::size_t i = 0; i < flock.size(); ++i) {
      const auto& b = flock[i];
      trace << t << ',' << i << ',' << num(b.pos.x) << ',' << num(b.pos.y) << ',' << num(b.vel.x) << ','
            << num(b.vel.y) << '\n';
    }
  };
  record(0);
  for (int t = 1; t <= s.steps; ++t) {
    flock = boids::flock_step(flock, s.obstacles, s.params, s.dt);
    record(t);
  }
  out.write("metrics.csv", [&](std::ostream& o) { o << metrics.str(); });
  if (s.trace) out.write("trace.csv", [&](std::ostream& o) { o << trace.str(); });
}

struct ClusteringSpec {
  cluster::ClusterParams params;
  std::optional<fs::path> dataset;
  std::size_t n_items = 200;
  double separation = 10.0;
  double sigma = 1.0;
  long steps = 100000;
  long record_every = 1000;
  int patch = 10;
};

inline ClusteringSpec parse_clustering(Fields f) {
  ClusteringSpec s;
  auto& p = s.params;
  p.k1 = f.get("k1", p.k1);
  p.k2 = f.get("k2", p.k2);
  p.s = f.get("s", p.s);
  p.alpha_sim = f.get("alpha_sim", p.alpha_sim);
  p.alpha_scale = f.get("alpha_scale", p.alpha_scale);
  p.n_ants = f.get("n_ants", p.n_ants);
  p.dims = dims_from(f, p.dims);
  validated(p, "params");
  if (auto d = f.optional<std::string>("dataset")) s.dataset = *d;
  s.n_items = f.get("n_items", s.n_items);
  s.separation = f.get("separation", s.separation);
  s.sigma = f.get("sigma", s.sigma);
  s.steps = f.get("steps", s.steps);
  s.record_every = f.get("record_every", s.record_every);
  s.patch = f.get("patch", s.patch);
  check(s.steps >= 0, f, "steps", [] { return "must be >= 0"; });
  check(s.record_every >= 1, f, "record_every", [] { return "must be >= 1"; });
  check(s.patch >= 1 && p.dims.width % s.patch == 0 && p.dims.height % s.patch == 0, f, "patch",
        [] { return "must divide the grid width and height"; });
  check(s.sigma >= 0.0, f, "sigma", [] { return "must be >= 0"; });
  check(s.dataset || s.n_items <= p.dims.cells(), f, "n_items", [] { return "exceeds the grid cells"; });
  f.finish();
  return s;
}

inline GreyImage occupancy_image(const cluster::ClusterWorld& w) {
  GreyImage img{w.dims, std::vector<std::uint8_t>(w.cells.size(), 0)};
  for (std::size_t i = 0; i < w.cells.size(); ++i) img.pixels[i] = w.cells[i] == cluster::kEmpty ? 0 : 255;
  return img;
}

inline void run_clustering(const ClusteringSpec& s, Seed seed, Artifacts& out) {
  Rng rng(seed);
  std::vector<cluster::DataItem> items;
  if (s.dataset) {
    std::ifstream in(*s.dataset);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read dataset " + s.dataset->string());
    items = cluster::read_items_csv(in);
  } else {
    items = cluster::four_gaussians(s.n_items, s.separation, s.sigma, rng);
  }
  auto w = cluster::make_world(std::move(items), s.params, rng);
  out.write("layout-initial.pgm", [&](std::ostream& o) { write_pgm(o, occupancy_image(w)); });
  std::ostringstream metrics;
  metrics << "step,spatial_entropy,sameness_neighbourness,carried\n";
  auto record = [&](long t) {
    const auto placed = cluster::placements(w);
    const auto sn = placed.size() >= 2 ? cluster::sameness_neighbourness(placed, w.dims) : std::nullopt;
    metrics << t << ',' << num(cluster::spatial_entropy(w, s.patch)) << ',' << (sn ? num(*sn) : "") << ','
            << w.carried_count() << '\n';
  };
  record(0);
  for (long t = 1; t <= s.steps; ++t) {
    cluster::clustering_step(w, s.params, rng);
    if (t % s.record_every == 0 || t == s.steps) record(t);
  }
  out.write("metrics.csv", [&](std::ostream& o) { o << metrics.str(); });
  out.write("layout-final.pgm", [&](std::ostream& o) { write_pgm(o, occupancy_image(w)); });
  out.write("placements.csv", [&](std::ostream& o) {
    o << "id,x,y,carried\n";
    for (std::size_t i = 0; i < w.cells.size(); ++i) {
      if (w.cells[i] == cluster::kEmpty) continue;
      const Coord c = coord_of(i, w.dims);
      o << w.items[w.cells[i]].id << ',' << c.x << ',' << c.y << ",0\n";
    }
    for (const auto& a : w.ants) {
      if (a.carrying) o << w.items[*a.carrying].id << ',' << a.pos.x << ',' << a.pos.y << ",1\n";
    }
  });
}

// A habitat is a PGM path or a generator name: "two-blob" or "stripes".
inline trails::ImageHabitat load_habitat(const std::string& source, TorusDims dims, int period) {
  if (source == "two-blob") return trails::two_blob_habitat(dims);
  if (source == "stripes") return trails::stripe_habitat(dims, period);
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read habitat " + source);
  return read_pgm(in);
}

inline trails::TrailParams parse_trail_params(Fields& f) {
  trails::TrailParams p;
  p.beta = f.get("beta", p.beta);
  p.delta = f.get("delta", p.delta);
  p.eta = f.get("eta", p.eta);
  p.gamma = f.get("gamma", p.gamma);
  p.rho = f.get("rho", p.rho);
  p.n_ants = f.get("n_ants", p.n_ants);
  validated(p, "params");
  return p;
}

struct TrailsSpec {
  trails::TrailParams params;
  std::string habitat = "two-blob";
  TorusDims dims{32, 32};
  int period = 8;
  int steps = 1500;
  int snapshot_every = 0;
};

inline TrailsSpec parse_trails(Fields f) {
  TrailsSpec s;
  s.params = parse_trail_params(f);
  s.habitat = f.get("habitat", s.habitat);
  s.dims = dims_from(f, s.dims);
  s.period = f.get("period", s.period);
  s.steps = f.get("steps", s.steps);
  s.snapshot_every = f.get("snapshot_every", s.snapshot_every);
  check(s.period >= 2, f, "period", [] { return "must be >= 2"; });
  check(s.steps >= 0, f, "steps", [] { return "must be >= 0"; });
  check(s.snapshot_every >= 0, f, "snapshot_every", [] { return "must be >= 0"; });
  f.finish();
  return s;
}

inline void write_map_csv(std::ostream& o, const trails::CognitiveMap& m) {
  o << "x,y,height\n";
  for (std::size_t i = 0; i < m.height.size(); ++i) {
    const Coord c = coord_of(i, m.dims);
    o << c.x << ',' << c.y << ',' << num(m.height[i]) << '\n';
  }
}

inline void run_trails(const TrailsSpec& s, Seed seed, Artifacts& out) {
  const auto h = load_habitat(s.habitat, s.dims, s.period);
  Rng rng(seed);
  auto ants = trails::scatter_ants(s.params.n_ants, h.dims, rng);
  PheromoneField f(h.dims);
  std::vector<double> grey(h.pixels.begin(), h.pixels.end());
  std::ostringstream metrics;
  metrics << "step,total,max,habitat_correlation\n";
  auto record = [&](int t) {
    const auto r = pearson(f.values(), grey);
    metrics << t << ',' << num(f.total()) << ',' << num(f.max()) << ',' << (r ? num(*r) : "") << '\n';
    if (s.snapshot_every > 0 && t % s.snapshot_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "field-%06d.pgm", t);
      out.write(name, [&](std::ostream& o) { write_pgm(o, f); });
    }
  };
  record(0);
  for (int t = 1; t <= s.steps; ++t) {
    trails::colony_step(ants, f, h, s.params, rng);
    record(t);
  }
  out.write("metrics.csv", [&](std::ostream& o) { o << metrics.str(); });
  const auto map = trails::cognitive_map(f);
  out.write("cognitive_map.pgm", [&](std::ostream& o) { write_pgm(o, f); });
  out.write("cognitive_map.csv", [&](std::ostream& o) { write_map_csv(o, map); });
}

struct SwapSpec {
  trails::TrailParams params;
  trails::SwapConfig swap;
  std::string habitat_a = "two-blob";
  std::string habitat_b = "stripes";
  TorusDims dims{32, 32};
  int period = 8;
};

inline SwapSpec parse_swap(Fields f) {
  SwapSpec s;
  s.params = parse_trail_params(f);
  s.habitat_a = f.get("habitat_a", s.habitat_a);
  s.habitat_b = f.get("habitat_b", s.habitat_b);
  s.dims = dims_from(f, s.dims);
  s.period = f.get("period", s.period);
  auto& c = s.swap;
  c.steps_per_phase = f.get("steps_per_phase", c.steps_per_phase);
  c.reference_steps = f.get("reference_steps", c.reference_steps);
  c.reference_runs = f.get("reference_runs", c.reference_runs);
  c.threshold = f.get("threshold", c.threshold);
  check(s.period >= 2, f, "period", [] { return "must be >= 2"; });
  check(c.threshold > 0.0 && c.threshold <= 1.0, f, "threshold", [] { return "must lie in (0,1]"; });
  check(c.reference_runs >= 1, f, "reference_runs", [] { return "must be >= 1"; });
  f.finish();
  return s;
}

inline void run_swap(SwapSpec s, Seed seed, std::uint64_t pairs, Artifacts& out) {
  const auto a = load_habitat(s.habitat_a, s.dims, s.period);
  const auto b = load_habitat(s.habitat_b, s.dims, s.period);
  s.swap.seed = seed;
  s.swap.seeds = pairs;
  const auto r = trails::habitat_swap_experiment(a, b, s.params, s.swap);
  auto cell = [](std::optional<std::size_t> v) { return v ? std::to_string(*v) : std::string("none"); };
  out.write("metrics.csv", [&](std::ostream& o) {
    o << "pair,from_empty,from_trained,trained_not_faster\n";
    for (std::size_t k = 0; k < r.from_empty.size(); ++k) {
      o << k << ',' << cell(r.from_empty[k]) << ',' << cell(r.from_trained[k]) << ','
        << (trails::detail::not_faster(r.from_trained[k], r.from_empty[k]) ? 1 : 0) << '\n';
    }
  });
  out.write("summary.csv", [&](std::ostream& o) {
    o << "pairs,fraction_not_faster\n" << r.from_empty.size() << ',' << num(r.fraction_not_faster) << '\n';
  });
  out.write("reference_map.csv", [&](std::ostream& o) { write_map_csv(o, r.reference); });
}

struct AcoSpec {
  aco::AcoParams params;
  std::optional<fs::path> cities;
  std::optional<fs::path> matrix;
  std::size_t random_cities = 8;
  int iterations = 200;
};

inline AcoSpec parse_aco(Fields f) {
  AcoSpec s;
  auto& p = s.params;
  p.alpha = f.get("alpha", p.alpha);
  p.beta_vis = f.get("beta_vis", p.beta_vis);
  p.rho = f.get("rho", p.rho);
  p.q_deposit = f.get("q_deposit", p.q_deposit);
  p.n_ants = f.get("n_ants", p.n_ants);
  p.tau0 = f.get("tau0", p.tau0);
  p.tau_min = f.get("tau_min", p.tau_min);
  validated(p, "params");
  if (auto c = f.optional<std::string>("cities")) s.cities = *c;
  if (auto m = f.optional<std::string>("matrix")) s.matrix = *m;
  if (s.cities && s.matrix) invalid(f.name("matrix"), "give either cities or matrix, not both");
  s.random_cities = f.get("random_cities", s.random_cities);
  s.iterations = f.get("iterations", s.iterations);
  check(s.iterations >= 1, f, "iterations", [] { return "must be >= 1"; });
  check(s.random_cities >= 1, f, "random_cities", [] { return "must be >= 1"; });
  f.finish();
  return s;
}

inline void run_aco(const AcoSpec& s, Seed seed, Artifacts& out) {
  aco::TspInstance inst;
  Rng rng(seed);
  if (s.matrix) {
    std::ifstream in(*s.matrix);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + s.matrix->string());
    inst = aco::read_matrix_csv(in);
  } else if (s.cities) {
    std::ifstream in(*s.cities);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + s.cities->string());
    inst = aco::euclidean_instance(aco::read_cities_csv(in));
  } else {
    inst = aco::euclidean_instance(aco::random_cities(s.random_cities, rng));
  }
  const auto r = aco::solve(inst, s.params, s.iterations, Seed{rng.next_u64()});
  out.write("metrics.csv", [&](std::ostream& o) {
    o << "iteration,best_length\n";
    for (std::size_t i = 0; i < r.best_so_far.size(); ++i) o << i + 1 << ',' << num(r.best_so_far[i]) << '\n';
  });
  out.write("tour.csv", [&](std::ostream& o) {
    o << "position,city\n";
    for (std::size_t i = 0; i < r.best.order.size(); ++i) o << i << ',' << r.best.order[i] << '\n';
  });
}

inline evo::GaParams parse_ga_params(Fields& f) {
  evo::GaParams p;
  p.pop_size = f.get("pop_size", p.pop_size);
  p.pc = f.get("pc", p.pc);
  p.pm = f.get("pm", p.pm);
  p.p_inv = f.get("p_inv", p.p_inv);
  p.p_dup = f.get("p_dup", p.p_dup);
  p.elitism = f.get("elitism", p.elitism);
  p.max_gens = f.get("max_gens", p.max_gens);
  const auto sel = f.get<std::string>("selection", "roulette");
  if (sel == "roulette") {
    p.selection = evo::Selection::Roulette;
  } else if (sel == "tournament") {
    p.selection = evo::Selection::Tournament;
  } else {
    invalid(f.name("selection"), "must be roulette or tournament");
  }
  p.tournament_size = f.get("tournament_size", p.tournament_size);
  validated(p, "params");
  return p;
}

inline void write_ga_trace(Artifacts& out, const evo::EvolveResult& r) {
  out.write("metrics.csv", [&](std::ostream& o) {
    o << "generation,best,mean\n";
    for (std::size_t g = 0; g < r.trace.size(); ++g) {
      o << g << ',' << num(r.trace[g].best) << ',' << num(r.trace[g].mean) << '\n';
    }
  });
}

struct GaSpec {
  evo::GaParams params;
  std::size_t length = 32;
  bool stop_at_optimum = true;
};

inline GaSpec parse_ga(Fields f) {
  GaSpec s;
  s.params = parse_ga_params(f);
  s.params.pm = f.has("pm") ? s.params.pm : 1.0 / static_cast<double>(f.get("length", s.length));
  const auto problem = f.get<std::string>("problem", "onemax");
  if (problem != "onemax") invalid(f.name("problem"), "only onemax is available");
  s.length = f.get("length", s.length);
  s.stop_at_optimum = f.get("stop_at_optimum", s.stop_at_optimum);
  check(s.length >= 1, f, "length", [] { return "must be >= 1"; });
  f.finish();
  return s;
}

inline void run_ga(GaSpec s, Seed seed, Artifacts& out) {
  if (s.stop_at_optimum) s.params.optimum = static_cast<double>(s.length);
  const auto r = evo::evolve(evo::one_max, s.length, s.params, seed);
  write_ga_trace(out, r);
  out.write("results.csv", [&](std::ostream& o) {
    o << "best_genotype,best_fitness,generations\n"
      << r.best.str() << ',' << num(r.best_fitness) << ',' << r.trace.size() << '\n';
  });
}

struct GaCaSpec {
  evo::GaParams params;
  int target_rule = 90;
  int width = 8;
  int steps = 8;
};

inline GaCaSpec parse_ga_ca(Fields f) {
  GaCaSpec s;
  s.params = parse_ga_params(f);
  if (!f.has("pm")) s.params.pm = 1.0 / 8.0;
  s.target_rule = f.required<int>("target_rule");
  s.width = f.get("width", s.width);
  s.steps = f.get("steps", s.steps);
  check(s.target_rule >= 0 && s.target_rule <= 255, f, "target_rule", [] { return "must lie in 0..255"; });
  check(s.width >= 1, f, "width", [] { return "must be >= 1"; });
  check(s.steps >= 0, f, "steps", [] { return "must be >= 0"; });
  f.finish();
  return s;
}

inline void run_ga_ca(const GaCaSpec& s, Seed seed, Artifacts& out) {
  const auto target = ca::ca_run(ca::single_seed_row(s.width), ca::rule_from_number(s.target_rule), s.steps);
  const auto r = evo::evolve_ca_rule(target, s.params, seed);
  write_ga_trace(out, r.run);
  out.write("results.csv", [&](std::ostream& o) {
    o << "best_genotype,rule,fitness,generations\n"
      << r.run.best.str() << ',' << ca::rule_number(r.rule) << ',' << num(r.fitness) << ','
      << r.run.trace.size() << '\n';
  });
  out.write("target.pgm", [&](std::ostream& o) { ca::write_trajectory_pgm(o, target, 2); });
  out.write("recovered.pgm", [&](std::ostream& o) {
    ca::write_trajectory_pgm(o, ca::ca_run(target.front(), r.rule, s.steps), 2);
  });
}

// serve-habitat params map onto the service configuration.
inline mc2::ServiceConfig parse_serve(Fields f, const ExperimentConfig& cfg) {
  mc2::ServiceConfig s;
  s.data_dir = f.get<std::string>("data_dir", (cfg.output_dir / "habitat").string());
  s.host = f.get("host", s.host);
  s.port = f.get("port", s.port);
  check(s.port >= 0 && s.port <= 65535, f, "port", [] { return "must lie in 0..65535"; });
  s.genesis.dims = dims_from(f, s.genesis.dims);
  s.genesis.seed = cfg.seed;
  s.genesis.letters = f.get<std::string>("letters", "ANTSWARMHABITATWORDS");
  for (char c : s.genesis.letters) {
    if (c < 'A' || c > 'Z') invalid(f.name("letters"), "letters must be A-Z");
  }
  if (f.has("layout")) {
    const auto& arr = f.raw("layout");
    if (!arr.is_array()) invalid(f.name("layout"), "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields o(arr[i], f.name("layout") + "[" + std::to_string(i) + "]");
      const auto glyph = o.required<std::string>("glyph");
      if (glyph.size() != 1 || glyph[0] < 'A' || glyph[0] > 'Z') invalid(o.name("glyph"), "must be one letter A-Z");
      s.genesis.layout.push_back({o.required<std::string>("id"), glyph[0], {o.required<int>("x"), o.required<int>("y")}});
      o.finish();
    }
  }
  s.genesis.deposit_amount = f.get("deposit_amount", s.genesis.deposit_amount);
  check(s.genesis.deposit_amount > 0.0, f, "deposit_amount", [] { return "must be > 0"; });
  try {
    (void)mc2::genesis(s.genesis);
  } catch (const Error& e) {
    invalid(f.name("layout"), e.what());
  }
  if (f.has("lexicon")) {
    const auto& lex = f.raw("lexicon");
    std::vector<std::string> files;
    if (lex.is_string()) {
      files.push_back(lex.get<std::string>());
    } else if (lex.is_array()) {
      for (const auto& x : lex) {
        if (!x.is_string()) invalid(f.name("lexicon"), "entries must be file paths");
        files.push_back(x.get<std::string>());
      }
    } else {
      invalid(f.name("lexicon"), "must be a path or a list of paths");
    }
    for (const auto& path : files) {
      const auto words = mc2::read_lexicon_file(path);
      s.lexicon.insert(words.begin(), words.end());
    }
  }
  s.tick_interval = std::chrono::milliseconds(f.get<std::int64_t>("tick_interval_ms", s.tick_interval.count()));
  check(s.tick_interval.count() >= 0, f, "tick_interval_ms", [] { return "must be >= 0"; });
  s.tick_rho = f.get("tick_rho", s.tick_rho);
  check(s.tick_rho >= 0.0 && s.tick_rho <= 1.0, f, "tick_rho", [] { return "must lie in [0,1]"; });
  s.snapshot_every = f.get("snapshot_every", s.snapshot_every);
  s.resistance_k = f.get("resistance_k", s.resistance_k);
  f.finish();
  return s;
}

inline std::string utc_now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunSummary {
  fs::path output_dir;
  std::vector<std::string> artifacts;
};

// Validates every parameter first, then runs each ensemble member into its
// own directory (seed-<k>/ when seeds > 1) and writes manifest.json.
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
  Fields f(cfg.params, "params");
  std::function<void(Seed, Artifacts&)> member;
  bool ensemble = true;
  if (cfg.kind == "ca") {
    member = [s = parse_ca(f)](Seed seed, Artifacts& a) { run_ca(s, seed, a); };
  } else if (cfg.kind == "boids") {
    member = [s = parse_boids(f)](Seed seed, Artifacts& a) { run_boids(s, seed, a); };
  } else if (cfg.kind == "clustering") {
    member = [s = parse_clustering(f)](Seed seed, Artifacts& a) { run_clustering(s, seed, a); };
  } else if (cfg.kind == "trails") {
    member = [s = parse_trails(f)](Seed seed, Artifacts& a) { run_trails(s, seed, a); };
  } else if (cfg.kind == "habitat-swap") {
    ensemble = false;
    member = [s = parse_swap(f), pairs = cfg.seeds](Seed seed, Artifacts& a) { run_swap(s, seed, pairs, a); };
  } else if (cfg.kind == "aco") {
    member = [s = parse_aco(f)](Seed seed, Artifacts& a) { run_aco(s, seed, a); };
  } else if (cfg.kind == "ga") {
    member = [s = parse_ga(f)](Seed seed, Artifacts& a) { run_ga(s, seed, a); };
  } else if (cfg.kind == "ga-ca") {
    member = [s = parse_ga_ca(f)](Seed seed, Artifacts& a) { run_ga_ca(s, seed, a); };
  } else {
    invalid("kind", "'" + cfg.kind + "' is not a batch experiment");
  }

  Artifacts root(cfg.output_dir);
  json seeds = json::array();
  if (!ensemble || cfg.seeds == 1) {
    member(Seed{cfg.seed}, root);
    seeds.push_back(cfg.seed);
  } else {
    for (std::uint64_t k = 0; k < cfg.seeds; ++k) {
      const Seed s = member_seed(Seed{cfg.seed}, k);
      const std::string sub = "seed-" + std::to_string(k);
      Artifacts a(cfg.output_dir / sub);
      member(s, a);
      for (const auto& file : a.files()) root.note(fs::path(sub) / file);
      seeds.push_back(s.value);
    }
  }
  std::vector<std::string> artifacts = root.files();
  const json manifest = {{"manifest_version", 1},
                         {"tool", "swarm-workbench"},
                         {"tool_version", kToolVersion},
                         {"config", cfg.to_json()},
                         {"seeds", seeds},
                         {"artifacts", artifacts},
                         {"created_utc", utc_now_iso()}};
  root.write("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  return {cfg.output_dir, artifacts};
}

}  // namespace swarm::workbench
