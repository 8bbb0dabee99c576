#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/rng.hpp"
#include "swarm/torus.hpp"

namespace swarm::boids {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;

  double norm() const { return std::hypot(x, y); }
};

struct Boid {
  Vec2 pos;
  Vec2 vel;

  friend bool operator==(const Boid&, const Boid&) = default;
};

struct World {
  double width = 100.0;
  double height = 100.0;
};

// Defaults are calibrated for the cohesion and split/merge scenarios in the
// test suite; they are not physical constants.
struct BoidParams {
  double r_sep = 2.0;
  double r_neigh = 40.0;
  double w_sep = 0.1;
  double w_align = 0.1;
  double w_coh = 0.01;
  double v_max = 1.0;
  // Optional cruise floor; 0 disables it. Nonzero speeds below v_min are
  // scaled up to v_min after the v_max clamp.
  double v_min = 0.0;
  World world{};

  void validate() const {
    if (!(r_sep > 0.0) || !(r_neigh >= r_sep) || !(v_max > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "boid radii must satisfy 0 < r_sep <= r_neigh and v_max > 0");
    }
    if (!(v_min >= 0.0 && v_min <= v_max)) {
      throw Error(ErrorCode::InvalidArgument, "v_min must lie in [0, v_max]");
    }
    if (w_sep < 0.0 || w_align < 0.0 || w_coh < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "boid weights must be non-negative");
    }
    if (!(world.width > 0.0) || !(world.height > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "world extent must be positive");
    }
  }
};

struct Obstacle {
  Vec2 center;
  double radius = 1.0;
  double w_avoid = 1.0;
};

// Shortest displacement from a to b on the world torus.
inline Vec2 displacement(Vec2 a, Vec2 b, const World& w) {
  return {torus_delta(a.x, b.x, w.width), torus_delta(a.y, b.y, w.height)};
}

inline Vec2 wrap(Vec2 p, const World& w) {
  return {torus_wrap(p.x, w.width), torus_wrap(p.y, w.height)};
}

// Boids within r_neigh of flock[self] (toroidal metric), self excluded.
inline std::vector<Boid> neighbors_of(std::span<const Boid> flock, std::size_t self,
                                      const BoidParams& p) {
  std::vector<Boid> out;
  for (std::size_t j = 0; j < flock.size(); ++j) {
    if (j == self) continue;
    if (displacement(flock[self].pos, flock[j].pos, p.world).norm() <= p.r_neigh) {
      out.push_back(flock[j]);
    }
  }
  return out;
}

// Radial push away from the obstacle center, magnitude w_avoid / d, active
// while the boid is closer than twice the obstacle radius.
inline Vec2 obstacle_repulsion(const Boid& b, std::span<const Obstacle> obstacles,
                               const World& w) {
  Vec2 acc;
  for (const auto& o : obstacles) {
    const Vec2 away = displacement(o.center, b.pos, w);
    const double d = away.norm();
    if (d >= 2.0 * o.radius) continue;
    if (d == 0.0) continue;  // direction undefined at the exact center
    acc += (o.w_avoid / d) * (away / d);
  }
  return acc;
}

inline Vec2 steer(const Boid& b, std::span<const Boid> neighbors,
                  std::span<const Obstacle> obstacles, const BoidParams& p) {
  Vec2 acc = obstacle_repulsion(b, obstacles, p.world);
  if (neighbors.empty()) return acc;

  Vec2 separation;
  Vec2 mean_vel;
  Vec2 mean_offset;
  for (const auto& n : neighbors) {
    const Vec2 to_n = displacement(b.pos, n.pos, p.world);
    const double d = to_n.norm();
    if (d < p.r_sep && d > 0.0) separation -= to_n / d;
    mean_vel += n.vel;
    mean_offset += to_n;
  }
  const auto count = static_cast<double>(neighbors.size());
  mean_vel = mean_vel / count;
  mean_offset = mean_offset / count;  // centroid - pos, measured on the torus

  acc += p.w_sep * separation;
  acc += p.w_align * (mean_vel - b.vel);
  acc += p.w_coh * mean_offset;
  return acc;
}

inline Vec2 clamp_speed(Vec2 v, double v_max, double v_min = 0.0) {
  const double s = v.norm();
  if (s > v_max) return (v_max / s) * v;
  if (s < v_min && s > 0.0) return (v_min / s) * v;
  return v;
}

// Semi-implicit Euler from the old snapshot: vel first, then position.
inline std::vector<Boid> flock_step(std::span<const Boid> flock,
                                    std::span<const Obstacle> obstacles,
                                    const BoidParams& p, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
  std::vector<Boid> next(flock.size());
  for (std::size_t i = 0; i < flock.size(); ++i) {
    const auto near = neighbors_of(flock, i, p);
    const Vec2 acc = steer(flock[i], near, obstacles, p);
    const Vec2 vel = clamp_speed(flock[i].vel + dt * acc, p.v_max, p.v_min);
    next[i] = {wrap(flock[i].pos + dt * vel, p.world), vel};
  }
  return next;
}

// Connected components of the graph linking boids within link_radius.
inline std::size_t subflock_count(std::span<const Boid> flock, double link_radius,
                                  const World& w) {
  if (!(link_radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "link_radius must be > 0");
  }
  std::vector<std::size_t> parent(flock.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::size_t components = flock.size();
  for (std::size_t i = 0; i < flock.size(); ++i) {
    for (std::size_t j = i + 1; j < flock.size(); ++j) {
      if (displacement(flock[i].pos, flock[j].pos, w).norm() > link_radius) continue;
      const auto a = find(i);
      const auto b = find(j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

// Centroid on the torus via the circular mean of each axis.
inline Vec2 torus_centroid(std::span<const Boid> flock, const World& w) {
  constexpr double two_pi = 6.283185307179586;
  double cx = 0, sx = 0, cy = 0, sy = 0;
  for (const auto& b : flock) {
    const double ax = two_pi * b.pos.x / w.width;
    const double ay = two_pi * b.pos.y / w.height;
    cx += std::cos(ax); sx += std::sin(ax);
    cy += std::cos(ay); sy += std::sin(ay);
  }
  const double ax = std::atan2(sx, cx);
  const double ay = std::atan2(sy, cy);
  return wrap({ax / two_pi * w.width, ay / two_pi * w.height}, w);
}

// Mean squared toroidal distance to the flock centroid.
inline double centroid_msd(std::span<const Boid> flock, const World& w) {
  if (flock.empty()) return 0.0;
  const Vec2 c = torus_centroid(flock, w);
  double acc = 0.0;
  for (const auto& b : flock) {
    const Vec2 d = displacement(c, b.pos, w);
    acc += d.x * d.x + d.y * d.y;
  }
  return acc / static_cast<double>(flock.size());
}

// Uniform positions over the world, velocities uniform in the v_max disk.
inline std::vector<Boid> random_flock(std::size_t n, const BoidParams& p, Rng& rng) {
  std::vector<Boid> out(n);
  for (auto& b : out) {
    b.pos = {rng.uniform(0.0, p.world.width), rng.uniform(0.0, p.world.height)};
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double speed = p.v_max * std::sqrt(rng.uniform());
    b.vel = {speed * std::cos(angle), speed * std::sin(angle)};
  }
  return out;
}

// Compact start: positions uniform in a disk, every boid heading +x at
// `speed` with a small random vertical component.
inline std::vector<Boid> disk_flock(std::size_t n, Vec2 center, double radius, double speed,
                                    const World& w, Rng& rng) {
  std::vector<Boid> out(n);
  for (auto& b : out) {
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double r = radius * std::sqrt(rng.uniform());
    b.pos = wrap({center.x + r * std::cos(angle), center.y + r * std::sin(angle)}, w);
    b.vel = {speed, rng.uniform(-0.1, 0.1)};
  }
  return out;
}

}  // namespace swarm::boids
