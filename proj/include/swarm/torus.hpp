#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#include "swarm/error.hpp"

namespace swarm {

struct TorusDims {
  int width = 1;
  int height = 1;

  std::size_t cells() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  void validate() const {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "torus dims must be positive, got " + std::to_string(width) +
                      "x" + std::to_string(height));
    }
  }

  friend bool operator==(const TorusDims&, const TorusDims&) = default;
};

struct Coord {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Coord&, const Coord&) = default;
};

inline int wrap_index(long long v, int extent) noexcept {
  long long m = v % extent;
  if (m < 0) m += extent;
  return static_cast<int>(m);
}

inline Coord torus_wrap(Coord c, TorusDims d) noexcept {
  return {wrap_index(c.x, d.width), wrap_index(c.y, d.height)};
}

// Row-major cell index of a coordinate (wrapped first).
inline std::size_t cell_index(Coord c, TorusDims d) noexcept {
  const Coord w = torus_wrap(c, d);
  return static_cast<std::size_t>(w.y) * static_cast<std::size_t>(d.width) +
         static_cast<std::size_t>(w.x);
}

inline Coord coord_of(std::size_t index, TorusDims d) noexcept {
  return {static_cast<int>(index % static_cast<std::size_t>(d.width)),
          static_cast<int>(index / static_cast<std::size_t>(d.width))};
}

// Shortest signed displacement from a to b on a ring of the given extent.
inline int torus_delta(int a, int b, int extent) noexcept {
  int d = wrap_index(static_cast<long long>(b) - a, extent);
  if (2 * d > extent) d -= extent;
  return d;
}

inline double torus_delta(double a, double b, double extent) noexcept {
  double d = std::fmod(b - a, extent);
  if (d > 0.5 * extent) d -= extent;
  if (d < -0.5 * extent) d += extent;
  return d;
}

inline double torus_wrap(double v, double extent) noexcept {
  double m = std::fmod(v, extent);
  if (m < 0.0) m += extent;
  if (m >= extent) m = 0.0;  // -tiny + extent rounds to extent
  return m;
}

// Euclidean distance between two cells using the shortest wrapped offsets.
inline double torus_distance(Coord a, Coord b, TorusDims d) noexcept {
  const double dx = torus_delta(a.x, b.x, d.width);
  const double dy = torus_delta(a.y, b.y, d.height);
  return std::sqrt(dx * dx + dy * dy);
}

// The 8 Moore offsets in row-major order.
inline constexpr Coord kMooreSteps[8] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                         {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

enum class NeighborhoodKind { Moore, VonNeumann };

struct Neighborhood {
  NeighborhoodKind kind = NeighborhoodKind::Moore;
  int radius = 1;
};

constexpr std::size_t neighborhood_size(Neighborhood n) noexcept {
  const auto r = static_cast<std::size_t>(n.radius);
  return n.kind == NeighborhoodKind::Moore ? (2 * r + 1) * (2 * r + 1) - 1
                                           : 2 * r * (r + 1);
}

// Neighbors of c, center excluded, in row-major offset order (dy outer,
// dx inner). Entries are wrapped; on a torus smaller than the kernel the
// same cell can appear several times.
inline std::vector<Coord> neighborhood(Coord c, Neighborhood n, TorusDims d) {
  if (n.radius < 1) {
    throw Error(ErrorCode::InvalidArgument, "neighborhood radius must be >= 1");
  }
  std::vector<Coord> out;
  out.reserve(neighborhood_size(n));
  for (int dy = -n.radius; dy <= n.radius; ++dy) {
    for (int dx = -n.radius; dx <= n.radius; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (n.kind == NeighborhoodKind::VonNeumann &&
          std::abs(dx) + std::abs(dy) > n.radius) {
        continue;
      }
      out.push_back(torus_wrap({c.x + dx, c.y + dy}, d));
    }
  }
  return out;
}

}  // namespace swarm
