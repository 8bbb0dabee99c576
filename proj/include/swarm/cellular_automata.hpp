#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/pgm.hpp"
#include "swarm/torus.hpp"

namespace swarm::ca {

// Transition table of a finite automaton lattice.
//
// Neighborhood encoding (mixed radix, base `states`, most significant first):
//   1D, radius r (arity 2r+1): offsets dx = -r .. r, so for an elementary
//     rule the triple (l, c, r) lands at index 4l + 2c + r.
//   2D, Moore radius 1 with self (arity 9): offsets row-major,
//     (dx,dy) = (-1,-1), (0,-1), (1,-1), (-1,0), (0,0), ... (1,1).
// table[index] is the next state for that configuration.
struct RuleTable {
  int states = 2;
  int arity = 3;
  std::vector<std::uint8_t> table;

  std::size_t size() const noexcept { return table.size(); }

  void validate() const {
    if (states < 2 || states > 255) {
      throw Error(ErrorCode::InvalidArgument, "rule needs 2..255 states");
    }
    if (arity < 1) throw Error(ErrorCode::InvalidArgument, "rule arity must be >= 1");
    std::size_t expected = 1;
    for (int i = 0; i < arity; ++i) {
      expected *= static_cast<std::size_t>(states);
      if (expected > (std::size_t{1} << 28)) {
        throw Error(ErrorCode::InvalidArgument, "rule table too large");
      }
    }
    if (table.size() != expected) {
      throw Error(ErrorCode::DimensionMismatch,
                  "rule table has " + std::to_string(table.size()) +
                      " entries, expected " + std::to_string(expected));
    }
    for (auto v : table) {
      if (v >= states) throw Error(ErrorCode::OutOfRange, "rule output >= states");
    }
  }

  friend bool operator==(const RuleTable&, const RuleTable&) = default;
};

struct CAState {
  TorusDims dims;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(Coord c) const { return cells[cell_index(c, dims)]; }

  friend bool operator==(const CAState&, const CAState&) = default;
};

inline CAState make_state(TorusDims dims, std::vector<std::uint8_t> cells) {
  dims.validate();
  if (cells.size() != dims.cells()) {
    throw Error(ErrorCode::DimensionMismatch, "cell count does not match dims");
  }
  return {dims, std::move(cells)};
}

// 1D row of `width` cells with a single 1 in the middle.
inline CAState single_seed_row(int width) {
  CAState s{{width, 1}, std::vector<std::uint8_t>(static_cast<std::size_t>(width), 0)};
  s.cells[static_cast<std::size_t>(width / 2)] = 1;
  return s;
}

inline RuleTable rule_from_number(int n) {
  if (n < 0 || n > 255) {
    throw Error(ErrorCode::OutOfRange,
                "elementary rule number must be 0..255, got " + std::to_string(n));
  }
  RuleTable r{2, 3, std::vector<std::uint8_t>(8)};
  for (int i = 0; i < 8; ++i) r.table[static_cast<std::size_t>(i)] = (n >> i) & 1;
  return r;
}

// Inverse of rule_from_number for binary arity-3 tables.
inline int rule_number(const RuleTable& r) {
  if (r.states != 2 || r.arity != 3 || r.table.size() != 8) {
    throw Error(ErrorCode::InvalidArgument, "not an elementary rule table");
  }
  int n = 0;
  for (int i = 0; i < 8; ++i) n |= (r.table[static_cast<std::size_t>(i)] & 1) << i;
  return n;
}

// Identity rule: the output is the center cell's state.
inline RuleTable identity_rule(int states, int arity) {
  RuleTable r{states, arity, {}};
  std::size_t n = 1;
  for (int i = 0; i < arity; ++i) n *= static_cast<std::size_t>(states);
  r.table.resize(n);
  const int center = arity / 2;  // middle digit for both 1D and 3x3 layouts
  std::size_t place = 1;
  for (int i = 0; i < arity - 1 - center; ++i) place *= static_cast<std::size_t>(states);
  for (std::size_t idx = 0; idx < n; ++idx) {
    r.table[idx] = static_cast<std::uint8_t>((idx / place) % static_cast<std::size_t>(states));
  }
  return r;
}

namespace detail {

inline bool is_1d(const CAState& s) { return s.dims.height == 1; }

inline void check_compatible(const CAState& s, const RuleTable& r) {
  r.validate();
  if (s.cells.size() != s.dims.cells()) {
    throw Error(ErrorCode::DimensionMismatch, "state cell count does not match dims");
  }
  if (is_1d(s)) {
    if (r.arity % 2 == 0) {
      throw Error(ErrorCode::DimensionMismatch, "1D rules need odd arity");
    }
  } else if (r.arity != 9) {
    throw Error(ErrorCode::DimensionMismatch,
                "2D lattices use the 3x3 Moore neighborhood (arity 9), rule has arity " +
                    std::to_string(r.arity));
  }
  for (auto v : s.cells) {
    if (v >= r.states) throw Error(ErrorCode::DimensionMismatch, "cell state >= rule states");
  }
}

}  // namespace detail

// Synchronous update: every cell reads its neighborhood from the old state.
inline CAState ca_step(const CAState& s, const RuleTable& r) {
  detail::check_compatible(s, r);
  CAState next{s.dims, std::vector<std::uint8_t>(s.cells.size())};
  const auto k = static_cast<std::size_t>(r.states);
  if (detail::is_1d(s)) {
    const int radius = r.arity / 2;
    for (int x = 0; x < s.dims.width; ++x) {
      std::size_t idx = 0;
      for (int dx = -radius; dx <= radius; ++dx) {
        idx = idx * k + s.at({x + dx, 0});
      }
      next.cells[static_cast<std::size_t>(x)] = r.table[idx];
    }
  } else {
    for (int y = 0; y < s.dims.height; ++y) {
      for (int x = 0; x < s.dims.width; ++x) {
        std::size_t idx = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) idx = idx * k + s.at({x + dx, y + dy});
        }
        next.cells[cell_index({x, y}, s.dims)] = r.table[idx];
      }
    }
  }
  return next;
}

// trajectory[0] = s, trajectory[t+1] = ca_step(trajectory[t]).
inline std::vector<CAState> ca_run(const CAState& s, const RuleTable& r, int steps) {
  if (steps < 0) throw Error(ErrorCode::InvalidArgument, "steps must be >= 0");
  detail::check_compatible(s, r);
  std::vector<CAState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(s);
  for (int t = 0; t < steps; ++t) out.push_back(ca_step(out.back(), r));
  return out;
}

// Greyscale rendering: state v of k maps to round(255 v / (k - 1)).
// A 1D trajectory is one image with one row per time step; a 2D trajectory
// is written as consecutive P2 frames in a single stream.
inline void write_trajectory_pgm(std::ostream& out, const std::vector<CAState>& traj,
                                 int states) {
  if (traj.empty()) return;
  auto grey = [states](std::uint8_t v) {
    return static_cast<std::uint8_t>(std::lround(255.0 * v / (states - 1)));
  };
  if (traj.front().dims.height == 1) {
    GreyImage img{{traj.front().dims.width, static_cast<int>(traj.size())}, {}};
    for (const auto& row : traj) {
      for (auto v : row.cells) img.pixels.push_back(grey(v));
    }
    write_pgm(out, img);
    return;
  }
  for (const auto& frame : traj) {
    GreyImage img{frame.dims, {}};
    for (auto v : frame.cells) img.pixels.push_back(grey(v));
    write_pgm(out, img);
  }
}

}  // namespace swarm::ca
