#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/torus.hpp"

namespace swarm {

// Non-negative scalar field over a toroidal lattice; the swarm's external
// memory. Single writer: do not mutate one field from two threads.
class PheromoneField {
 public:
  PheromoneField() : PheromoneField(TorusDims{1, 1}) {}

  explicit PheromoneField(TorusDims dims) : dims_(dims) {
    dims_.validate();
    values_.assign(dims_.cells(), 0.0);
  }

  PheromoneField(TorusDims dims, std::vector<double> values) : dims_(dims) {
    dims_.validate();
    if (values.size() != dims_.cells()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "field has " + std::to_string(values.size()) +
                      " values for " + std::to_string(dims_.cells()) +
                      " cells");
    }
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::NegativeAmount,
                    "field values must be finite and non-negative");
      }
    }
    values_ = std::move(values);
  }

  TorusDims dims() const noexcept { return dims_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(Coord c) const { return values_[cell_index(c, dims_)]; }

  void deposit(Coord c, double amount) {
    if (!(amount >= 0.0)) {
      throw Error(ErrorCode::NegativeAmount,
                  "deposit amount must be >= 0, got " + std::to_string(amount));
    }
    values_[cell_index(c, dims_)] += amount;
  }

  // v <- (1 - rho) v everywhere.
  void evaporate(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
      throw Error(ErrorCode::RhoOutOfRange,
                  "rho must lie in [0,1], got " + std::to_string(rho));
    }
    const double keep = 1.0 - rho;
    for (double& v : values_) v *= keep;
  }

  // Mass-conserving 4-neighbor smoothing:
  // v'(c) = (1 - alpha) v(c) + alpha/4 * sum of the Von Neumann neighbors.
  void diffuse(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::AlphaOutOfRange,
                  "alpha must lie in [0,1], got " + std::to_string(alpha));
    }
    if (alpha == 0.0) return;
    std::vector<double> next(values_.size());
    const int w = dims_.width;
    const int h = dims_.height;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double around = at({x - 1, y}) + at({x + 1, y}) +
                              at({x, y - 1}) + at({x, y + 1});
        next[cell_index({x, y}, dims_)] =
            (1.0 - alpha) * at({x, y}) + 0.25 * alpha * around;
      }
    }
    values_ = std::move(next);
  }

  double total() const noexcept {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
  }

  double max() const noexcept {
    return values_.empty() ? 0.0
                           : *std::max_element(values_.begin(), values_.end());
  }

  friend bool operator==(const PheromoneField&, const PheromoneField&) = default;

 private:
  TorusDims dims_;
  std::vector<double> values_;
};

}  // namespace swarm
