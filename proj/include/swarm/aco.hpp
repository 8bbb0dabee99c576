#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/rng.hpp"

namespace swarm::aco {

// Square matrix stored row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct TspInstance {
  Matrix dist;

  std::size_t n() const noexcept { return dist.size(); }

  void validate() const {
    if (n() < 1) throw Error(ErrorCode::InvalidArgument, "instance needs at least one city");
    for (std::size_t i = 0; i < n(); ++i) {
      if (dist(i, i) != 0.0) throw Error(ErrorCode::InvalidArgument, "distance diagonal must be zero");
      for (std::size_t j = 0; j < n(); ++j) {
        if (!(dist(i, j) >= 0.0) || dist(i, j) != dist(j, i)) {
          throw Error(ErrorCode::InvalidArgument, "distances must be symmetric and non-negative");
        }
      }
    }
  }
};

struct City {
  double x = 0.0;
  double y = 0.0;
};

inline TspInstance euclidean_instance(std::span<const City> cities) {
  TspInstance inst{Matrix(cities.size(), 0.0)};
  for (std::size_t i = 0; i < cities.size(); ++i) {
    for (std::size_t j = 0; j < cities.size(); ++j) {
      inst.dist(i, j) = std::hypot(cities[i].x - cities[j].x, cities[i].y - cities[j].y);
    }
  }
  return inst;
}

inline std::vector<City> random_cities(std::size_t n, Rng& rng) {
  std::vector<City> out(n);
  for (auto& c : out) c = {rng.uniform(), rng.uniform()};
  return out;
}

struct AcoParams {
  double alpha = 1.0;
  double beta_vis = 2.0;
  double rho = 0.1;
  double q_deposit = 1.0;
  int n_ants = 20;
  double tau0 = 1.0;
  double tau_min = 1e-9;
  // Stand-in for 1/d when d == 0.
  double visibility_cap = 1e9;

  void validate() const {
    if (!(alpha >= 0.0) || !(beta_vis >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "alpha and beta_vis must be >= 0");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::RhoOutOfRange, "rho must lie in [0,1]");
    if (!(q_deposit > 0.0) || !(tau0 > 0.0) || !(tau_min >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "q_deposit, tau0 must be > 0 and tau_min >= 0");
    }
    if (n_ants < 1) throw Error(ErrorCode::InvalidArgument, "n_ants must be >= 1");
  }
};

struct Tour {
  std::vector<std::size_t> order;
  double length = 0.0;
};

inline bool is_permutation_of_n(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto c : order) {
    if (c >= n || seen[c]) return false;
    seen[c] = true;
  }
  return true;
}

// Cyclic length, return edge included.
inline double tour_length(std::span<const std::size_t> order, const TspInstance& inst) {
  if (!is_permutation_of_n(order, inst.n())) {
    throw Error(ErrorCode::NotAPermutation, "tour is not a permutation of the cities");
  }
  double len = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    len += inst.dist(order[k], order[(k + 1) % order.size()]);
  }
  return len;
}

inline Matrix initial_pheromone(const TspInstance& inst, const AcoParams& p) {
  return Matrix(inst.n(), std::max(p.tau0, p.tau_min));
}

// Attractiveness tau^alpha * (1/d)^beta of moving i -> j.
inline double edge_weight(std::size_t i, std::size_t j, const TspInstance& inst, const Matrix& tau,
                          const AcoParams& p) {
  const double d = inst.dist(i, j);
  const double vis = d > 0.0 ? 1.0 / d : p.visibility_cap;
  return std::pow(tau(i, j), p.alpha) * std::pow(vis, p.beta_vis);
}

// Probabilities of each unvisited city as the next step from `from`
// (zero for visited ones).
inline std::vector<double> next_city_distribution(std::size_t from, const std::vector<bool>& visited,
                                                  const TspInstance& inst, const Matrix& tau,
                                                  const AcoParams& p) {
  std::vector<double> w(inst.n(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < inst.n(); ++j) {
    if (visited[j]) continue;
    w[j] = edge_weight(from, j, inst, tau, p);
    total += w[j];
  }
  if (total > 0.0) {
    for (auto& x : w) x /= total;
  } else {
    // every candidate underflowed: uniform over the unvisited
    std::size_t open = 0;
    for (std::size_t j = 0; j < inst.n(); ++j) open += !visited[j];
    for (std::size_t j = 0; j < inst.n(); ++j) w[j] = visited[j] ? 0.0 : 1.0 / static_cast<double>(open);
  }
  return w;
}

inline Tour construct_tour(const TspInstance& inst, const Matrix& tau, const AcoParams& p, Rng& rng) {
  const std::size_t n = inst.n();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "instance needs at least one city");
  std::vector<bool> visited(n, false);
  Tour t;
  t.order.reserve(n);
  std::size_t current = static_cast<std::size_t>(rng.below(n));
  visited[current] = true;
  t.order.push_back(current);
  while (t.order.size() < n) {
    const auto probs = next_city_distribution(current, visited, inst, tau, p);
    current = rng.weighted_index(probs);
    visited[current] = true;
    t.order.push_back(current);
  }
  t.length = tour_length(t.order, inst);
  return t;
}

// Evaporate with the tau_min floor, then every tour deposits
// q_deposit / length on each of its edges, both directions.
inline void update_pheromone(Matrix& tau, std::span<const Tour> tours, const AcoParams& p) {
  const std::size_t n = tau.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) tau(i, j) = std::max(p.tau_min, (1.0 - p.rho) * tau(i, j));
  }
  for (const auto& t : tours) {
    if (t.order.size() < 2) continue;
    const double amount = t.length > 0.0 ? p.q_deposit / t.length : 0.0;
    for (std::size_t k = 0; k < t.order.size(); ++k) {
      const auto a = t.order[k];
      const auto b = t.order[(k + 1) % t.order.size()];
      if (a == b) continue;
      tau(a, b) += amount;
      tau(b, a) = tau(a, b);
    }
  }
}

struct SolveResult {
  Tour best;
  std::vector<double> best_so_far;  // one entry per iteration
};

inline SolveResult solve(const TspInstance& inst, const AcoParams& p, int iterations, Seed seed) {
  inst.validate();
  p.validate();
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  Rng rng(seed);
  Matrix tau = initial_pheromone(inst, p);
  SolveResult out;
  out.best.length = std::numeric_limits<double>::infinity();
  std::vector<Tour> tours(static_cast<std::size_t>(p.n_ants));
  for (int it = 0; it < iterations; ++it) {
    for (auto& t : tours) {
      t = construct_tour(inst, tau, p, rng);
      if (t.length < out.best.length) out.best = t;
    }
    update_pheromone(tau, tours, p);
    out.best_so_far.push_back(out.best.length);
  }
  return out;
}

// Exhaustive optimum with city 0 fixed first; fine up to ~10 cities.
inline double brute_force_optimum(const TspInstance& inst) {
  const std::size_t n = inst.n();
  if (n <= 1) return 0.0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, tour_length(order, inst));
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return best;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

inline double to_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "non-numeric CSV field '" + s + "'");
  }
}

}  // namespace detail

// City coordinates CSV: header `id,x,y`, one row per city, ids ignored
// beyond ordering.
inline std::vector<City> read_cities_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "empty city file");
  const auto header = detail::split_csv(line);
  if (header.size() != 3 || header[1] != "x" || header[2] != "y") {
    throw Error(ErrorCode::InvalidArgument, "city CSV header must be id,x,y");
  }
  std::vector<City> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto row = detail::split_csv(line);
    if (row.size() != 3) throw Error(ErrorCode::InvalidArgument, "bad city row: " + line);
    out.push_back({detail::to_number(row[1]), detail::to_number(row[2])});
  }
  return out;
}

// Explicit distance matrix CSV: n rows of n numbers, no header.
inline TspInstance read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const auto& cell : detail::split_csv(line)) row.push_back(detail::to_number(cell));
    rows.push_back(std::move(row));
  }
  TspInstance inst{Matrix(rows.size(), 0.0)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw Error(ErrorCode::InvalidArgument, "distance matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) inst.dist(i, j) = rows[i][j];
  }
  inst.validate();
  return inst;
}

}  // namespace swarm::aco
