#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "swarm/aco.hpp"

using namespace swarm;
using namespace swarm::aco;

namespace {

TspInstance from_rows(const std::vector<std::vector<double>>& rows) {
  TspInstance inst{Matrix(rows.size(), 0.0)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) inst.dist(i, j) = rows[i][j];
  }
  return inst;
}

TspInstance equilateral() { return from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}); }

TspInstance unit_square() {
  const std::vector<City> c{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return euclidean_instance(c);
}

// Every ordering of every city, no symmetry reduction.
double all_orders_optimum(const TspInstance& inst) {
  std::vector<std::size_t> order(inst.n());
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double len = 0;
    for (std::size_t k = 0; k < order.size(); ++k) len += inst.dist(order[k], order[(k + 1) % order.size()]);
    best = std::min(best, len);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace

TEST(TourLength, Examples) {
  const auto one = from_rows({{0}});
  EXPECT_EQ(tour_length(std::vector<std::size_t>{0}, one), 0.0);
  EXPECT_EQ(tour_length(std::vector<std::size_t>{0, 1, 2, 3}, unit_square()), 4.0);
  std::vector<std::size_t> o{0, 1, 2};
  do {
    EXPECT_EQ(tour_length(o, equilateral()), 3.0);
  } while (std::next_permutation(o.begin(), o.end()));
}

TEST(TourLength, NotAPermutation) {
  for (const auto& bad : {std::vector<std::size_t>{0, 0, 1, 2}, std::vector<std::size_t>{0, 1, 2}, std::vector<std::size_t>{0, 1, 2, 4}}) {
    try {
      tour_length(bad, unit_square());
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotAPermutation);
    }
  }
}

TEST(NextCity, BetaZeroUniformTauIsEvenSplit) {
  AcoParams p;
  p.beta_vis = 0;
  const auto inst = from_rows({{0, 1, 5}, {1, 0, 2}, {5, 2, 0}});
  const auto tau = initial_pheromone(inst, p);
  const auto d = next_city_distribution(0, {true, false, false}, inst, tau, p);
  EXPECT_DOUBLE_EQ(d[1], 0.5);
  EXPECT_DOUBLE_EQ(d[2], 0.5);
  EXPECT_EQ(d[0], 0.0);
}

TEST(NextCity, VisibilityOnlyTwoThirdsOneThird) {
  AcoParams p;
  p.alpha = 0;
  p.beta_vis = 1;
  const auto inst = from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  const auto tau = initial_pheromone(inst, p);
  const auto d = next_city_distribution(0, {true, false, false}, inst, tau, p);
  EXPECT_NEAR(d[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(d[2], 1.0 / 3, 1e-15);
}

TEST(NextCity, ZeroDistanceUsesFiniteCap) {
  AcoParams p;
  const auto inst = from_rows({{0, 0, 1}, {0, 0, 1}, {1, 1, 0}});
  const auto d = next_city_distribution(0, {true, false, false}, inst, initial_pheromone(inst, p), p);
  EXPECT_TRUE(std::isfinite(d[1]));
  EXPECT_GT(d[1], 0.99);
  EXPECT_NEAR(d[1] + d[2], 1.0, 1e-15);
}

TEST(ConstructTour, EmpiricalFrequenciesMatchDistribution) {
  AcoParams p;
  p.beta_vis = 0;
  Rng rng(Seed{1});
  const auto inst = equilateral();
  const auto tau = initial_pheromone(inst, p);
  int from0 = 0, order012 = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto t = construct_tour(inst, tau, p, rng);
    if (t.order[0] != 0) continue;
    ++from0;
    order012 += t.order[1] == 1;
  }
  EXPECT_NEAR(from0 / 20000.0, 1.0 / 3, 0.015);
  EXPECT_NEAR(static_cast<double>(order012) / from0, 0.5, 0.03);
}

TEST(ConstructTour, SingleCity) {
  AcoParams p;
  Rng rng(Seed{2});
  const auto inst = from_rows({{0}});
  const auto t = construct_tour(inst, initial_pheromone(inst, p), p, rng);
  EXPECT_EQ(t.order, (std::vector<std::size_t>{0}));
  EXPECT_EQ(t.length, 0.0);
}

TEST(ConstructTour, AlwaysAPermutation) {
  AcoParams p;
  Rng rng(Seed{3});
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.below(12);
    const auto cities = random_cities(n, rng);
    const auto inst = euclidean_instance(cities);
    Matrix tau(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) tau(i, j) = rng.uniform();
    }
    const auto t = construct_tour(inst, tau, p, rng);
    ASSERT_TRUE(is_permutation_of_n(t.order, n));
    EXPECT_DOUBLE_EQ(t.length, tour_length(t.order, inst));
  }
}

TEST(UpdatePheromone, Examples) {
  AcoParams p;
  p.rho = 0.5;
  p.tau0 = 1;
  Matrix tau(4, 1.0);
  update_pheromone(tau, {}, p);
  EXPECT_EQ(tau, Matrix(4, 0.5));

  p.tau_min = 0.75;
  Matrix floored(4, 1.0);
  update_pheromone(floored, {}, p);
  EXPECT_EQ(floored, Matrix(4, 0.75));

  AcoParams q;
  q.rho = 0;
  Matrix same(3, 0.3);
  update_pheromone(same, {}, q);
  EXPECT_EQ(same, Matrix(3, 0.3));

  Matrix t3(3, 1.0);
  const std::vector<Tour> tours{{{0, 1, 2}, 2.0}};
  update_pheromone(t3, tours, q);
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {2, 0}}) {
    EXPECT_DOUBLE_EQ(t3(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), 1.5);
    EXPECT_DOUBLE_EQ(t3(static_cast<std::size_t>(b), static_cast<std::size_t>(a)), 1.5);
  }
  EXPECT_EQ(t3(0, 0), 1.0);
}

TEST(UpdatePheromone, EdgesOfTourGainDepositOnce) {
  AcoParams p;
  p.rho = 0;
  p.tau_min = 0;
  Matrix tau(4, 0.0);
  const std::vector<Tour> tours{{{0, 2, 1, 3}, 4.0}};
  update_pheromone(tau, tours, p);
  for (auto [a, b] : {std::pair{0, 2}, {2, 1}, {1, 3}, {3, 0}}) {
    EXPECT_DOUBLE_EQ(tau(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), 0.25);
  }
  EXPECT_EQ(tau(0, 1), 0.0);
  EXPECT_EQ(tau(2, 3), 0.0);
}

TEST(UpdatePheromone, SymmetryAndFloorPreserved) {
  Rng rng(Seed{4});
  AcoParams p;
  p.tau_min = 0.01;
  const std::size_t n = 7;
  const auto inst = euclidean_instance(random_cities(n, rng));
  Matrix tau = initial_pheromone(inst, p);
  for (int it = 0; it < 300; ++it) {
    p.rho = rng.uniform();
    std::vector<Tour> tours;
    for (int a = 0; a < 3; ++a) tours.push_back(construct_tour(inst, tau, p, rng));
    update_pheromone(tau, tours, p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_EQ(tau(i, j), tau(j, i));
        ASSERT_GE(tau(i, j), p.tau_min);
      }
    }
  }
}

TEST(Solve, EquilateralOptimalAtFirstIteration) {
  const auto r = solve(equilateral(), AcoParams{}, 5, Seed{1});
  EXPECT_EQ(r.best_so_far.front(), 3.0);
  EXPECT_EQ(r.best.length, 3.0);
}

TEST(Solve, UnitSquareFindsPerimeter) {
  const auto r = solve(unit_square(), AcoParams{}, 20, Seed{2});
  EXPECT_DOUBLE_EQ(r.best.length, 4.0);
  EXPECT_DOUBLE_EQ(all_orders_optimum(unit_square()), 4.0);
}

TEST(Solve, TraceMonotoneAndBestIsValid) {
  for (std::uint64_t s : {1u, 2u}) {
    Rng rng(Seed{100 + s});
    const auto inst = euclidean_instance(random_cities(9, rng));
    const auto r = solve(inst, AcoParams{}, 50, Seed{s});
    ASSERT_EQ(r.best_so_far.size(), 50u);
    for (std::size_t i = 1; i < r.best_so_far.size(); ++i) EXPECT_LE(r.best_so_far[i], r.best_so_far[i - 1]);
    EXPECT_TRUE(is_permutation_of_n(r.best.order, 9));
    EXPECT_EQ(r.best.length, r.best_so_far.back());
    EXPECT_GE(r.best.length, all_orders_optimum(inst) - 1e-12);
  }
}

TEST(Solve, DeterministicPerSeed) {
  Rng rng(Seed{5});
  const auto inst = euclidean_instance(random_cities(8, rng));
  const auto a = solve(inst, AcoParams{}, 30, Seed{9});
  const auto b = solve(inst, AcoParams{}, 30, Seed{9});
  EXPECT_EQ(a.best.order, b.best.order);
  EXPECT_EQ(a.best_so_far, b.best_so_far);
}

TEST(Solve, RejectsBadInputs) {
  EXPECT_THROW(solve(equilateral(), AcoParams{}, 0, Seed{1}), Error);
  EXPECT_THROW(solve(from_rows({{0, 1}, {2, 0}}), AcoParams{}, 1, Seed{1}), Error);
  AcoParams p;
  p.rho = 2;
  EXPECT_THROW(solve(equilateral(), p, 1, Seed{1}), Error);
}

TEST(BruteForce, MatchesAllOrdersOracle) {
  Rng rng(Seed{6});
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = euclidean_instance(random_cities(1 + rng.below(7), rng));
    EXPECT_NEAR(brute_force_optimum(inst), all_orders_optimum(inst), 1e-12);
  }
}

TEST(Csv, CitiesAndMatrix) {
  std::istringstream cities("id,x,y\na,0,0\nb,3,4\n");
  const auto c = read_cities_csv(cities);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(euclidean_instance(c).dist(0, 1), 5.0);

  std::istringstream m("0,2,3\n2,0,4\n3,4,0\n");
  const auto inst = read_matrix_csv(m);
  EXPECT_EQ(inst.n(), 3u);
  EXPECT_EQ(inst.dist(2, 1), 4.0);

  std::istringstream asym("0,1\n2,0\n");
  EXPECT_THROW(read_matrix_csv(asym), Error);
  std::istringstream header("id,lat,lon\n");
  EXPECT_THROW(read_cities_csv(header), Error);
}
