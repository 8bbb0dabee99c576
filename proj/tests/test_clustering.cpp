#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "swarm/clustering.hpp"

using namespace swarm;
using namespace swarm::cluster;

namespace {

ClusterWorld empty_world(TorusDims d, double alpha = 1.0) {
  ClusterWorld w;
  w.dims = d;
  w.cells.assign(d.cells(), kEmpty);
  w.alpha_sim = alpha;
  return w;
}

void place(ClusterWorld& w, DataItem it, Coord c) {
  w.items.push_back(std::move(it));
  w.cells[cell_index(c, w.dims)] = w.items.size() - 1;
}

std::map<std::string, int> item_ids(const ClusterWorld& w) {
  std::map<std::string, int> out;
  for (const auto& pl : placements(w)) ++out[pl.item->id];
  return out;
}

}  // namespace

TEST(LocalSimilarity, EmptyPatchIsZero) {
  auto w = empty_world({9, 9});
  EXPECT_EQ(local_similarity({"x", {0.0}}, {4, 4}, w, 3), 0.0);
}

TEST(LocalSimilarity, FullPatchOfIdenticalItems) {
  for (int s : {1, 3, 5}) {
    auto w = empty_world({9, 9});
    const int h = s / 2;
    for (int dy = -h; dy <= h; ++dy) {
      for (int dx = -h; dx <= h; ++dx) {
        if (dx || dy) place(w, {"n", {1.0, 2.0}}, {4 + dx, 4 + dy});
      }
    }
    EXPECT_NEAR(local_similarity({"i", {1.0, 2.0}}, {4, 4}, w, s), (s * s - 1.0) / (s * s), 1e-15);
  }
}

TEST(LocalSimilarity, NeighbourAtAlphaContributesNothing) {
  auto w = empty_world({9, 9}, 2.0);
  place(w, {"n", {2.0}}, {5, 4});
  EXPECT_EQ(local_similarity({"i", {0.0}}, {4, 4}, w, 3), 0.0);
}

TEST(LocalSimilarity, ClampedAtZeroAndWrapsOnTorus) {
  auto w = empty_world({6, 6}, 1.0);
  place(w, {"far", {10.0}}, {5, 0});
  EXPECT_EQ(local_similarity({"i", {0.0}}, {0, 0}, w, 3), 0.0);
  place(w, {"near", {0.5}}, {0, 5});
  place(w, {"same", {0.0}}, {1, 1});
  // contributions: -9, 0.5, 1 over 9 -> negative sum clamps to 0
  EXPECT_EQ(local_similarity({"i", {0.0}}, {0, 0}, w, 3), 0.0);
  w.cells[cell_index({5, 0}, w.dims)] = kEmpty;
  EXPECT_NEAR(local_similarity({"i", {0.0}}, {0, 0}, w, 3), 1.5 / 9.0, 1e-15);
}

TEST(PickDrop, Examples) {
  ClusterParams p;
  p.k1 = 0.1;
  p.k2 = 0.15;
  EXPECT_EQ(pick_probability(0.0, p), 1.0);
  EXPECT_DOUBLE_EQ(pick_probability(p.k1, p), 0.25);
  EXPECT_NEAR(pick_probability(0.3, p), 0.0625, 1e-15);
  EXPECT_EQ(drop_probability(0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(drop_probability(p.k2, p), 0.25);
  EXPECT_NEAR(drop_probability(0.45, p), 0.5625, 1e-15);
}

TEST(PickDrop, BoundedAndMonotone) {
  ClusterParams p;
  double last_pick = 2.0;
  double last_drop = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double f = i / 1000.0;
    const double pk = pick_probability(f, p);
    const double dp = drop_probability(f, p);
    EXPECT_GE(pk, 0.0);
    EXPECT_LE(pk, 1.0);
    EXPECT_GE(dp, 0.0);
    EXPECT_LE(dp, 1.0);
    EXPECT_LT(pk, last_pick);
    EXPECT_GT(dp, last_drop);
    last_pick = pk;
    last_drop = dp;
  }
}

TEST(ClusteringStep, ZeroAntsLeavesWorldUnchanged) {
  ClusterParams p;
  p.n_ants = 0;
  Rng rng(Seed{1});
  auto items = four_gaussians(40, 10, 1, rng);
  auto w = make_world(items, p, rng);
  const auto cells = w.cells;
  for (int t = 0; t < 100; ++t) clustering_step(w, p, rng);
  EXPECT_EQ(w.cells, cells);
}

TEST(ClusteringStep, UnladenAntPicksIsolatedItem) {
  ClusterParams p;
  p.dims = {10, 10};
  auto w = empty_world(p.dims);
  // s=1: the patch is the landing cell alone, so every item is isolated (f=0)
  p.s = 1;
  for (const auto& st : kMooreSteps) place(w, {"i", {0.0}}, {5 + st.x, 5 + st.y});
  w.ants.push_back({{5, 5}, std::nullopt});
  Rng rng(Seed{2});
  clustering_step(w, p, rng);
  ASSERT_TRUE(w.ants[0].carrying.has_value());
  EXPECT_EQ(w.item_at(w.ants[0].pos), kEmpty);
}

TEST(ClusteringStep, LadenAntIgnoresOccupiedCell) {
  ClusterParams p;
  p.dims = {5, 5};
  auto w = empty_world(p.dims);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) place(w, {"i" + std::to_string(x) + std::to_string(y), {0.0}}, {x, y});
  }
  w.items.push_back({"held", {0.0}});
  w.ants.push_back({{2, 2}, w.items.size() - 1});
  Rng rng(Seed{3});
  const auto before = w.cells;
  for (int t = 0; t < 50; ++t) clustering_step(w, p, rng);
  EXPECT_EQ(w.cells, before);
  EXPECT_TRUE(w.ants[0].carrying.has_value());
}

TEST(ClusteringStep, ConservesItemsAndOnePerCell) {
  ClusterParams p;
  p.dims = {20, 20};
  p.n_ants = 15;
  p.k1 = 0.3;
  p.k2 = 0.05;
  Rng rng(Seed{4});
  auto w = make_world(four_gaussians(120, 10, 1, rng), p, rng);
  const auto ids = item_ids(w);
  for (int t = 0; t < 3000; ++t) {
    clustering_step(w, p, rng);
    if (t % 100 == 0) {
      EXPECT_EQ(item_ids(w), ids);
      std::vector<int> seen(w.items.size(), 0);
      for (auto c : w.cells) {
        if (c != kEmpty) ++seen[c];
      }
      for (const auto& a : w.ants) {
        if (a.carrying) ++seen[*a.carrying];
      }
      for (int s : seen) ASSERT_EQ(s, 1);
    }
  }
}

TEST(ClusteringStep, Deterministic) {
  ClusterParams p;
  Rng r1(Seed{5});
  Rng r2(Seed{5});
  auto a = make_world(four_gaussians(50, 10, 1, r1), p, r1);
  auto b = make_world(four_gaussians(50, 10, 1, r2), p, r2);
  for (int t = 0; t < 500; ++t) {
    clustering_step(a, p, r1);
    clustering_step(b, p, r2);
  }
  EXPECT_EQ(a.cells, b.cells);
}

TEST(SpatialEntropy, Examples) {
  auto w = empty_world({10, 10});
  EXPECT_EQ(spatial_entropy(w, 5), 0.0);
  place(w, {"a", {0}}, {0, 0});
  place(w, {"b", {0}}, {1, 3});
  place(w, {"c", {0}}, {4, 4});
  EXPECT_EQ(spatial_entropy(w, 5), 0.0);
  auto u = empty_world({10, 10});
  place(u, {"a", {0}}, {0, 0});
  place(u, {"b", {0}}, {5, 0});
  place(u, {"c", {0}}, {0, 5});
  place(u, {"d", {0}}, {9, 9});
  EXPECT_NEAR(spatial_entropy(u, 5), std::log(4.0), 1e-15);
  auto v = empty_world({10, 10});
  for (int i = 0; i < 100; ++i) place(v, {"x", {0}}, coord_of(static_cast<std::size_t>(i), v.dims));
  EXPECT_NEAR(spatial_entropy(v, 2), std::log(25.0), 1e-12);
}

TEST(SpatialEntropy, PatchMismatch) {
  auto w = empty_world({10, 10});
  try {
    spatial_entropy(w, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PatchMismatch);
  }
}

TEST(SamenessNeighbourness, Examples) {
  const TorusDims d{100, 100};
  std::vector<DataItem> same(4, DataItem{"s", {1.0, 1.0}});
  std::vector<Placement> pl;
  for (int i = 0; i < 4; ++i) pl.push_back({&same[static_cast<std::size_t>(i)], {i * 3, 0}});
  EXPECT_FALSE(sameness_neighbourness(pl, d).has_value());

  std::vector<DataItem> line{{"a", {0.0}}, {"b", {1.0}}, {"c", {2.0}}, {"d", {3.0}}};
  std::vector<Placement> lin;
  for (int i = 0; i < 4; ++i) lin.push_back({&line[static_cast<std::size_t>(i)], {i * 5, 0}});
  EXPECT_NEAR(*sameness_neighbourness(lin, d), 1.0, 1e-12);

  try {
    sameness_neighbourness({lin[0]}, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewItems);
  }
}

TEST(SamenessNeighbourness, NearZeroOnRandomLayout) {
  ClusterParams p;
  Rng rng(Seed{6});
  auto w = make_world(four_gaussians(200, 10, 1, rng), p, rng);
  const auto r = sameness_neighbourness(placements(w), w.dims);
  ASSERT_TRUE(r.has_value());
  EXPECT_LT(std::abs(*r), 0.1);
}

TEST(FourGaussians, LabelsAndCenters) {
  Rng rng(Seed{7});
  const auto items = four_gaussians(400, 10, 0.5, rng);
  ASSERT_EQ(items.size(), 400u);
  double mx[4] = {}, my[4] = {};
  for (std::size_t i = 0; i < items.size(); ++i) {
    mx[i % 4] += items[i].attributes[0] / 100;
    my[i % 4] += items[i].attributes[1] / 100;
  }
  EXPECT_NEAR(mx[0], -5, 0.2);
  EXPECT_NEAR(my[0], -5, 0.2);
  EXPECT_NEAR(mx[3], 5, 0.2);
  EXPECT_NEAR(my[3], 5, 0.2);
  EXPECT_EQ(items[5].id, "g1_1");
}

TEST(MakeWorld, AlphaDefaultsToScaledMeanDistance) {
  std::vector<DataItem> items{{"a", {0.0}}, {"b", {3.0}}, {"c", {6.0}}};
  ClusterParams p;
  p.alpha_scale = 2.0;
  Rng rng(Seed{8});
  const auto w = make_world(items, p, rng);
  EXPECT_DOUBLE_EQ(w.alpha_sim, 2.0 * 4.0);
  EXPECT_EQ(w.ants.size(), 10u);
  p.alpha_sim = 0.5;
  EXPECT_EQ(make_world(items, p, rng).alpha_sim, 0.5);
}

TEST(MakeWorld, RejectsMixedDimensionsAndTooManyItems) {
  ClusterParams p;
  p.dims = {2, 2};
  Rng rng(Seed{9});
  EXPECT_THROW(make_world({{"a", {0.0}}, {"b", {0.0, 1.0}}}, p, rng), Error);
  EXPECT_THROW(make_world(std::vector<DataItem>(5, DataItem{"a", {0.0}}), p, rng), Error);
}

TEST(ClusterParams, Validation) {
  ClusterParams p;
  p.s = 2;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.k1 = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(ReadItemsCsv, ParsesIdAndAttributes) {
  std::istringstream in("x,id,y\n1.5,a,2\n-3,b,4e1\n\n");
  const auto items = read_items_csv(in);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[1], (DataItem{"b", {-3.0, 40.0}}));
  std::istringstream bad("id,x\na,zz\n");
  EXPECT_THROW(read_items_csv(bad), Error);
  std::istringstream noid("x,y\n1,2\n");
  EXPECT_THROW(read_items_csv(noid), Error);
}
