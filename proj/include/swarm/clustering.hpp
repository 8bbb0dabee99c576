#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/rng.hpp"
#include "swarm/stats.hpp"
#include "swarm/torus.hpp"

namespace swarm::cluster {

struct DataItem {
  std::string id;
  std::vector<double> attributes;

  friend bool operator==(const DataItem&, const DataItem&) = default;
};

struct ClusterParams {
  double k1 = 0.1;
  double k2 = 0.15;
  int s = 3;
  // Similarity scale; <= 0 means alpha_scale times the dataset's mean
  // pairwise attribute distance.
  double alpha_sim = 0.0;
  double alpha_scale = 1.0;
  TorusDims dims{50, 50};
  int n_ants = 10;

  void validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "k1 and k2 must be > 0");
    }
    if (s < 1 || s % 2 == 0) throw Error(ErrorCode::InvalidArgument, "s must be odd and >= 1");
    if (n_ants < 0) throw Error(ErrorCode::InvalidArgument, "n_ants must be >= 0");
    if (alpha_sim <= 0.0 && !(alpha_scale > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "alpha_scale must be > 0");
    }
    dims.validate();
  }
};

struct ClusterAnt {
  Coord pos;
  std::optional<std::size_t> carrying;  // index into ClusterWorld::items
};

inline constexpr std::size_t kEmpty = static_cast<std::size_t>(-1);

struct ClusterWorld {
  TorusDims dims;
  std::vector<DataItem> items;
  std::vector<std::size_t> cells;  // item index per cell, kEmpty if none
  std::vector<ClusterAnt> ants;
  double alpha_sim = 1.0;

  std::size_t item_at(Coord c) const { return cells[cell_index(c, dims)]; }

  std::size_t carried_count() const {
    return static_cast<std::size_t>(
        std::count_if(ants.begin(), ants.end(), [](const auto& a) { return a.carrying.has_value(); }));
  }
};

inline double attribute_distance(const DataItem& a, const DataItem& b) {
  if (a.attributes.size() != b.attributes.size()) {
    throw Error(ErrorCode::DimensionMismatch, "attribute dimension differs between items");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.attributes.size(); ++i) {
    const double d = a.attributes[i] - b.attributes[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double mean_pairwise_distance(const std::vector<DataItem>& items) {
  if (items.size() < 2) return 1.0;
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      acc += attribute_distance(items[i], items[j]);
      ++pairs;
    }
  }
  const double mean = acc / static_cast<double>(pairs);
  return mean > 0.0 ? mean : 1.0;
}

// Scatters items on distinct random cells and ants on random cells.
inline ClusterWorld make_world(std::vector<DataItem> items, const ClusterParams& p, Rng& rng) {
  p.validate();
  if (items.size() > p.dims.cells()) {
    throw Error(ErrorCode::InvalidArgument, "more items than grid cells");
  }
  for (const auto& it : items) {
    if (it.attributes.size() != items.front().attributes.size()) {
      throw Error(ErrorCode::DimensionMismatch, "attribute dimension differs between items");
    }
  }
  ClusterWorld w;
  w.dims = p.dims;
  w.cells.assign(p.dims.cells(), kEmpty);
  w.alpha_sim = p.alpha_sim > 0.0 ? p.alpha_sim : p.alpha_scale * mean_pairwise_distance(items);
  w.items = std::move(items);
  for (std::size_t i = 0; i < w.items.size(); ++i) {
    std::size_t cell = static_cast<std::size_t>(rng.below(w.cells.size()));
    while (w.cells[cell] != kEmpty) cell = static_cast<std::size_t>(rng.below(w.cells.size()));
    w.cells[cell] = i;
  }
  w.ants.resize(static_cast<std::size_t>(p.n_ants));
  for (auto& a : w.ants) {
    a.pos = coord_of(static_cast<std::size_t>(rng.below(w.cells.size())), w.dims);
  }
  return w;
}

// f(i, c) = max(0, 1/s^2 * sum_j (1 - d(i,j)/alpha)) over the items j in
// the s x s patch around c, the center cell itself excluded.
inline double local_similarity(const DataItem& item, Coord c, const ClusterWorld& w, int s) {
  const int half = s / 2;
  double acc = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const std::size_t j = w.item_at({c.x + dx, c.y + dy});
      if (j == kEmpty) continue;
      acc += 1.0 - attribute_distance(item, w.items[j]) / w.alpha_sim;
    }
  }
  return std::max(0.0, acc / static_cast<double>(s * s));
}

inline double pick_probability(double f, const ClusterParams& p) {
  const double r = p.k1 / (p.k1 + f);
  return r * r;
}

inline double drop_probability(double f, const ClusterParams& p) {
  const double r = f / (p.k2 + f);
  return r * r;
}

// One sweep: every ant, in index order, takes one random Moore step and
// then may pick (unladen, on an item) or drop (laden, on an empty cell).
inline void clustering_step(ClusterWorld& w, const ClusterParams& p, Rng& rng) {
  for (auto& ant : w.ants) {
    const auto& step = kMooreSteps[rng.below(8)];
    ant.pos = torus_wrap({ant.pos.x + step.x, ant.pos.y + step.y}, w.dims);
    auto& cell = w.cells[cell_index(ant.pos, w.dims)];
    if (!ant.carrying && cell != kEmpty) {
      const double f = local_similarity(w.items[cell], ant.pos, w, p.s);
      if (rng.bernoulli(pick_probability(f, p))) {
        ant.carrying = cell;
        cell = kEmpty;
      }
    } else if (ant.carrying && cell == kEmpty) {
      const double f = local_similarity(w.items[*ant.carrying], ant.pos, w, p.s);
      if (rng.bernoulli(drop_probability(f, p))) {
        cell = *ant.carrying;
        ant.carrying.reset();
      }
    }
  }
}

// Shannon entropy (nats) of on-grid item counts over patch x patch blocks.
inline double spatial_entropy(const ClusterWorld& w, int patch) {
  if (patch < 1 || w.dims.width % patch != 0 || w.dims.height % patch != 0) {
    throw Error(ErrorCode::PatchMismatch,
                "patch " + std::to_string(patch) + " does not divide the grid");
  }
  const int bx = w.dims.width / patch;
  const int by = w.dims.height / patch;
  std::vector<double> counts(static_cast<std::size_t>(bx * by), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.cells.size(); ++i) {
    if (w.cells[i] == kEmpty) continue;
    const Coord c = coord_of(i, w.dims);
    counts[static_cast<std::size_t>((c.y / patch) * bx + c.x / patch)] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (double n : counts) {
    if (n > 0.0) h -= (n / total) * std::log(n / total);
  }
  return h;
}

struct Placement {
  const DataItem* item;
  Coord pos;
};

// On-grid items plus carried items located at their ant.
inline std::vector<Placement> placements(const ClusterWorld& w) {
  std::vector<Placement> out;
  for (std::size_t i = 0; i < w.cells.size(); ++i) {
    if (w.cells[i] != kEmpty) out.push_back({&w.items[w.cells[i]], coord_of(i, w.dims)});
  }
  for (const auto& a : w.ants) {
    if (a.carrying) out.push_back({&w.items[*a.carrying], a.pos});
  }
  return out;
}

// Pearson correlation between pairwise attribute distance and pairwise
// toroidal grid distance. nullopt when either side has zero variance.
inline std::optional<double> sameness_neighbourness(const std::vector<Placement>& placed,
                                                    TorusDims dims) {
  if (placed.size() < 2) {
    throw Error(ErrorCode::TooFewItems, "need at least two items");
  }
  std::vector<double> attr;
  std::vector<double> grid;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      attr.push_back(attribute_distance(*placed[i].item, *placed[j].item));
      grid.push_back(torus_distance(placed[i].pos, placed[j].pos, dims));
    }
  }
  return pearson(attr, grid);
}

// Four isotropic Gaussian blobs in 2D, equal sizes, centers at
// (+-separation/2, +-separation/2). Items are labelled g<cluster>_<k>.
inline std::vector<DataItem> four_gaussians(std::size_t n, double separation, double sigma,
                                            Rng& rng) {
  const double h = separation / 2.0;
  const double centers[4][2] = {{-h, -h}, {h, -h}, {-h, h}, {h, h}};
  std::vector<DataItem> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = i % 4;
    out.push_back({"g" + std::to_string(g) + "_" + std::to_string(i / 4),
                   {centers[g][0] + sigma * rng.normal(), centers[g][1] + sigma * rng.normal()}});
  }
  return out;
}

// CSV with a header row: an `id` column plus numeric attribute columns.
inline std::vector<DataItem> read_items_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "empty dataset");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  };
  const auto header = split(line);
  const auto id_col = std::find(header.begin(), header.end(), "id");
  if (id_col == header.end()) throw Error(ErrorCode::InvalidArgument, "dataset has no id column");
  const auto id_index = static_cast<std::size_t>(id_col - header.begin());
  std::vector<DataItem> items;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto row = split(line);
    if (row.size() != header.size()) {
      throw Error(ErrorCode::InvalidArgument, "ragged dataset row: " + line);
    }
    DataItem it;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == id_index) {
        it.id = row[c];
        continue;
      }
      try {
        std::size_t used = 0;
        it.attributes.push_back(std::stod(row[c], &used));
        if (used != row[c].size()) throw std::invalid_argument(row[c]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "non-numeric attribute '" + row[c] + "'");
      }
    }
    items.push_back(std::move(it));
  }
  return items;
}

}  // namespace swarm::cluster
