#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "swarm/error.hpp"
#include "swarm/pheromone_field.hpp"
#include "swarm/rng.hpp"
#include "swarm/stats.hpp"
#include "swarm/torus.hpp"

namespace swarm::mc2 {

using json = nlohmann::json;

struct LetterObject {
  std::string id;
  char glyph = 'A';
  Coord pos;

  friend bool operator==(const LetterObject&, const LetterObject&) = default;
};

// Everything needed to rebuild version 0. With an explicit layout the
// letters are placed verbatim; otherwise `letters` is scattered over
// distinct cells using `seed`, ids L0, L1, ... in string order.
struct GenesisDescriptor {
  TorusDims dims{16, 16};
  std::uint64_t seed = 0;
  std::string letters;
  std::vector<LetterObject> layout;
  double deposit_amount = 1.0;

  friend bool operator==(const GenesisDescriptor&, const GenesisDescriptor&) = default;
};

class HabitatState {
 public:
  HabitatState() = default;

  const TorusDims& dims() const noexcept { return dims_; }
  const std::vector<LetterObject>& objects() const noexcept { return objects_; }
  const PheromoneField& field() const noexcept { return field_; }
  std::uint64_t version() const noexcept { return version_; }
  const GenesisDescriptor& created_from() const noexcept { return genesis_; }

  // Index into objects() of the letter on cell c, if any.
  std::optional<std::size_t> object_at(Coord c) const {
    const auto v = occupancy_[cell_index(c, dims_)];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
  }

  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (objects_[i].id == id) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const HabitatState& a, const HabitatState& b) {
    return a.dims_ == b.dims_ && a.objects_ == b.objects_ && a.field_ == b.field_ &&
           a.version_ == b.version_ && a.genesis_ == b.genesis_;
  }

  // Builds a state after checking every invariant; MalformedDocument on any
  // violation (this is the gate for loaded documents too).
  static HabitatState assemble(TorusDims dims, std::vector<LetterObject> objects, PheromoneField field,
                               std::uint64_t version, GenesisDescriptor genesis);

 private:
  friend void move_object(HabitatState&, std::size_t, Coord);
  friend PheromoneField& mutable_field(HabitatState&);
  friend void bump_version(HabitatState&);

  TorusDims dims_;
  std::vector<LetterObject> objects_;
  PheromoneField field_{TorusDims{}};
  std::uint64_t version_ = 0;
  GenesisDescriptor genesis_;
  std::vector<int> occupancy_;
};

inline HabitatState HabitatState::assemble(TorusDims dims, std::vector<LetterObject> objects,
                                           PheromoneField field, std::uint64_t version,
                                           GenesisDescriptor genesis) {
  if (dims.width < 1 || dims.height < 1) {
    throw Error(ErrorCode::MalformedDocument, "habitat dims must be positive");
  }
  if (!(field.dims() == dims)) throw Error(ErrorCode::MalformedDocument, "field dims differ from habitat");
  HabitatState s;
  s.dims_ = dims;
  s.occupancy_.assign(dims.cells(), -1);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.glyph < 'A' || o.glyph > 'Z') {
      throw Error(ErrorCode::MalformedDocument, "glyph of " + o.id + " is not A-Z");
    }
    if (o.id.empty() || !ids.insert(o.id).second) {
      throw Error(ErrorCode::MalformedDocument, "object ids must be unique and non-empty");
    }
    if (o.pos.x < 0 || o.pos.y < 0 || o.pos.x >= dims.width || o.pos.y >= dims.height) {
      throw Error(ErrorCode::MalformedDocument, "object " + o.id + " lies outside the grid");
    }
    auto& cell = s.occupancy_[cell_index(o.pos, dims)];
    if (cell >= 0) throw Error(ErrorCode::MalformedDocument, "two objects share a cell");
    cell = static_cast<int>(i);
  }
  s.objects_ = std::move(objects);
  s.field_ = std::move(field);
  s.version_ = version;
  s.genesis_ = std::move(genesis);
  return s;
}

inline void move_object(HabitatState& s, std::size_t idx, Coord to) {
  auto& o = s.objects_[idx];
  s.occupancy_[cell_index(o.pos, s.dims_)] = -1;
  o.pos = to;
  s.occupancy_[cell_index(to, s.dims_)] = static_cast<int>(idx);
}

inline PheromoneField& mutable_field(HabitatState& s) { return s.field_; }
inline void bump_version(HabitatState& s) { ++s.version_; }

inline HabitatState genesis(const GenesisDescriptor& g) {
  if (g.dims.width < 1 || g.dims.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "habitat dims must be positive");
  }
  if (!(g.deposit_amount > 0.0)) throw Error(ErrorCode::InvalidArgument, "deposit_amount must be > 0");
  std::vector<LetterObject> objects = g.layout;
  if (objects.empty()) {
    if (g.letters.size() > g.dims.cells()) {
      throw Error(ErrorCode::InvalidArgument, "more letters than cells");
    }
    Rng rng(Seed{g.seed});
    std::vector<bool> used(g.dims.cells(), false);
    for (std::size_t i = 0; i < g.letters.size(); ++i) {
      auto cell = static_cast<std::size_t>(rng.below(used.size()));
      while (used[cell]) cell = static_cast<std::size_t>(rng.below(used.size()));
      used[cell] = true;
      objects.push_back({"L" + std::to_string(i), g.letters[i], coord_of(cell, g.dims)});
    }
  }
  try {
    return HabitatState::assemble(g.dims, std::move(objects), PheromoneField(g.dims), 0, g);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad genesis: ") + e.what());
  }
}

struct MoveEvent {
  std::uint64_t event_id = 0;
  std::string user;
  std::string object_id;
  Coord from;
  Coord to;
  std::uint64_t expected_version = 0;
  std::int64_t timestamp = 0;  // UTC milliseconds

  friend bool operator==(const MoveEvent&, const MoveEvent&) = default;
};

struct TickEvent {
  std::uint64_t event_id = 0;
  double rho = 0.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const TickEvent&, const TickEvent&) = default;
};

using Event = std::variant<MoveEvent, TickEvent>;

inline std::uint64_t event_id(const Event& e) {
  return std::visit([](const auto& x) { return x.event_id; }, e);
}

enum class MoveRejection { VersionConflict, UnknownObject, ObjectNotAtFrom, CellOccupied };

constexpr std::string_view to_string(MoveRejection r) noexcept {
  switch (r) {
    case MoveRejection::VersionConflict: return "VersionConflict";
    case MoveRejection::UnknownObject: return "UnknownObject";
    case MoveRejection::ObjectNotAtFrom: return "ObjectNotAtFrom";
    case MoveRejection::CellOccupied: return "CellOccupied";
  }
  return "Unknown";
}

// Applies the move in place, or returns why it was refused (state untouched).
inline std::optional<MoveRejection> apply_move(HabitatState& s, const MoveEvent& e, double deposit_amount) {
  if (e.expected_version != s.version()) return MoveRejection::VersionConflict;
  const auto idx = s.find(e.object_id);
  if (!idx) return MoveRejection::UnknownObject;
  if (!(s.objects()[*idx].pos == torus_wrap(e.from, s.dims()))) return MoveRejection::ObjectNotAtFrom;
  const Coord to = torus_wrap(e.to, s.dims());
  if (s.object_at(to)) return MoveRejection::CellOccupied;
  move_object(s, *idx, to);
  mutable_field(s).deposit(to, deposit_amount);
  bump_version(s);
  return std::nullopt;
}

inline void apply_tick(HabitatState& s, const TickEvent& t) {
  mutable_field(s).evaporate(t.rho);  // throws RhoOutOfRange before any change
  bump_version(s);
}

inline std::optional<MoveRejection> apply_event(HabitatState& s, const Event& e) {
  if (const auto* m = std::get_if<MoveEvent>(&e)) return apply_move(s, *m, s.created_from().deposit_amount);
  apply_tick(s, std::get<TickEvent>(e));
  return std::nullopt;
}

enum class Direction { Right, Down };

struct WordHit {
  std::string word;
  std::vector<Coord> cells;
  Direction direction = Direction::Right;

  friend bool operator==(const WordHit&, const WordHit&) = default;
};

// Maximal runs of letters read rightward and downward, never across the
// torus seam. A run is reported only when the whole run is a lexicon word.
inline std::vector<WordHit> detect_words(const HabitatState& s, const std::set<std::string>& lexicon) {
  std::vector<WordHit> hits;
  const auto& d = s.dims();
  auto glyph = [&](int x, int y) -> char {
    const auto i = s.object_at({x, y});
    return i ? s.objects()[*i].glyph : '\0';
  };
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      if (!glyph(x, y)) continue;
      for (const auto dir : {Direction::Right, Direction::Down}) {
        const int dx = dir == Direction::Right ? 1 : 0;
        const int dy = 1 - dx;
        const int px = x - dx;
        const int py = y - dy;
        if (px >= 0 && py >= 0 && glyph(px, py)) continue;  // not the start of a run
        WordHit h{{}, {}, dir};
        for (int cx = x, cy = y; cx < d.width && cy < d.height && glyph(cx, cy); cx += dx, cy += dy) {
          h.word.push_back(glyph(cx, cy));
          h.cells.push_back({cx, cy});
        }
        if (lexicon.count(h.word)) hits.push_back(std::move(h));
      }
    }
  }
  return hits;
}

struct Rejected {
  std::uint64_t event_id = 0;
  MoveRejection reason = MoveRejection::VersionConflict;

  friend bool operator==(const Rejected&, const Rejected&) = default;
};

struct ReplayResult {
  HabitatState state;
  std::vector<Rejected> rejected;
};

// Folds `tail` onto `from`. The first event must carry first_event_id and
// ids must then increase by one; anything else is CorruptLog.
inline ReplayResult replay_from(HabitatState from, std::span<const Event> tail, std::uint64_t first_event_id) {
  ReplayResult out{std::move(from), {}};
  std::uint64_t expected = first_event_id;
  for (const auto& e : tail) {
    if (event_id(e) != expected) {
      throw Error(ErrorCode::CorruptLog, "expected event " + std::to_string(expected) + ", found " +
                                             std::to_string(event_id(e)));
    }
    ++expected;
    try {
      if (const auto r = apply_event(out.state, e)) out.rejected.push_back({event_id(e), *r});
    } catch (const Error& err) {
      throw Error(ErrorCode::CorruptLog, "event " + std::to_string(event_id(e)) + ": " + err.what());
    }
  }
  return out;
}

// Event ids in a log start at 1.
inline ReplayResult replay(std::span<const Event> log, const GenesisDescriptor& g) {
  return replay_from(genesis(g), log, 1);
}

struct ConsensusMetrics {
  std::size_t letter_cluster_count = 0;
  double pheromone_entropy = 0.0;
  std::optional<double> resistance;
};

// 4-connected components of occupied cells; adjacency wraps like the habitat.
inline std::size_t letter_clusters(const HabitatState& s) {
  const auto& d = s.dims();
  std::vector<bool> seen(d.cells(), false);
  std::size_t count = 0;
  std::vector<Coord> stack;
  for (const auto& o : s.objects()) {
    if (seen[cell_index(o.pos, d)]) continue;
    ++count;
    seen[cell_index(o.pos, d)] = true;
    stack.push_back(o.pos);
    while (!stack.empty()) {
      const Coord c = stack.back();
      stack.pop_back();
      for (const Coord step : {Coord{1, 0}, Coord{-1, 0}, Coord{0, 1}, Coord{0, -1}}) {
        const Coord n = torus_wrap({c.x + step.x, c.y + step.y}, d);
        if (seen[cell_index(n, d)] || !s.object_at(n)) continue;
        seen[cell_index(n, d)] = true;
        stack.push_back(n);
      }
    }
  }
  return count;
}

// history holds earlier fields, oldest first; resistance compares against
// the one k entries back (undefined when there are fewer than k).
inline ConsensusMetrics consensus_metrics(const HabitatState& s, std::span<const PheromoneField> history,
                                          std::size_t k = 1) {
  ConsensusMetrics m;
  m.letter_cluster_count = letter_clusters(s);
  m.pheromone_entropy = shannon_entropy(s.field().values());
  if (k >= 1 && history.size() >= k) {
    const auto& past = history[history.size() - k];
    if (past.dims() == s.dims()) m.resistance = pearson(s.field().values(), past.values());
  }
  return m;
}

// ---- JSON documents -------------------------------------------------------

inline json to_json(Coord c) { return {{"x", c.x}, {"y", c.y}}; }

inline json to_json(const LetterObject& o) {
  return {{"id", o.id}, {"glyph", std::string(1, o.glyph)}, {"x", o.pos.x}, {"y", o.pos.y}};
}

inline json to_json(const GenesisDescriptor& g) {
  json layout = json::array();
  for (const auto& o : g.layout) layout.push_back(to_json(o));
  return {{"width", g.dims.width}, {"height", g.dims.height}, {"seed", g.seed},
          {"letters", g.letters},  {"layout", layout},         {"deposit_amount", g.deposit_amount}};
}

inline json snapshot(const HabitatState& s) {
  json objects = json::array();
  for (const auto& o : s.objects()) objects.push_back(to_json(o));
  const auto v = s.field().values();
  return {{"dims", {{"width", s.dims().width}, {"height", s.dims().height}}},
          {"version", s.version()},
          {"objects", objects},
          {"field", std::vector<double>(v.begin(), v.end())},
          {"created_from", to_json(s.created_from())}};
}

namespace detail {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::MalformedDocument, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedDocument, std::string("field '") + key + "' has the wrong type");
  }
}

inline Coord coord_from(const json& j) { return {get<int>(j, "x"), get<int>(j, "y")}; }

inline LetterObject letter_from(const json& j) {
  const auto glyph = get<std::string>(j, "glyph");
  if (glyph.size() != 1) throw Error(ErrorCode::MalformedDocument, "glyph must be one character");
  return {get<std::string>(j, "id"), glyph[0], coord_from(j)};
}

inline GenesisDescriptor genesis_from(const json& j) {
  GenesisDescriptor g;
  g.dims = {get<int>(j, "width"), get<int>(j, "height")};
  g.seed = get<std::uint64_t>(j, "seed");
  g.letters = get<std::string>(j, "letters");
  g.deposit_amount = get<double>(j, "deposit_amount");
  const auto layout = get<json>(j, "layout");
  if (!layout.is_array()) throw Error(ErrorCode::MalformedDocument, "layout must be an array");
  for (const auto& o : layout) g.layout.push_back(letter_from(o));
  return g;
}

}  // namespace detail

inline HabitatState load_snapshot(const json& doc) {
  const auto dims_j = detail::get<json>(doc, "dims");
  const TorusDims dims{detail::get<int>(dims_j, "width"), detail::get<int>(dims_j, "height")};
  if (dims.width < 1 || dims.height < 1) throw Error(ErrorCode::MalformedDocument, "dims must be positive");
  const auto objects_j = detail::get<json>(doc, "objects");
  if (!objects_j.is_array()) throw Error(ErrorCode::MalformedDocument, "objects must be an array");
  std::vector<LetterObject> objects;
  for (const auto& o : objects_j) objects.push_back(detail::letter_from(o));
  auto values = detail::get<std::vector<double>>(doc, "field");
  std::optional<PheromoneField> field;
  try {
    field.emplace(dims, std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("bad field: ") + e.what());
  }
  return HabitatState::assemble(dims, std::move(objects), std::move(*field),
                                detail::get<std::uint64_t>(doc, "version"),
                                detail::genesis_from(detail::get<json>(doc, "created_from")));
}

inline HabitatState load_snapshot(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedDocument, "snapshot is not valid JSON");
  return load_snapshot(doc);
}

inline HabitatState load_snapshot(const std::string& text) { return load_snapshot(std::string_view(text)); }
inline HabitatState load_snapshot(const char* text) { return load_snapshot(std::string_view(text)); }

inline json to_json(const Event& e) {
  if (const auto* m = std::get_if<MoveEvent>(&e)) {
    return {{"type", "move"},
            {"event_id", m->event_id},
            {"user", m->user},
            {"object_id", m->object_id},
            {"from", to_json(m->from)},
            {"to", to_json(m->to)},
            {"expected_version", m->expected_version},
            {"timestamp", m->timestamp}};
  }
  const auto& t = std::get<TickEvent>(e);
  return {{"type", "tick"}, {"event_id", t.event_id}, {"rho", t.rho}, {"timestamp", t.timestamp}};
}

// MalformedDocument on any structural problem.
inline Event event_from_json(const json& j) {
  const auto type = detail::get<std::string>(j, "type");
  if (type == "move") {
    return MoveEvent{detail::get<std::uint64_t>(j, "event_id"),
                     detail::get<std::string>(j, "user"),
                     detail::get<std::string>(j, "object_id"),
                     detail::coord_from(detail::get<json>(j, "from")),
                     detail::coord_from(detail::get<json>(j, "to")),
                     detail::get<std::uint64_t>(j, "expected_version"),
                     detail::get<std::int64_t>(j, "timestamp")};
  }
  if (type == "tick") {
    return TickEvent{detail::get<std::uint64_t>(j, "event_id"), detail::get<double>(j, "rho"),
                     detail::get<std::int64_t>(j, "timestamp")};
  }
  throw Error(ErrorCode::MalformedDocument, "unknown event type '" + type + "'");
}

inline json to_json(const WordHit& h) {
  json cells = json::array();
  for (const auto& c : h.cells) cells.push_back(to_json(c));
  return {{"word", h.word}, {"cells", cells}, {"direction", h.direction == Direction::Right ? "Right" : "Down"}};
}

inline json to_json(const ConsensusMetrics& m) {
  return {{"letter_cluster_count", m.letter_cluster_count},
          {"pheromone_entropy", m.pheromone_entropy},
          {"resistance", m.resistance ? json(*m.resistance) : json(nullptr)}};
}

}  // namespace swarm::mc2
