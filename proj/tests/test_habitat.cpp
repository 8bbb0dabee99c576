#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "swarm/mc2/habitat.hpp"
#include "swarm/mc2/store.hpp"

using namespace swarm;
using namespace swarm::mc2;
namespace fs = std::filesystem;

namespace {

GenesisDescriptor layout_genesis() {
  GenesisDescriptor g;
  g.dims = {8, 6};
  g.layout = {{"a", 'A', {1, 1}}, {"n", 'N', {4, 4}}, {"t", 'T', {6, 2}}};
  g.deposit_amount = 1.0;
  return g;
}

MoveEvent move(std::uint64_t id, std::string obj, Coord from, Coord to, std::uint64_t expected) {
  return {id, "u", std::move(obj), from, to, expected, 1000 + static_cast<std::int64_t>(id)};
}

// Random mix of valid moves, stale/bogus moves and ticks, generated against
// a shadow state so roughly half the moves are accepted.
std::vector<Event> random_events(const GenesisDescriptor& g, std::size_t n, Rng& rng) {
  auto shadow = genesis(g);
  std::vector<Event> out;
  for (std::uint64_t id = 1; id <= n; ++id) {
    Event e;
    if (rng.bernoulli(0.15)) {
      e = TickEvent{id, rng.uniform(0.0, 0.3), 0};
    } else {
      const auto& objs = shadow.objects();
      const auto& o = objs[rng.below(objs.size())];
      Coord to{static_cast<int>(rng.below(static_cast<std::uint64_t>(g.dims.width))),
               static_cast<int>(rng.below(static_cast<std::uint64_t>(g.dims.height)))};
      Coord from = o.pos;
      std::string obj = o.id;
      std::uint64_t expected = shadow.version();
      switch (rng.below(6)) {
        case 0: expected = expected > 0 ? expected - 1 : expected + 1; break;
        case 1: obj = "ghost"; break;
        case 2: from = {from.x + 1, from.y}; break;
        default: break;
      }
      e = MoveEvent{id, "u" + std::to_string(rng.below(3)), obj, from, to, expected, 0};
    }
    apply_event(shadow, e);
    out.push_back(e);
  }
  return out;
}

std::map<char, int> glyphs(const HabitatState& s) {
  std::map<char, int> out;
  for (const auto& o : s.objects()) ++out[o.glyph];
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("swarm-habitat-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Genesis, LayoutVerbatimAndVersionZero) {
  const auto s = genesis(layout_genesis());
  EXPECT_EQ(s.version(), 0u);
  ASSERT_EQ(s.objects().size(), 3u);
  EXPECT_EQ(s.objects()[1], (LetterObject{"n", 'N', {4, 4}}));
  EXPECT_EQ(s.field().total(), 0.0);
  EXPECT_EQ(s.object_at({6, 2}), std::optional<std::size_t>{2});
}

TEST(Genesis, ScatteredLettersOnDistinctCells) {
  GenesisDescriptor g;
  g.dims = {5, 5};
  g.letters = "ABCDEFGHIJKLMNOPQRSTUVWXY";
  g.seed = 42;
  const auto s = genesis(g);
  ASSERT_EQ(s.objects().size(), 25u);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) EXPECT_TRUE(s.object_at({x, y}).has_value());
  }
  EXPECT_EQ(s.objects()[3].id, "L3");
  EXPECT_EQ(s.objects()[3].glyph, 'D');
  EXPECT_EQ(genesis(g), s);
  g.letters += "Z";
  EXPECT_THROW(genesis(g), Error);
}

TEST(Genesis, RejectsBadLayouts) {
  auto g = layout_genesis();
  g.layout.push_back({"dup", 'B', {1, 1}});
  EXPECT_THROW(genesis(g), Error);
  g = layout_genesis();
  g.layout[0].glyph = 'a';
  EXPECT_THROW(genesis(g), Error);
}

TEST(ApplyMove, ValidMoveDepositsAndBumpsVersion) {
  auto s = genesis(layout_genesis());
  EXPECT_EQ(apply_move(s, move(1, "a", {1, 1}, {1, 2}, 0), 1.0), std::nullopt);
  EXPECT_EQ(s.version(), 1u);
  EXPECT_EQ(s.objects()[0].pos, (Coord{1, 2}));
  EXPECT_EQ(s.field().at({1, 2}), 1.0);
  EXPECT_EQ(s.field().total(), 1.0);
  EXPECT_FALSE(s.object_at({1, 1}).has_value());
}

TEST(ApplyMove, DestinationWraps) {
  auto s = genesis(layout_genesis());
  EXPECT_EQ(apply_move(s, move(1, "a", {9, 7}, {-1, -1}, 0), 0.5), std::nullopt);
  EXPECT_EQ(s.objects()[0].pos, (Coord{7, 5}));
  EXPECT_EQ(s.field().at({7, 5}), 0.5);
}

TEST(ApplyMove, RejectionsLeaveStateUnchanged) {
  auto s = genesis(layout_genesis());
  ASSERT_EQ(apply_move(s, move(1, "a", {1, 1}, {2, 1}, 0), 1.0), std::nullopt);
  const auto before = s;
  EXPECT_EQ(apply_move(s, move(2, "a", {2, 1}, {3, 1}, 0), 1.0), MoveRejection::VersionConflict);
  EXPECT_EQ(apply_move(s, move(2, "t", {6, 2}, {4, 4}, 1), 1.0), MoveRejection::CellOccupied);
  EXPECT_EQ(apply_move(s, move(2, "zz", {6, 2}, {0, 0}, 1), 1.0), MoveRejection::UnknownObject);
  EXPECT_EQ(apply_move(s, move(2, "n", {4, 3}, {0, 0}, 1), 1.0), MoveRejection::ObjectNotAtFrom);
  EXPECT_EQ(s, before);
}

TEST(ApplyTick, Examples) {
  auto g = layout_genesis();
  g.layout.clear();
  g.dims = {2, 2};
  auto s = HabitatState::assemble(g.dims, {}, PheromoneField(g.dims, {1, 1, 1, 1}), 0, g);
  apply_tick(s, {1, 0.0, 0});
  EXPECT_EQ(s.version(), 1u);
  EXPECT_EQ(s.field().at({0, 0}), 1.0);
  apply_tick(s, {2, 0.1, 0});
  for (double v : s.field().values()) EXPECT_DOUBLE_EQ(v, 0.9);
  apply_tick(s, {3, 0.1, 0});
  for (double v : s.field().values()) EXPECT_NEAR(v, 0.81, 1e-15);
  const auto before = s;
  try {
    apply_tick(s, {4, 1.5, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RhoOutOfRange);
  }
  EXPECT_EQ(s, before);
}

TEST(DetectWords, Examples) {
  GenesisDescriptor g;
  g.dims = {6, 6};
  g.layout = {{"1", 'A', {0, 0}}, {"2", 'N', {1, 0}}, {"3", 'T', {2, 0}}};
  const std::set<std::string> lex{"ANT"};
  const auto hits = detect_words(genesis(g), lex);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].word, "ANT");
  EXPECT_EQ(hits[0].direction, Direction::Right);
  EXPECT_EQ(hits[0].cells, (std::vector<Coord>{{0, 0}, {1, 0}, {2, 0}}));

  GenesisDescriptor empty;
  EXPECT_TRUE(detect_words(genesis(empty), lex).empty());

  g.layout = {{"1", 'T', {0, 0}}, {"2", 'N', {1, 0}}, {"3", 'A', {2, 0}}};
  EXPECT_TRUE(detect_words(genesis(g), lex).empty());
}

TEST(DetectWords, MaximalRunsNoWrapAndOrdering) {
  GenesisDescriptor g;
  g.dims = {6, 6};
  // "ANTS" contains ANT but is not itself in the lexicon
  g.layout = {{"1", 'A', {0, 0}}, {"2", 'N', {1, 0}}, {"3", 'T', {2, 0}}, {"4", 'S', {3, 0}}};
  EXPECT_TRUE(detect_words(genesis(g), {"ANT"}).empty());

  // a run across the seam is two runs
  g.layout = {{"1", 'A', {5, 2}}, {"2", 'N', {0, 2}}, {"3", 'T', {1, 2}}};
  EXPECT_TRUE(detect_words(genesis(g), {"ANT"}).empty());
  const auto nt = detect_words(genesis(g), {"NT"});
  ASSERT_EQ(nt.size(), 1u);
  EXPECT_EQ(nt[0].word, "NT");

  // vertical ANT sharing its A with horizontal AT
  g.layout = {{"1", 'A', {2, 1}}, {"2", 'N', {2, 2}}, {"3", 'T', {2, 3}}, {"4", 'T', {3, 1}}};
  const auto hits = detect_words(genesis(g), {"ANT", "AT"});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].word, "AT");
  EXPECT_EQ(hits[0].direction, Direction::Right);
  EXPECT_EQ(hits[1].word, "ANT");
  EXPECT_EQ(hits[1].direction, Direction::Down);
}

TEST(Replay, EmptyLogIsGenesis) {
  const auto g = layout_genesis();
  const auto r = replay({}, g);
  EXPECT_EQ(r.state, genesis(g));
  EXPECT_EQ(r.state.version(), 0u);
  EXPECT_TRUE(r.rejected.empty());
}

TEST(Replay, TwoMovesMatchHandApplied) {
  const auto g = layout_genesis();
  const std::vector<Event> log{move(1, "a", {1, 1}, {2, 1}, 0), move(2, "n", {4, 4}, {3, 1}, 1)};
  const auto r = replay(log, g);
  // by hand: A at (2,1), N at (3,1), T untouched; one unit at each destination
  auto want_field = PheromoneField(g.dims);
  want_field.deposit({2, 1}, 1.0);
  want_field.deposit({3, 1}, 1.0);
  const auto want = HabitatState::assemble(
      g.dims, {{"a", 'A', {2, 1}}, {"n", 'N', {3, 1}}, {"t", 'T', {6, 2}}}, want_field, 2, g);
  EXPECT_EQ(r.state, want);
  EXPECT_EQ(snapshot(r.state).dump(), snapshot(want).dump());
  EXPECT_EQ(detect_words(r.state, {"AN"}).size(), 1u);
}

TEST(Replay, DeterministicAndRecordsRejections) {
  GenesisDescriptor g;
  g.dims = {6, 6};
  g.letters = "ANTSWARM";
  g.seed = 3;
  Rng rng(Seed{11});
  const auto log = random_events(g, 200, rng);
  const auto a = replay(log, g);
  const auto b = replay(log, g);
  EXPECT_EQ(snapshot(a.state).dump(), snapshot(b.state).dump());
  EXPECT_EQ(a.rejected, b.rejected);
  EXPECT_FALSE(a.rejected.empty());
  EXPECT_EQ(a.state.version(), 200u - a.rejected.size());
}

TEST(Replay, InvariantsHoldAfterEveryEvent) {
  GenesisDescriptor g;
  g.dims = {5, 4};
  g.letters = "ABCDEFGH";
  g.seed = 9;
  Rng rng(Seed{12});
  const auto log = random_events(g, 300, rng);
  auto s = genesis(g);
  const auto glyph_set = glyphs(s);
  for (const auto& e : log) {
    const auto before = s;
    const auto r = apply_event(s, e);
    if (r) {
      EXPECT_EQ(s, before);
    } else {
      EXPECT_EQ(s.version(), before.version() + 1);
      if (const auto* m = std::get_if<MoveEvent>(&e)) {
        const Coord to = torus_wrap(m->to, g.dims);
        EXPECT_GT(s.field().at(to), before.field().at(to));
      }
    }
    EXPECT_EQ(glyphs(s), glyph_set);
    std::set<Coord> cells;
    for (const auto& o : s.objects()) EXPECT_TRUE(cells.insert(o.pos).second);
    for (double v : s.field().values()) EXPECT_GE(v, 0.0);
  }
}

TEST(Replay, CorruptLogOnGap) {
  const auto g = layout_genesis();
  const std::vector<Event> gap{move(1, "a", {1, 1}, {2, 1}, 0), move(3, "a", {2, 1}, {3, 1}, 1)};
  try {
    replay(gap, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
  }
  const std::vector<Event> bad_tick{TickEvent{1, 2.0, 0}};
  EXPECT_THROW(replay(bad_tick, g), Error);
}

TEST(ConsensusMetrics, Examples) {
  GenesisDescriptor g;
  g.dims = {8, 8};
  const auto empty = genesis(g);
  EXPECT_EQ(consensus_metrics(empty, {}).letter_cluster_count, 0u);

  g.layout = {{"1", 'A', {2, 2}}, {"2", 'B', {3, 2}}};
  EXPECT_EQ(letter_clusters(genesis(g)), 1u);
  g.layout = {{"1", 'A', {2, 2}}, {"2", 'B', {6, 6}}};
  EXPECT_EQ(letter_clusters(genesis(g)), 2u);
  g.layout = {{"1", 'A', {2, 2}}, {"2", 'B', {3, 3}}};
  EXPECT_EQ(letter_clusters(genesis(g)), 2u);
  g.layout = {{"1", 'A', {0, 4}}, {"2", 'B', {7, 4}}};
  EXPECT_EQ(letter_clusters(genesis(g)), 1u);

  auto u = HabitatState::assemble(g.dims, {}, PheromoneField(g.dims, std::vector<double>(64, 0.5)), 0, g);
  const std::vector<PheromoneField> history{PheromoneField(g.dims, std::vector<double>(64, 0.1)),
                                            PheromoneField(g.dims, std::vector<double>(64, 0.3))};
  const auto m = consensus_metrics(u, history, 1);
  EXPECT_FALSE(m.resistance.has_value());
  EXPECT_NEAR(m.pheromone_entropy, std::log(64.0), 1e-12);
}

TEST(ConsensusMetrics, ResistanceAgainstKBack) {
  GenesisDescriptor g;
  g.dims = {2, 2};
  const auto s = HabitatState::assemble(g.dims, {}, PheromoneField(g.dims, {1, 2, 3, 4}), 0, g);
  const std::vector<PheromoneField> hist{PheromoneField(g.dims, {4, 3, 2, 1}), PheromoneField(g.dims, {2, 4, 6, 8})};
  EXPECT_NEAR(*consensus_metrics(s, hist, 1).resistance, 1.0, 1e-12);
  EXPECT_NEAR(*consensus_metrics(s, hist, 2).resistance, -1.0, 1e-12);
  EXPECT_FALSE(consensus_metrics(s, hist, 3).resistance.has_value());
  EXPECT_EQ(consensus_metrics(s, hist).pheromone_entropy, shannon_entropy(std::vector<double>{1, 2, 3, 4}));
}

TEST(Snapshot, GenesisRoundTrip) {
  GenesisDescriptor g;
  g.dims = {7, 5};
  g.letters = "WORDS";
  g.seed = 5;
  const auto s = genesis(g);
  EXPECT_EQ(load_snapshot(snapshot(s)), s);
  EXPECT_EQ(load_snapshot(snapshot(s).dump()), s);
}

TEST(Snapshot, RoundTripAfterHundredEvents) {
  GenesisDescriptor g;
  g.dims = {9, 7};
  g.letters = "HABITATWORDS";
  g.seed = 77;
  g.deposit_amount = 0.37;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(Seed{seed});
    const auto s = replay(random_events(g, 100, rng), g).state;
    const auto text = snapshot(s).dump();
    const auto back = load_snapshot(text);
    EXPECT_EQ(back, s);
    EXPECT_EQ(snapshot(back).dump(), text);
  }
}

TEST(Snapshot, MalformedDocuments) {
  const auto text = snapshot(genesis(layout_genesis())).dump();
  auto expect_malformed = [](auto&& fn) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedDocument);
    }
  };
  expect_malformed([&] { load_snapshot(std::string_view(text).substr(0, text.size() / 2)); });
  auto doc = snapshot(genesis(layout_genesis()));
  doc.erase("version");
  expect_malformed([&] { load_snapshot(doc); });
  doc = snapshot(genesis(layout_genesis()));
  doc["objects"][1]["x"] = 1;
  doc["objects"][1]["y"] = 1;
  expect_malformed([&] { load_snapshot(doc); });
  doc = snapshot(genesis(layout_genesis()));
  doc["field"][0] = -1.0;
  expect_malformed([&] { load_snapshot(doc); });
  doc = snapshot(genesis(layout_genesis()));
  doc["field"].erase(0);
  expect_malformed([&] { load_snapshot(doc); });
  doc = snapshot(genesis(layout_genesis()));
  doc["objects"][0]["glyph"] = "AB";
  expect_malformed([&] { load_snapshot(doc); });
  doc = snapshot(genesis(layout_genesis()));
  doc["version"] = "seven";
  expect_malformed([&] { load_snapshot(doc); });
}

TEST(EventJson, RoundTripAndErrors) {
  const Event m = move(4, "a", {1, -2}, {3, 4}, 3);
  const Event t = TickEvent{5, 0.02, 99};
  EXPECT_EQ(event_from_json(to_json(m)), m);
  EXPECT_EQ(event_from_json(to_json(t)), t);
  EXPECT_EQ(to_json(m)["type"], "move");
  EXPECT_THROW(event_from_json(json{{"type", "teleport"}}), Error);
  EXPECT_THROW(event_from_json(json{{"type", "tick"}, {"event_id", 1}}), Error);
}

TEST(Lexicon, ParsesUppercaseWords) {
  std::istringstream in("ANT\n\nSWARM\r\nWORD\n");
  EXPECT_EQ(read_lexicon(in), (std::set<std::string>{"ANT", "SWARM", "WORD"}));
  std::istringstream bad("ant\n");
  try {
    read_lexicon(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadLexicon);
  }
  EXPECT_THROW(read_lexicon_file("/nonexistent/lexicon.txt"), Error);
}

TEST(EventLogFile, AppendReadAndTornTail) {
  TempDir dir;
  const auto path = dir.path / "events.jsonl";
  {
    EventLog log(path);
    log.append({move(1, "a", {1, 1}, {2, 1}, 0), std::nullopt});
    log.append({TickEvent{2, 0.1, 0}, std::nullopt});
    log.append({move(3, "a", {1, 1}, {2, 1}, 0), MoveRejection::VersionConflict});
  }
  auto events = read_event_log(path);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0], Event{move(1, "a", {1, 1}, {2, 1}, 0)});
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"type":"move","event_id":4,"us)";
  }
  EXPECT_EQ(read_event_log(path).size(), 3u);
  repair_event_log(path);
  {
    EventLog log(path);
    log.append({TickEvent{4, 0.1, 0}, std::nullopt});
  }
  events = read_event_log(path);
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(event_id(events[3]), 4u);
}

TEST(EventLogFile, CorruptMiddleLine) {
  TempDir dir;
  const auto path = dir.path / "events.jsonl";
  {
    std::ofstream out(path);
    out << to_json(LogRecord{TickEvent{1, 0.1, 0}, std::nullopt}).dump() << "\nnot json\n"
        << to_json(LogRecord{TickEvent{3, 0.1, 0}, std::nullopt}).dump() << "\n";
  }
  try {
    read_event_log(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
  }
}

TEST(Recover, SnapshotPlusTailEqualsFullReplay) {
  TempDir dir;
  GenesisDescriptor g;
  g.dims = {6, 6};
  g.letters = "RECOVERY";
  g.seed = 21;
  Rng rng(Seed{13});
  const auto events = random_events(g, 120, rng);
  {
    EventLog log(dir.path / "events.jsonl");
    auto s = genesis(g);
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto r = apply_event(s, events[i]);
      log.append({events[i], r});
      if (i + 1 == 50 || i + 1 == 100) write_snapshot_file(dir.path, s, i + 1);
    }
  }
  const auto rec = recover(dir.path, g);
  const auto full = replay(events, g);
  EXPECT_EQ(rec.last_event_id, 120u);
  EXPECT_EQ(rec.state, full.state);
  EXPECT_EQ(snapshot(rec.state).dump(), snapshot(full.state).dump());
  EXPECT_EQ(rec.log.size(), 120u);
  const auto latest = latest_snapshot(dir.path);
  ASSERT_TRUE(latest.has_value());
  EXPECT_EQ(latest->last_event_id, 100u);
}

TEST(Recover, EmptyDirectoryIsGenesis) {
  TempDir dir;
  const auto g = layout_genesis();
  const auto rec = recover(dir.path, g);
  EXPECT_EQ(rec.state, genesis(g));
  EXPECT_EQ(rec.last_event_id, 0u);
}
