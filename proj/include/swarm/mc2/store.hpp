#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarm/error.hpp"
#include "swarm/mc2/habitat.hpp"

namespace swarm::mc2 {

namespace fs = std::filesystem;

// Newline-delimited uppercase words; blank lines are skipped.
inline std::set<std::string> read_lexicon(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    for (char c : line) {
      if (c < 'A' || c > 'Z') {
        throw Error(ErrorCode::BadLexicon, "line " + std::to_string(n) + ": '" + line + "' is not an uppercase word");
      }
    }
    out.insert(line);
  }
  return out;
}

inline std::set<std::string> read_lexicon_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadLexicon, "cannot read lexicon " + path.string());
  return read_lexicon(in);
}

// A log record is the event plus the outcome observed when it was applied.
// Replay ignores the outcome and recomputes it.
struct LogRecord {
  Event event;
  std::optional<MoveRejection> outcome;
};

inline json to_json(const LogRecord& r) {
  json j = to_json(r.event);
  j["outcome"] = r.outcome ? std::string(to_string(*r.outcome)) : std::string("applied");
  return j;
}

// Append-only JSONL event log; every append is flushed before returning.
class EventLog {
 public:
  explicit EventLog(const fs::path& path) : path_(path) {
    out_ = std::fopen(path.c_str(), "ab");
    if (!out_) throw Error(ErrorCode::IoFailure, "cannot open event log " + path.string());
  }
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog() {
    if (out_) std::fclose(out_);
  }

  void append(const LogRecord& r) {
    const std::string line = to_json(r).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), out_) != line.size() || std::fflush(out_) != 0) {
      throw Error(ErrorCode::IoFailure, "write to event log failed");
    }
  }

  void flush() { std::fflush(out_); }

  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
  std::FILE* out_ = nullptr;
};

// Reads every complete record. A final line without its newline is a torn
// write from a crash and is dropped; any other unparseable line is CorruptLog.
inline std::vector<Event> read_event_log(const fs::path& path) {
  std::vector<Event> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;
    ++line_no;
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + " is not JSON");
    try {
      out.push_back(event_from_json(j));
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// Cuts a torn final record so later appends start on a fresh line.
inline void repair_event_log(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return;
  std::ifstream in(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto nl = content.rfind('\n');
  const auto keep = nl == std::string::npos ? 0 : nl + 1;
  if (keep != content.size()) {
    fs::resize_file(path, keep, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot repair event log " + path.string());
  }
}

inline json snapshot_file_document(const HabitatState& s, std::uint64_t last_event_id) {
  return {{"last_event_id", last_event_id}, {"state", snapshot(s)}};
}

inline fs::path snapshot_path(const fs::path& dir, std::uint64_t last_event_id) {
  char name[48];
  std::snprintf(name, sizeof name, "snapshot-%012llu.json", static_cast<unsigned long long>(last_event_id));
  return dir / name;
}

// Written to a temporary name and renamed, so a crash leaves either the
// old set of snapshots or the new one.
inline void write_snapshot_file(const fs::path& dir, const HabitatState& s, std::uint64_t last_event_id) {
  const auto final_path = snapshot_path(dir, last_event_id);
  const auto tmp = fs::path(final_path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << snapshot_file_document(s, last_event_id).dump();
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write snapshot " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot publish snapshot " + final_path.string());
}

struct StoredSnapshot {
  HabitatState state;
  std::uint64_t last_event_id = 0;
};

inline std::optional<StoredSnapshot> latest_snapshot(const fs::path& dir) {
  std::vector<fs::path> found;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("snapshot-", 0) == 0 && entry.path().extension() == ".json") found.push_back(entry.path());
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end());
  std::ifstream in(found.back(), std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedDocument, found.back().string() + " is not JSON");
  return StoredSnapshot{load_snapshot(detail::get<json>(doc, "state")),
                        detail::get<std::uint64_t>(doc, "last_event_id")};
}

struct Recovered {
  HabitatState state;
  std::uint64_t last_event_id = 0;
  std::vector<Event> log;  // the whole log as read from disk
  std::vector<Rejected> rejected;  // rejections seen while replaying the tail
};

// Latest snapshot (or genesis) plus the log tail after it.
inline Recovered recover(const fs::path& dir, const GenesisDescriptor& g) {
  Recovered out{genesis(g), 0, read_event_log(dir / "events.jsonl"), {}};
  if (auto snap = latest_snapshot(dir)) {
    out.state = std::move(snap->state);
    out.last_event_id = snap->last_event_id;
  }
  std::vector<Event> tail;
  for (const auto& e : out.log) {
    if (event_id(e) > out.last_event_id) tail.push_back(e);
  }
  auto r = replay_from(std::move(out.state), tail, out.last_event_id + 1);
  out.state = std::move(r.state);
  out.rejected = std::move(r.rejected);
  out.last_event_id += tail.size();
  return out;
}

}  // namespace swarm::mc2
