#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "swarm/error.hpp"

namespace swarm::workbench {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr std::string_view kKinds[] = {"ca",          "boids",        "clustering",
                                              "trails",      "habitat-swap", "aco",
                                              "ga",          "ga-ca",        "serve-habitat"};

inline bool known_kind(std::string_view k) {
  for (auto x : kKinds) {
    if (x == k) return true;
  }
  return false;
}

[[noreturn]] inline void invalid(const std::string& field, const std::string& reason) {
  throw Error(ErrorCode::InvalidConfig, field + ": " + reason);
}

// Typed access to one JSON object with field-path error messages. Keys that
// are never read are reported by finish(), which catches typos.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_, "must be an object");
  }

  std::string name(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return obj_.contains(std::string(key)); }

  template <typename T>
  T required(std::string_view key) {
    if (!has(key)) invalid(name(key), "required field is missing");
    return convert<T>(key);
  }

  template <typename T>
  T get(std::string_view key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  std::optional<T> optional(std::string_view key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Fields object(std::string_view key) {
    used_.insert(std::string(key));
    static const json empty = json::object();
    return Fields(has(key) ? obj_.at(std::string(key)) : empty, name(key));
  }

  const json& raw(std::string_view key) {
    used_.insert(std::string(key));
    return obj_.at(std::string(key));
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!used_.count(k)) invalid(name(k), "unknown field");
    }
  }

 private:
  template <typename T>
  T convert(std::string_view key) {
    used_.insert(std::string(key));
    const json& v = obj_.at(std::string(key));
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) invalid(name(key), "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) invalid(name(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) invalid(name(key), "must be >= 0");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) invalid(name(key), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) invalid(name(key), "expected a string");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      invalid(name(key), "has the wrong type");
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::uint64_t seeds = 1;
  fs::path output_dir;
  json params = json::object();

  json to_json() const {
    return {{"kind", kind},
            {"seed", seed},
            {"seeds", seeds},
            {"output_dir", output_dir.string()},
            {"params", params}};
  }
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> output_dir;
};

// Relative output dirs land under $SWARM_OUTPUT_ROOT when it is set.
inline fs::path resolve_output_dir(const fs::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("SWARM_OUTPUT_ROOT"); root && *root) return fs::path(root) / dir;
  return dir;
}

// Accepts a plain config or a manifest written by a previous run.
inline ExperimentConfig parse_config(const json& doc, const Overrides& o = {}) {
  if (!doc.is_object()) invalid("config", "must be a JSON object");
  const json& cfg = doc.contains("manifest_version") && doc.contains("config") ? doc.at("config") : doc;
  Fields f(cfg, "");
  ExperimentConfig c;
  c.kind = f.required<std::string>("kind");
  if (!known_kind(c.kind)) invalid("kind", "unknown experiment kind '" + c.kind + "'");
  c.seed = o.seed ? *o.seed : f.required<std::uint64_t>("seed");
  if (o.seed && f.has("seed")) f.raw("seed");
  c.seeds = f.get<std::uint64_t>("seeds", 1);
  if (c.seeds < 1) invalid("seeds", "must be >= 1");
  if (o.output_dir) {
    c.output_dir = *o.output_dir;
    if (f.has("output_dir")) f.raw("output_dir");
  } else {
    c.output_dir = f.required<std::string>("output_dir");
  }
  c.output_dir = resolve_output_dir(c.output_dir);
  if (f.has("params")) {
    c.params = f.raw("params");
    if (!c.params.is_object()) invalid("params", "must be an object");
  }
  f.finish();
  return c;
}

inline ExperimentConfig load_config_file(const fs::path& path, const Overrides& o = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) invalid("config", path.string() + " is not valid JSON");
  return parse_config(doc, o);
}

}  // namespace swarm::workbench
