#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "swarm/error.hpp"
#include "swarm/mc2/habitat.hpp"
#include "swarm/mc2/store.hpp"

namespace swarm::mc2 {

struct ServiceConfig {
  std::filesystem::path data_dir = "habitat-data";
  GenesisDescriptor genesis;
  std::set<std::string> lexicon;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::chrono::milliseconds tick_interval{30000};  // 0 disables ticks
  double tick_rho = 0.02;
  std::uint64_t snapshot_every = 50;
  std::size_t resistance_k = 10;
};

// Immutable view published after every event.
struct PublishedView {
  HabitatState state;
  std::uint64_t last_event_id = 0;
  std::string snapshot_text;
  std::shared_ptr<const std::vector<json>> events;  // log records, event_id order
  json metrics;
  json words;
};

struct MoveRequest {
  std::string user;
  std::string object_id;
  Coord from;
  Coord to;
  std::uint64_t expected_version = 0;
};

struct SubmitResult {
  std::uint64_t event_id = 0;
  std::uint64_t version = 0;
  std::optional<MoveRejection> rejection;
};

inline std::int64_t utc_millis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

inline MoveRequest move_request_from_json(const json& j) {
  return {detail::get<std::string>(j, "user"), detail::get<std::string>(j, "object_id"),
          detail::coord_from(detail::get<json>(j, "from")), detail::coord_from(detail::get<json>(j, "to")),
          detail::get<std::uint64_t>(j, "expected_version")};
}

// Single serialized writer over the habitat. Every event is applied, logged
// (flushed) and then published; readers only ever see published views.
class HabitatService {
 public:
  explicit HabitatService(ServiceConfig cfg, std::function<std::int64_t()> clock = utc_millis)
      : cfg_(std::move(cfg)), clock_(std::move(clock)) {
    std::error_code ec;
    std::filesystem::create_directories(cfg_.data_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + cfg_.data_dir.string());
    repair_event_log(log_path());
    auto rec = recover(cfg_.data_dir, cfg_.genesis);
    state_ = std::move(rec.state);
    last_event_id_ = rec.last_event_id;
    auto events = std::make_shared<std::vector<json>>();
    rebuild_records(rec.log, *events);
    events_ = std::move(events);
    log_ = std::make_unique<EventLog>(log_path());
    publish();
  }

  HabitatService(const HabitatService&) = delete;
  HabitatService& operator=(const HabitatService&) = delete;
  ~HabitatService() { stop(); }

  std::filesystem::path log_path() const { return cfg_.data_dir / "events.jsonl"; }

  std::shared_ptr<const PublishedView> view() const {
    std::lock_guard lock(publish_mu_);
    return view_;
  }

  SubmitResult submit_move(const MoveRequest& m) {
    std::lock_guard lock(write_mu_);
    MoveEvent e{last_event_id_ + 1, m.user, m.object_id, m.from, m.to, m.expected_version, clock_()};
    const auto rejection = apply_move(state_, e, state_.created_from().deposit_amount);
    commit(Event{e}, rejection);
    return {e.event_id, state_.version(), rejection};
  }

  SubmitResult submit_tick(double rho) {
    std::lock_guard lock(write_mu_);
    TickEvent t{last_event_id_ + 1, rho, clock_()};
    apply_tick(state_, t);
    commit(Event{t}, std::nullopt);
    return {t.event_id, state_.version(), std::nullopt};
  }

  // Binds and starts serving in the background; returns the bound port.
  int start() {
    if (server_) return port_;
    server_ = std::make_unique<httplib::Server>();
    server_->set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    install_routes(*server_);
    if (cfg_.port == 0) {
      port_ = server_->bind_to_any_port(cfg_.host);
    } else {
      port_ = server_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
    }
    if (port_ <= 0) {
      server_.reset();
      throw Error(ErrorCode::PortUnavailable,
                  "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    }
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    if (cfg_.tick_interval.count() > 0) {
      ticker_ = std::thread([this] { tick_loop(); });
    }
    return port_;
  }

  // Stops ticks and HTTP, flushes the log and writes a final snapshot.
  void stop() {
    {
      std::lock_guard lock(tick_mu_);
      stopping_ = true;
    }
    tick_cv_.notify_all();
    if (ticker_.joinable()) ticker_.join();
    if (server_) {
      server_->stop();
      if (listener_.joinable()) listener_.join();
      server_.reset();
    }
    std::lock_guard lock(write_mu_);
    if (log_) {
      log_->flush();
      if (last_event_id_ > last_snapshot_id_) checkpoint();
    }
  }

  int port() const noexcept { return port_; }

 private:
  void rebuild_records(const std::vector<Event>& log, std::vector<json>& out) {
    // Outcomes come from replaying the whole log from genesis.
    HabitatState s = genesis(cfg_.genesis);
    remember_field(s.field());
    for (const auto& e : log) {
      const auto r = apply_event(s, e);
      out.push_back(to_json(LogRecord{e, r}));
      if (!r) remember_field(s.field());
    }
  }

  void remember_field(const PheromoneField& f) {
    history_.push_back(f);
    while (history_.size() > cfg_.resistance_k + 1) history_.pop_front();
  }

  void commit(const Event& e, std::optional<MoveRejection> outcome) {
    last_event_id_ = event_id(e);
    const LogRecord rec{e, outcome};
    log_->append(rec);
    auto events = std::make_shared<std::vector<json>>(*events_);
    events->push_back(to_json(rec));
    events_ = std::move(events);
    if (!outcome) remember_field(state_.field());
    if (cfg_.snapshot_every > 0 && last_event_id_ % cfg_.snapshot_every == 0) checkpoint();
    publish();
  }

  void checkpoint() {
    write_snapshot_file(cfg_.data_dir, state_, last_event_id_);
    last_snapshot_id_ = last_event_id_;
  }

  void publish() {
    auto v = std::make_shared<PublishedView>();
    v->state = state_;
    v->last_event_id = last_event_id_;
    v->snapshot_text = snapshot(state_).dump();
    v->events = events_;
    // history_ ends with the current field; metrics look further back.
    std::vector<PheromoneField> past(history_.begin(), history_.end());
    if (!past.empty()) past.pop_back();
    v->metrics = to_json(consensus_metrics(state_, past, cfg_.resistance_k));
    json words = json::array();
    for (const auto& h : detect_words(state_, cfg_.lexicon)) words.push_back(to_json(h));
    v->words = std::move(words);
    std::lock_guard lock(publish_mu_);
    view_ = std::move(v);
  }

  void tick_loop() {
    std::unique_lock lock(tick_mu_);
    while (!stopping_) {
      if (tick_cv_.wait_for(lock, cfg_.tick_interval, [this] { return stopping_; })) break;
      lock.unlock();
      submit_tick(cfg_.tick_rho);
      lock.lock();
    }
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(body.dump(), "application/json");
  }

  static json error_body(std::string_view code, const std::string& message) {
    return {{"code", code}, {"message", message}};
  }

  void install_routes(httplib::Server& srv) {
    srv.Get("/habitat", [this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_content(view()->snapshot_text, "application/json");
    });
    srv.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, view()->metrics);
    });
    srv.Get("/words", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, view()->words);
    });
    srv.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t since = 0;
      if (req.has_param("since")) {
        const auto text = req.get_param_value("since");
        try {
          if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("since");
          }
          since = std::stoull(text);
        } catch (const std::exception&) {
          reply(res, 400, error_body("MalformedDocument", "since must be a non-negative integer"));
          return;
        }
      }
      const auto v = view();
      json out = json::array();
      for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(since, v->events->size()));
           i < v->events->size(); ++i) {
        out.push_back((*v->events)[i]);
      }
      reply(res, 200, {{"last_event_id", v->last_event_id}, {"events", out}});
    });
    srv.Post("/moves", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body, nullptr, false);
      MoveRequest m;
      try {
        if (body.is_discarded()) throw Error(ErrorCode::MalformedDocument, "body is not JSON");
        m = move_request_from_json(body);
      } catch (const Error& e) {
        reply(res, 400, error_body("MalformedDocument", e.what()));
        return;
      }
      const auto r = submit_move(m);
      if (!r.rejection) {
        reply(res, 200, {{"version", r.version}, {"event_id", r.event_id}});
        return;
      }
      const int status = *r.rejection == MoveRejection::UnknownObject ? 404 : 409;
      json err = error_body(to_string(*r.rejection), "move of " + m.object_id + " rejected");
      err["event_id"] = r.event_id;
      err["version"] = r.version;
      reply(res, status, err);
    });
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

  ServiceConfig cfg_;
  std::function<std::int64_t()> clock_;

  std::mutex write_mu_;
  HabitatState state_;
  std::uint64_t last_event_id_ = 0;
  std::uint64_t last_snapshot_id_ = 0;
  std::shared_ptr<const std::vector<json>> events_;
  std::deque<PheromoneField> history_;
  std::unique_ptr<EventLog> log_;

  mutable std::mutex publish_mu_;
  std::shared_ptr<const PublishedView> view_;

  std::mutex tick_mu_;
  std::condition_variable tick_cv_;
  bool stopping_ = false;
  std::thread ticker_;

  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  int port_ = -1;
};

}  // namespace swarm::mc2
