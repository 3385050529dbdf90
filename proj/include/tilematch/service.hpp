#pragma once

// Game sessions behind a small JSON interface. `Service::handle` is the whole
// protocol and knows nothing about sockets; service_http.hpp binds it to an
// HTTP server.
//
//   POST   /session            {layout, rule, seed, free_variant?, border_paths?}
//                              or {layout_text, ...} with the layout file inline
//   GET    /session/{id}
//   POST   /session/{id}/play  {slot_a, slot_b}
//   POST   /session/{id}/undo
//   GET    /session/{id}/hint
//   DELETE /session/{id}
//
// Every success returns the board view. Illegal plays answer 409 with reason
// not-same-face, blocked or no-connection.

#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>

#include <json.hpp>

#include "catalog.hpp"
#include "sampler.hpp"
#include "solver.hpp"

namespace tilematch {

using Json = nlohmann::json;

struct Response {
  int status = 200;
  Json body;
};

struct ServiceOptions {
  std::uint64_t hint_max_nodes = 1'000'000;
  std::string data_dir = tilematch::data_dir();
};

// Why a pair cannot be played, or nullopt when it can.
inline std::optional<std::string> play_refusal(const Board& b, int x, int y, const Rules& rules) {
  if (b.face(x) != b.face(y)) return "not-same-face";
  if (pair_playable(b, x, y, rules)) return std::nullopt;
  if (rules.kind == RuleKind::shisen) {
    if (!pillar_clear(b, x) || !pillar_clear(b, y)) return "blocked";
    return "no-connection";
  }
  return "blocked";
}

class Service {
 public:
  explicit Service(ServiceOptions opt = {}) : opt_(std::move(opt)) {}

  Response handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, path, body);
    } catch (const Json::exception& e) {
      return error(400, std::string("bad request body: ") + e.what());
    }
  }

  std::size_t session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

 private:
  struct Session {
    std::mutex mutex;
    std::string id;
    std::string layout;
    Rules rules;
    std::uint64_t seed = 0;
    Board board;

    Session(std::string i, std::string l, Rules r, std::uint64_t s, Board b)
        : id(std::move(i)), layout(std::move(l)), rules(r), seed(s), board(std::move(b)) {}
  };

  static Response error(int status, const std::string& message, const std::string& reason = "") {
    Json j{{"ok", false}, {"error", message}};
    if (!reason.empty()) j["reason"] = reason;
    return {status, j};
  }

  static Json view(const Session& s) {
    const Board& b = s.board;
    Json slots = Json::array();
    for (int i = 0; i < int(b.size()); ++i) {
      const Slot& sl = b.slot(i);
      slots.push_back(
          {{"index", i}, {"row", sl.row}, {"col", sl.col}, {"level", sl.level}, {"face", b.face(i)}, {"present", b.occupied(i)}});
    }
    Json history = Json::array();
    for (const Move& m : b.history()) history.push_back({m.a, m.b});
    return {{"session_id", s.id},
            {"layout", s.layout},
            {"rule", to_string(s.rules.kind)},
            {"free_variant", to_string(s.rules.free_variant)},
            {"border_paths", s.rules.border_paths},
            {"seed", s.seed},
            {"tiles_left", b.tiles_left()},
            {"slots", slots},
            {"history", history}};
  }

  Response route(const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex session_path(R"(/session/([0-9]+)(/(play|undo|hint))?/?)");
    if (path == "/session" || path == "/session/") {
      if (method != "POST") return error(405, "use POST to create a session");
      return create(body.empty() ? Json::object() : Json::parse(body));
    }
    std::smatch m;
    if (!std::regex_match(path, m, session_path)) return error(404, "no such endpoint: " + path);
    std::shared_ptr<Session> s;
    {
      std::lock_guard lock(mutex_);
      auto it = sessions_.find(m[1]);
      if (it == sessions_.end()) return error(404, "no session " + m[1].str());
      s = it->second;
      if (method == "DELETE" && !m[2].matched) {
        sessions_.erase(it);
        return {200, {{"ok", true}}};
      }
    }
    std::lock_guard lock(s->mutex);
    const std::string action = m[3];
    if (action.empty() && method == "GET") return {200, view(*s)};
    if (action == "play" && method == "POST") return play(*s, Json::parse(body.empty() ? "{}" : body));
    if (action == "undo" && method == "POST") {
      if (s->board.history().empty()) return error(409, "nothing to undo", "no-history");
      s->board.undo();
      return ok(*s);
    }
    if (action == "hint" && method == "GET") return hint(*s);
    return error(405, method + " not allowed on " + path);
  }

  static Response ok(const Session& s) {
    Json j = view(s);
    j["ok"] = true;
    return {200, j};
  }

  Response create(const Json& req) {
    Layout layout;
    try {
      if (req.contains("layout_text")) {
        layout = load_layout(req.at("layout_text").get<std::string>(), req.value("layout", std::string("upload")));
        validate(layout);
      } else {
        layout = resolve_layout(req.value("layout", std::string("default")), opt_.data_dir);
      }
    } catch (const std::exception& e) {
      return error(400, std::string("bad layout: ") + e.what());
    }
    const auto kind = parse_rule_kind(req.value("rule", std::string("shisen")));
    if (!kind) return error(400, "bad rule '" + req.value("rule", std::string()) + "'");
    Rules rules{*kind};
    if (req.contains("free_variant")) {
      const auto v = parse_free_variant(req.at("free_variant").get<std::string>());
      if (!v) return error(400, "bad free_variant");
      rules.free_variant = *v;
    }
    rules.border_paths = req.value("border_paths", true);
    const auto seed = req.value("seed", std::uint64_t{0});
    auto shared = std::make_shared<const Layout>(std::move(layout));
    std::shared_ptr<Session> s;
    {
      std::lock_guard lock(mutex_);
      const std::string id = std::to_string(++next_id_);
      s = std::make_shared<Session>(id, shared->name, rules, seed, deal(shared, seed));
      sessions_[id] = s;
    }
    std::lock_guard lock(s->mutex);
    return ok(*s);
  }

  Response play(Session& s, const Json& req) {
    const int n = int(s.board.size());
    const int a = req.at("slot_a").get<int>(), b = req.at("slot_b").get<int>();
    if (a < 0 || a >= n || b < 0 || b >= n) return error(400, "slot index out of range");
    if (a == b) return error(400, "a pair needs two different slots");
    if (!s.board.occupied(a) || !s.board.occupied(b)) return error(400, "slot already cleared");
    if (auto why = play_refusal(s.board, a, b, s.rules)) return error(409, "illegal move", *why);
    s.board.play(Move::pair_of(a, b));
    return ok(s);
  }

  Response hint(Session& s) {
    SolveOptions opt;
    opt.limits.max_nodes = opt_.hint_max_nodes;
    const auto r = solve(s.board, s.rules, opt);
    Json j{{"ok", true}, {"nodes", r.nodes}};
    j["winnable"] = r.verdict == Verdict::winnable ? "yes" : r.verdict == Verdict::impossible ? "no" : "unknown";
    j["pair"] = r.witness.empty() ? Json(nullptr) : Json{r.witness.front().a, r.witness.front().b};
    return {200, j};
  }

  ServiceOptions opt_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 0;
};

}  // namespace tilematch
