#include "restcheck/fixture.h"

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "httplib.h"
#include "restcheck/error.h"
#include "restcheck/json_util.h"
#include "restcheck/rng.h"
#include "restcheck/workload.h"

namespace restcheck {

namespace {

using Clock = std::chrono::steady_clock;
using Objects = std::map<std::string, Json>;

constexpr auto kSnapshotRefresh = std::chrono::milliseconds(50);
constexpr int kMaxJitterMicros = 5000;
constexpr char kJson[] = "application/json";

void jitter() {
  thread_local std::minstd_rand engine{std::random_device{}()};
  std::uniform_int_distribution<int> micros(0, kMaxJitterMicros);
  std::this_thread::sleep_for(std::chrono::microseconds(micros(engine)));
}

std::string route_regex(const std::string& path_template) {
  static const std::regex kSpecial(R"([.^$|()\[\]{}*+?\\])");
  std::string out;
  const auto pos = path_template.find("{id}");
  const std::string before = path_template.substr(0, pos);
  out += std::regex_replace(before, kSpecial, R"(\$&)");
  if (pos != std::string::npos) {
    out += "([^/]+)";
    out += std::regex_replace(path_template.substr(pos + 4), kSpecial, R"(\$&)");
  }
  return out;
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, Json{{"error", message}});
}

}  // namespace

std::string_view to_string(BugMode mode) {
  switch (mode) {
    case BugMode::kAtomic: return "atomic";
    case BugMode::kCheckThenAct: return "checkThenAct";
    case BugMode::kLostUpdate: return "lostUpdate";
    case BugMode::kStaleReadAll: return "staleReadAll";
  }
  return "?";
}

std::optional<BugMode> parse_bug_mode(std::string_view text) {
  for (auto m : {BugMode::kAtomic, BugMode::kCheckThenAct, BugMode::kLostUpdate,
                 BugMode::kStaleReadAll}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

struct FixtureServer::Impl {
  Impl(ServiceSpec s, FixtureOptions o)
      : spec(std::move(s)), options(std::move(o)), id_rng(options.seed) {
    for (const auto& r : spec.resources) store[r.name];
  }

  ServiceSpec spec;
  FixtureOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = 0;
  bool routes_installed = false;

  // Serializes whole handlers wherever the mode calls for atomicity.
  std::mutex handler_mu;
  // Guards individual store accesses in every mode.
  mutable std::mutex store_mu;
  std::map<std::string, Objects> store;
  std::set<std::string> issued_ids;
  Rng id_rng;
  std::map<std::string, std::pair<Clock::time_point, Json>> snapshots;

  bool buggy(Semantics semantics) const {
    switch (options.mode) {
      case BugMode::kAtomic: return false;
      case BugMode::kCheckThenAct: return true;
      case BugMode::kLostUpdate: return semantics == Semantics::kMerge;
      case BugMode::kStaleReadAll: return semantics == Semantics::kReadAll;
    }
    return false;
  }

  std::string new_id() {
    std::lock_guard lock(store_mu);
    std::string id;
    do {
      id = fresh_id(id_rng);
    } while (!issued_ids.insert(id).second);
    return id;
  }

  std::optional<Json> get(const std::string& resource, const std::string& id) const {
    std::lock_guard lock(store_mu);
    const Objects& objects = store.at(resource);
    auto it = objects.find(id);
    if (it == objects.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& resource, const std::string& id, Json object) {
    std::lock_guard lock(store_mu);
    store[resource][id] = std::move(object);
  }

  bool put_if_present(const std::string& resource, const std::string& id, Json object) {
    std::lock_guard lock(store_mu);
    Objects& objects = store[resource];
    auto it = objects.find(id);
    if (it == objects.end()) return false;
    it->second = std::move(object);
    return true;
  }

  bool merge_if_present(const std::string& resource, const std::string& id,
                        const std::string& id_field, const Json& patch) {
    std::lock_guard lock(store_mu);
    Objects& objects = store[resource];
    auto it = objects.find(id);
    if (it == objects.end()) return false;
    for (const auto& [k, v] : patch.items()) {
      if (k != id_field) it->second[k] = v;
    }
    return true;
  }

  bool erase(const std::string& resource, const std::string& id) {
    std::lock_guard lock(store_mu);
    return store[resource].erase(id) > 0;
  }

  Json list(const std::string& resource) const {
    std::lock_guard lock(store_mu);
    Json out = Json::array();
    for (const auto& [_, object] : store.at(resource)) out.push_back(object);
    return out;
  }

  Json stale_list(const std::string& resource) {
    const auto now = Clock::now();
    {
      std::lock_guard lock(store_mu);
      auto it = snapshots.find(resource);
      if (it != snapshots.end() && now - it->second.first < kSnapshotRefresh) {
        return it->second.second;
      }
    }
    Json fresh = list(resource);
    std::lock_guard lock(store_mu);
    snapshots[resource] = {now, fresh};
    return fresh;
  }

  void handle(const OperationSpec& op, const httplib::Request& req, httplib::Response& res) {
    const ResourceSpec& resource = spec.resource_of(op);
    std::optional<Json> body;
    if (op.semantics == Semantics::kCreate || op.semantics == Semantics::kReplace ||
        op.semantics == Semantics::kMerge) {
      body = try_parse_json(req.body);
      if (!body || !body->is_object()) {
        reply_error(res, 400, "request body must be a JSON object");
        return;
      }
    }
    const std::string id = req.matches.size() > 1 ? std::string(req.matches[1]) : std::string();
    if (buggy(op.semantics)) {
      handle_unsynchronized(op, resource, id, body, res);
    } else {
      std::lock_guard lock(handler_mu);
      handle_atomic(op, resource, id, body, res);
    }
  }

  void handle_atomic(const OperationSpec& op, const ResourceSpec& resource, const std::string& id,
                     const std::optional<Json>& body, httplib::Response& res) {
    const std::string& name = resource.name;
    switch (op.semantics) {
      case Semantics::kCreate: {
        const std::string new_key = new_id();
        Json object = *body;
        object[resource.id_field] = new_key;
        put(name, new_key, object);
        reply(res, 201, object);
        return;
      }
      case Semantics::kReadOne: {
        auto object = get(name, id);
        if (!object) return reply_error(res, 404, "not found");
        return reply(res, 200, *object);
      }
      case Semantics::kReadAll:
        return reply(res, 200, list(name));
      case Semantics::kReplace: {
        if (!get(name, id)) return reply_error(res, 404, "not found");
        Json object = *body;
        object[resource.id_field] = id;
        put(name, id, object);
        return reply(res, 200, object);
      }
      case Semantics::kMerge: {
        if (!merge_if_present(name, id, resource.id_field, *body)) {
          return reply_error(res, 404, "not found");
        }
        return reply(res, 200, *get(name, id));
      }
      case Semantics::kDelete:
        if (!erase(name, id)) return reply_error(res, 404, "not found");
        return reply(res, 200, Json(id));
    }
  }

  // Each store access is individually locked, but nothing holds across the
  // gap between checking and acting.
  void handle_unsynchronized(const OperationSpec& op, const ResourceSpec& resource,
                             const std::string& id, const std::optional<Json>& body,
                             httplib::Response& res) {
    const std::string& name = resource.name;
    if (op.semantics == Semantics::kReadAll && options.mode == BugMode::kStaleReadAll) {
      return reply(res, 200, stale_list(name));
    }
    if (op.semantics == Semantics::kMerge && options.mode == BugMode::kLostUpdate) {
      auto current = get(name, id);
      if (!current) return reply_error(res, 404, "not found");
      jitter();
      for (const auto& [k, v] : body->items()) {
        if (k != resource.id_field) (*current)[k] = v;
      }
      put(name, id, *current);
      return reply(res, 200, *current);
    }
    switch (op.semantics) {
      case Semantics::kCreate: {
        const std::string new_key = new_id();
        Json object = *body;
        object[resource.id_field] = new_key;
        jitter();
        put(name, new_key, object);
        return reply(res, 201, object);
      }
      case Semantics::kReadOne: {
        if (!get(name, id)) return reply_error(res, 404, "not found");
        jitter();
        auto object = get(name, id);
        return reply(res, 200, object ? *object : Json());
      }
      case Semantics::kReadAll:
        return reply(res, 200, list(name));
      case Semantics::kReplace: {
        if (!get(name, id)) return reply_error(res, 404, "not found");
        jitter();
        Json object = *body;
        object[resource.id_field] = id;
        put_if_present(name, id, object);
        jitter();
        auto stored = get(name, id);
        return reply(res, 200, stored ? *stored : Json());
      }
      case Semantics::kMerge: {
        if (!get(name, id)) return reply_error(res, 404, "not found");
        jitter();
        merge_if_present(name, id, resource.id_field, *body);
        jitter();
        auto stored = get(name, id);
        return reply(res, 200, stored ? *stored : Json());
      }
      case Semantics::kDelete: {
        if (!get(name, id)) return reply_error(res, 404, "not found");
        jitter();
        erase(name, id);
        return reply(res, 200, Json(id));
      }
    }
  }

  void install_routes() {
    if (routes_installed) return;
    routes_installed = true;
    server.set_keep_alive_max_count(1u << 20);
    server.set_tcp_nodelay(true);
    // The library default also sets SO_REUSEPORT, which would let a second
    // server share a busy port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    if (options.allow_reset) {
      server.Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
        reset();
        reply(res, 200, Json("reset"));
      });
    }
    std::map<std::string, std::map<HttpMethod, const OperationSpec*>> by_path;
    for (const auto& op : spec.operations) by_path[op.path][op.method] = &op;
    for (const auto& [path, methods] : by_path) {
      const std::string pattern = route_regex(path);
      for (auto method : {HttpMethod::kPost, HttpMethod::kGet, HttpMethod::kPut,
                          HttpMethod::kPatch, HttpMethod::kDelete}) {
        auto it = methods.find(method);
        const OperationSpec* op = it == methods.end() ? nullptr : it->second;
        httplib::Server::Handler handler = [this, op](const httplib::Request& req,
                                                      httplib::Response& res) {
          if (!op) return reply_error(res, 405, "method not allowed");
          handle(*op, req, res);
        };
        switch (method) {
          case HttpMethod::kPost: server.Post(pattern, handler); break;
          case HttpMethod::kGet: server.Get(pattern, handler); break;
          case HttpMethod::kPut: server.Put(pattern, handler); break;
          case HttpMethod::kPatch: server.Patch(pattern, handler); break;
          case HttpMethod::kDelete: server.Delete(pattern, handler); break;
        }
      }
    }
  }

  void bind() {
    install_routes();
    if (options.port == 0) {
      bound_port = server.bind_to_any_port(options.host);
      if (bound_port <= 0) throw Error("cannot bind " + options.host);
    } else {
      if (!server.bind_to_port(options.host, options.port)) {
        throw Error("cannot bind " + options.host + ":" + std::to_string(options.port));
      }
      bound_port = options.port;
    }
  }

  void reset() {
    std::lock_guard handler_lock(handler_mu);
    std::lock_guard lock(store_mu);
    for (auto& [_, objects] : store) objects.clear();
    snapshots.clear();
  }
};

FixtureServer::FixtureServer(ServiceSpec spec, FixtureOptions options)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(options))) {}

FixtureServer::~FixtureServer() { stop(); }

void FixtureServer::start() {
  impl_->bind();
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void FixtureServer::serve_forever() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void FixtureServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int FixtureServer::port() const { return impl_->bound_port; }

std::string FixtureServer::target() const {
  return impl_->options.host + ":" + std::to_string(impl_->bound_port);
}

void FixtureServer::reset() { impl_->reset(); }

std::size_t FixtureServer::object_count(std::string_view resource) const {
  std::lock_guard lock(impl_->store_mu);
  auto it = impl_->store.find(std::string(resource));
  return it == impl_->store.end() ? 0 : it->second.size();
}

}  // namespace restcheck
