#include "restcheck/executor.h"

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <thread>
#include <vector>

#include "httplib.h"
#include "restcheck/error.h"

namespace restcheck {

namespace {

using Clock = std::chrono::steady_clock;

constexpr auto kMaxDrain = std::chrono::milliseconds(2000);
constexpr char kJson[] = "application/json";

std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json();
  if (auto parsed = try_parse_json(body)) return *parsed;
  return Json(body);
}

std::string body_text(const Action& action) {
  return action.body ? action.body->dump() : std::string("{}");
}

}  // namespace

Target parse_target(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error("target must be host:port, got '" + std::string(text) + "'");
  }
  Target target;
  target.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), target.port);
  if (ec != std::errc() || end != port.data() + port.size() || target.port <= 0 ||
      target.port > 65535) {
    throw Error("invalid port in target '" + std::string(text) + "'");
  }
  return target;
}

RunConfig make_run_config(const Workload& workload, std::optional<Target> target,
                          std::uint64_t seed) {
  RunConfig config;
  if (target) {
    config.target = *target;
  } else if (workload.target) {
    config.target = parse_target(*workload.target);
  } else {
    throw Error("no target given");
  }
  config.clients = workload.clients;
  config.period_millis = workload.period_millis;
  config.duration_secs = workload.duration_secs;
  config.seed = seed;
  return config;
}

HttpTransport::HttpTransport(const Target& target, std::chrono::milliseconds timeout)
    : client_(std::make_unique<httplib::Client>(target.host, target.port)) {
  client_->set_connection_timeout(timeout);
  client_->set_read_timeout(timeout);
  client_->set_write_timeout(timeout);
  client_->set_keep_alive(true);
  client_->set_tcp_nodelay(true);
}

HttpTransport::~HttpTransport() = default;

Completion HttpTransport::execute(const Action& action) {
  httplib::Result result;
  switch (action.method) {
    case HttpMethod::kGet:
      result = client_->Get(action.path);
      break;
    case HttpMethod::kPost:
      result = client_->Post(action.path, body_text(action), kJson);
      break;
    case HttpMethod::kPut:
      result = client_->Put(action.path, body_text(action), kJson);
      break;
    case HttpMethod::kPatch:
      result = client_->Patch(action.path, body_text(action), kJson);
      break;
    case HttpMethod::kDelete:
      result = client_->Delete(action.path);
      break;
  }

  Completion completion;
  if (!result) {
    completion.kind = EventKind::kInfo;
    completion.output = Json(httplib::to_string(result.error()));
    return completion;
  }
  const int status = result->status;
  completion.status = status;
  if (status >= 200 && status < 300) {
    completion.kind = EventKind::kOk;
    completion.output = parse_body(result->body);
  } else if (status >= 500 && !is_read(action.semantics)) {
    completion.kind = EventKind::kInfo;
  } else {
    completion.kind = EventKind::kError;
  }
  return completion;
}

Completion execute_action(const Action& action, const RunConfig& config) {
  HttpTransport transport(config.target, config.timeout);
  return transport.execute(action);
}

HistoryRecorder::HistoryRecorder() = default;

HistoryEvent HistoryRecorder::base_event(int client, const Action& action) {
  HistoryEvent e;
  e.index = next_index_++;
  e.wall_time = wall_clock_ms();
  e.client = client;
  e.op_id = action.operation_id;
  e.method = action.method;
  e.resource = action.resource;
  e.id = action.id;
  return e;
}

bool HistoryRecorder::record_invoke(int client, const Action& action) {
  std::lock_guard lock(mu_);
  if (sealed_) return false;
  HistoryEvent e = base_event(client, action);
  e.kind = EventKind::kInvoke;
  e.body = action.body;
  events_.push_back(std::move(e));
  outstanding_[client] = action;
  return true;
}

bool HistoryRecorder::record_completion(int client, const Action& action,
                                        const Completion& completion,
                                        const std::string& id_field) {
  std::lock_guard lock(mu_);
  if (sealed_ || !outstanding_.count(client)) return false;
  HistoryEvent e = base_event(client, action);
  e.kind = completion.kind;
  e.output = completion.output;
  e.status = completion.status;
  if (action.semantics == Semantics::kCreate && completion.kind == EventKind::kOk &&
      completion.output && completion.output->is_object()) {
    auto it = completion.output->find(id_field);
    e.id = it == completion.output->end() ? std::nullopt : id_text(*it);
  }
  events_.push_back(std::move(e));
  outstanding_.erase(client);
  return true;
}

void HistoryRecorder::seal() {
  std::lock_guard lock(mu_);
  if (sealed_) return;
  for (const auto& [client, action] : outstanding_) {
    HistoryEvent e = base_event(client, action);
    e.kind = EventKind::kInfo;
    e.output = Json("unfinished at end of run");
    events_.push_back(std::move(e));
  }
  outstanding_.clear();
  sealed_ = true;
}

History HistoryRecorder::snapshot() const {
  std::lock_guard lock(mu_);
  return events_;
}

History run_workload(const ServiceSpec& spec, const Workload& workload, const RunConfig& config) {
  if (config.clients < 1) throw Error("clients must be at least 1");
  if (config.timeout.count() <= 0) throw Error("timeout must be positive");
  if (workload.scenarios.empty()) throw Error("workload defines no scenarios");
  for (const auto& s : workload.scenarios) {
    for (const auto& step : s.flow) {
      if (!spec.find_operation(step)) throw Error("unknown operation '" + step + "' in flow");
    }
  }

  const DependencyTable deps = resolve_links(spec);
  const Rng root(config.seed);
  IdPool pool;
  HistoryRecorder recorder;

  const auto start = Clock::now();
  const auto deadline = start + std::chrono::seconds(config.duration_secs);
  std::mutex mu;
  std::condition_variable cv;
  int finished = 0;

  auto client_loop = [&](int client) {
    Rng rng = root.split(static_cast<std::uint64_t>(client) + 1);
    HttpTransport transport(config.target, config.timeout);
    FlowContext flow;
    bool open = true;
    while (open && Clock::now() < deadline) {
      const Scenario& scenario = select_scenario(workload, rng);
      flow.clear();
      // Steps keep being issued after a failed step.
      for (const auto& op_id : scenario.flow) {
        if (Clock::now() >= deadline) break;
        const Action action = materialize_step(op_id, spec, deps, pool, rng, flow);
        const std::string& id_field = spec.resource_of(*spec.find_operation(op_id)).id_field;
        if (!recorder.record_invoke(client, action)) {
          open = false;
          break;
        }
        const Completion completion = transport.execute(action);
        if (!recorder.record_completion(client, action, completion, id_field)) {
          open = false;
          break;
        }
        if (completion.kind != EventKind::kOk) continue;
        const Json output = completion.output.value_or(Json());
        flow.record(op_id, output);
        if (action.semantics == Semantics::kCreate && output.is_object()) {
          auto it = output.find(id_field);
          if (it != output.end()) {
            if (auto id = id_text(*it)) pool.add(action.resource, *id);
          }
        } else if (action.semantics == Semantics::kDelete && action.id) {
          pool.remove(action.resource, *action.id);
        }
      }
      const auto wake = std::min(deadline, Clock::now() + std::chrono::milliseconds(config.period_millis));
      std::unique_lock lock(mu);
      cv.wait_until(lock, wake, [&] { return Clock::now() >= wake; });
    }
    std::lock_guard lock(mu);
    ++finished;
    cv.notify_all();
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(config.clients));
  for (int c = 0; c < config.clients; ++c) threads.emplace_back(client_loop, c);

  {
    std::unique_lock lock(mu);
    cv.wait_until(lock, deadline, [&] { return finished == config.clients; });
    const auto drain = std::min<std::chrono::milliseconds>(config.timeout, kMaxDrain);
    cv.wait_until(lock, std::max(deadline, Clock::now()) + drain,
                  [&] { return finished == config.clients; });
  }
  recorder.seal();
  for (auto& t : threads) t.join();
  return recorder.snapshot();
}

}  // namespace restcheck
