#ifndef RESTCHECK_EXECUTOR_H_
#define RESTCHECK_EXECUTOR_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "restcheck/history.h"
#include "restcheck/spec_model.h"
#include "restcheck/workload.h"

namespace httplib {
class Client;
}

namespace restcheck {

struct Target {
  std::string host;
  int port = 0;

  std::string text() const { return host + ":" + std::to_string(port); }
  bool operator==(const Target&) const = default;
};

// "host:port"; throws Error when malformed.
Target parse_target(std::string_view text);

struct RunConfig {
  Target target;
  std::chrono::milliseconds timeout{1000};
  int clients = 1;
  std::int64_t period_millis = 0;
  std::int64_t duration_secs = 1;
  std::uint64_t seed = 0;
};

// Workload parameters with a target; throws Error if the workload names none
// and `target` is empty.
RunConfig make_run_config(const Workload& workload, std::optional<Target> target,
                          std::uint64_t seed);

// ok: 2xx. error: 4xx, or 5xx on a read. info: 5xx on a write, timeouts and
// connection failures (the effect is unknown).
struct Completion {
  EventKind kind = EventKind::kInfo;
  std::optional<Json> output;
  std::optional<int> status;
};

// One keep-alive HTTP/1.1 connection to the target. Not thread-safe; each
// client owns one.
class HttpTransport {
 public:
  HttpTransport(const Target& target, std::chrono::milliseconds timeout);
  ~HttpTransport();
  HttpTransport(const HttpTransport&) = delete;
  HttpTransport& operator=(const HttpTransport&) = delete;

  Completion execute(const Action& action);

 private:
  std::unique_ptr<httplib::Client> client_;
};

Completion execute_action(const Action& action, const RunConfig& config);

// Shared append-only sink. Appends are serialized and receive consecutive
// indices, which define the total order of the run.
class HistoryRecorder {
 public:
  HistoryRecorder();

  // Returns false once the recorder is sealed.
  bool record_invoke(int client, const Action& action);
  bool record_completion(int client, const Action& action, const Completion& completion,
                         const std::string& id_field);
  // Closes every outstanding invocation with an info completion and rejects
  // later appends.
  void seal();
  History snapshot() const;

 private:
  HistoryEvent base_event(int client, const Action& action);

  mutable std::mutex mu_;
  History events_;
  std::map<int, Action> outstanding_;
  std::uint64_t next_index_ = 0;
  bool sealed_ = false;
};

// Runs `config.clients` sequential clients against the target until
// `duration_secs` elapse, then drains in-flight requests for at most
// min(timeout, 2 s). Network failures are recorded, never thrown.
History run_workload(const ServiceSpec& spec, const Workload& workload, const RunConfig& config);

}  // namespace restcheck

#endif  // RESTCHECK_EXECUTOR_H_
