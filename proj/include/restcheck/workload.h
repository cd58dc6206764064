#ifndef RESTCHECK_WORKLOAD_H_
#define RESTCHECK_WORKLOAD_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restcheck/json_util.h"
#include "restcheck/rng.h"
#include "restcheck/spec_model.h"

namespace restcheck {

struct Scenario {
  std::uint32_t weight = 1;
  std::vector<std::string> flow;

  bool operator==(const Scenario&) const = default;
};

struct Workload {
  std::vector<Scenario> scenarios;
  int clients = 1;
  std::int64_t period_millis = 0;
  std::int64_t duration_secs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> target;

  bool operator==(const Workload&) const = default;
};

// Parses a workload document and checks every flow step against `spec`.
// Throws WorkloadError.
Workload parse_workload(std::string_view text, const ServiceSpec& spec);

// Index of the chosen scenario; scenario i has probability weight_i / sum.
std::size_t select_scenario_index(const Workload& workload, Rng& rng);
const Scenario& select_scenario(const Workload& workload, Rng& rng);

// Ids believed to exist, per resource. Advisory only: concurrent clients may
// race on membership. Each member function is individually atomic.
class IdPool {
 public:
  void add(const std::string& resource, const std::string& id);
  void remove(const std::string& resource, const std::string& id);
  std::optional<std::string> pick(const std::string& resource, Rng& rng) const;
  bool contains(const std::string& resource, const std::string& id) const;
  std::size_t size(const std::string& resource) const;

 private:
  struct Members {
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> position;
  };
  mutable std::mutex mu_;
  std::map<std::string, Members> members_;
};

// Responses of the steps already executed in the current flow iteration.
class FlowContext {
 public:
  void record(const std::string& operation_id, const Json& output);
  void clear() { outputs_.clear(); }
  // Id for a dependent operation: the first binding whose source operation
  // has produced a response carrying the bound field.
  std::optional<std::string> bound_id(const std::vector<LinkBinding>& bindings) const;

 private:
  std::map<std::string, Json> outputs_;
};

struct Action {
  std::string operation_id;
  HttpMethod method = HttpMethod::kGet;
  Semantics semantics = Semantics::kReadAll;
  std::string resource;
  std::string path;
  std::optional<std::string> id;
  std::optional<Json> body;

  bool operator==(const Action&) const = default;
};

// 12 uppercase hexadecimal characters.
std::string fresh_id(Rng& rng);

// Substitutes the (percent-encoded) id into a "{id}" path template.
std::string expand_path(std::string_view path_template, std::string_view id);

// Turns a flow step into a concrete request. The id of an id-taking
// operation comes from, in order: a link binding satisfied earlier in this
// flow, a random pool member, or a fresh id that was never created.
Action materialize_step(std::string_view operation_id, const ServiceSpec& spec,
                        const DependencyTable& deps, const IdPool& pool, Rng& rng,
                        const FlowContext& flow);

}  // namespace restcheck

#endif  // RESTCHECK_WORKLOAD_H_
