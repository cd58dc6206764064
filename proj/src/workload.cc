#include "restcheck/workload.h"

#include <cctype>
#include <algorithm>
#include <numeric>

#include <yaml-cpp/yaml.h>

#include "restcheck/datagen.h"
#include "restcheck/error.h"

namespace restcheck {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& message) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw WorkloadError(message);
  throw WorkloadError(message, mark.line + 1, mark.column + 1);
}

template <typename T>
T integer(const YAML::Node& node, const char* key) {
  try {
    if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail_at(node, std::string(key) + " must be an integer");
  }
}

Scenario load_scenario(const YAML::Node& node, const ServiceSpec& spec) {
  if (!node.IsMap()) fail_at(node, "scenario must be a mapping");
  Scenario scenario;
  for (const auto& entry : node) {
    const std::string key = entry.first.as<std::string>();
    if (key != "weight" && key != "flow") fail_at(entry.first, "unknown key '" + key + "' in scenario");
  }
  if (const YAML::Node weight = node["weight"]) {
    const auto w = integer<std::int64_t>(weight, "weight");
    if (w < 1) fail_at(weight, "weight must be at least 1");
    scenario.weight = static_cast<std::uint32_t>(w);
  }
  const YAML::Node flow = node["flow"];
  if (!flow || !flow.IsSequence()) fail_at(node, "scenario needs a flow list");
  for (const auto& step : flow) {
    if (!step.IsScalar()) fail_at(step, "flow entries must be operation ids");
    const std::string op = step.as<std::string>();
    if (!spec.find_operation(op)) fail_at(step, "unknown operation '" + op + "'");
    scenario.flow.push_back(op);
  }
  if (scenario.flow.empty()) fail_at(flow, "flow must not be empty");
  return scenario;
}

}  // namespace

Workload parse_workload(std::string_view text, const ServiceSpec& spec) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw WorkloadError("syntax error: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || !root.IsMap()) throw WorkloadError("workload document must be a mapping");
  Workload workload;
  for (const auto& entry : root) {
    const std::string key = entry.first.as<std::string>();
    const YAML::Node& value = entry.second;
    if (key == "target") {
      if (!value.IsScalar()) fail_at(value, "target must be host:port");
      workload.target = value.as<std::string>();
    } else if (key == "clients") {
      workload.clients = integer<int>(value, "clients");
      if (workload.clients < 1) fail_at(value, "clients must be at least 1");
    } else if (key == "periodMillis") {
      workload.period_millis = integer<std::int64_t>(value, "periodMillis");
      if (workload.period_millis < 0) fail_at(value, "periodMillis must be non-negative");
    } else if (key == "durationSecs") {
      workload.duration_secs = integer<std::int64_t>(value, "durationSecs");
      if (workload.duration_secs < 1) fail_at(value, "durationSecs must be at least 1");
    } else if (key == "seed") {
      workload.seed = integer<std::uint64_t>(value, "seed");
    } else if (key == "scenarios") {
      // A bare mapping is read as a single scenario.
      if (value.IsMap()) {
        workload.scenarios.push_back(load_scenario(value, spec));
      } else if (value.IsSequence()) {
        for (const auto& s : value) workload.scenarios.push_back(load_scenario(s, spec));
      } else {
        fail_at(value, "scenarios must be a list");
      }
    } else {
      fail_at(entry.first, "unknown key '" + key + "' in workload");
    }
  }
  if (workload.scenarios.empty()) throw WorkloadError("workload defines no scenarios");
  return workload;
}

std::size_t select_scenario_index(const Workload& workload, Rng& rng) {
  std::uint64_t total = 0;
  for (const auto& s : workload.scenarios) total += s.weight;
  auto ticket = static_cast<std::uint64_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
  for (std::size_t i = 0; i < workload.scenarios.size(); ++i) {
    if (ticket < workload.scenarios[i].weight) return i;
    ticket -= workload.scenarios[i].weight;
  }
  return workload.scenarios.size() - 1;
}

const Scenario& select_scenario(const Workload& workload, Rng& rng) {
  return workload.scenarios[select_scenario_index(workload, rng)];
}

void IdPool::add(const std::string& resource, const std::string& id) {
  std::lock_guard lock(mu_);
  Members& m = members_[resource];
  if (m.position.count(id)) return;
  m.position[id] = m.ids.size();
  m.ids.push_back(id);
}

void IdPool::remove(const std::string& resource, const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = members_.find(resource);
  if (it == members_.end()) return;
  Members& m = it->second;
  auto pos = m.position.find(id);
  if (pos == m.position.end()) return;
  const std::size_t index = pos->second;
  m.position.erase(pos);
  if (index + 1 != m.ids.size()) {
    m.ids[index] = std::move(m.ids.back());
    m.position[m.ids[index]] = index;
  }
  m.ids.pop_back();
}

std::optional<std::string> IdPool::pick(const std::string& resource, Rng& rng) const {
  std::lock_guard lock(mu_);
  auto it = members_.find(resource);
  if (it == members_.end() || it->second.ids.empty()) return std::nullopt;
  return it->second.ids[rng.index(it->second.ids.size())];
}

bool IdPool::contains(const std::string& resource, const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = members_.find(resource);
  return it != members_.end() && it->second.position.count(id) > 0;
}

std::size_t IdPool::size(const std::string& resource) const {
  std::lock_guard lock(mu_);
  auto it = members_.find(resource);
  return it == members_.end() ? 0 : it->second.ids.size();
}

void FlowContext::record(const std::string& operation_id, const Json& output) {
  outputs_[operation_id] = output;
}

std::optional<std::string> FlowContext::bound_id(
    const std::vector<LinkBinding>& bindings) const {
  for (const auto& b : bindings) {
    auto it = outputs_.find(b.source_operation_id);
    if (it == outputs_.end() || !it->second.is_object()) continue;
    auto field = it->second.find(b.response_field);
    if (field == it->second.end()) continue;
    if (auto id = id_text(*field)) return id;
  }
  return std::nullopt;
}

std::string fresh_id(Rng& rng) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string id;
  for (int i = 0; i < 12; ++i) id.push_back(kHex[rng.index(16)]);
  return id;
}

std::string expand_path(std::string_view path_template, std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string encoded;
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      encoded.push_back(static_cast<char>(c));
    } else {
      encoded.push_back('%');
      encoded.push_back(kHex[c >> 4]);
      encoded.push_back(kHex[c & 0xf]);
    }
  }
  std::string path(path_template);
  const auto pos = path.find("{id}");
  if (pos != std::string::npos) path.replace(pos, 4, encoded);
  return path;
}

Action materialize_step(std::string_view operation_id, const ServiceSpec& spec,
                        const DependencyTable& deps, const IdPool& pool, Rng& rng,
                        const FlowContext& flow) {
  const OperationSpec* op = spec.find_operation(operation_id);
  if (!op) throw WorkloadError("unknown operation '" + std::string(operation_id) + "'");
  const ResourceSpec& resource = spec.resource_of(*op);

  Action action;
  action.operation_id = op->operation_id;
  action.method = op->method;
  action.semantics = op->semantics;
  action.resource = op->resource;
  action.path = op->path;

  if (takes_id(op->semantics)) {
    std::optional<std::string> id = flow.bound_id(deps.bindings_for(operation_id));
    if (!id) id = pool.pick(resource.name, rng);
    if (!id) id = fresh_id(rng);
    action.id = *id;
    action.path = expand_path(op->path, *id);
  }

  switch (op->semantics) {
    case Semantics::kCreate:
    case Semantics::kReplace:
      action.body = generate_object(resource, rng);
      break;
    case Semantics::kMerge: {
      Json full = generate_object(resource, rng);
      std::vector<std::string> names;
      for (const auto& f : resource.fields) names.push_back(f.name);
      // Random nonempty strict subset (the whole set when only one field exists).
      std::size_t keep = names.size();
      if (names.size() >= 2) {
        keep = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(names.size()) - 1));
      }
      for (std::size_t i = 0; i < keep; ++i) {
        std::swap(names[i], names[i + rng.index(names.size() - i)]);
      }
      Json partial = Json::object();
      for (std::size_t i = 0; i < keep; ++i) partial[names[i]] = full[names[i]];
      action.body = std::move(partial);
      break;
    }
    default:
      break;
  }
  return action;
}

}  // namespace restcheck
