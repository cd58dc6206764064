#include "restcheck/model.h"

namespace restcheck {

namespace {

using Objects = std::map<std::string, Json>;

const Objects& objects_of(const ModelState& state, const std::string& resource) {
  static const Objects kEmpty;
  auto it = state.resources.find(resource);
  return it == state.resources.end() ? kEmpty : it->second;
}

std::optional<std::string> claimed_id(const ObservedOp& op) {
  if (!op.body || !op.body->is_object()) return std::nullopt;
  auto it = op.body->find(op.id_field);
  if (it == op.body->end()) return std::nullopt;
  return id_text(*it);
}

StepResult with_object(const ModelState& state, const ObservedOp& op, const std::string& id,
                       Json object) {
  ModelState next = state;
  next.resources[op.resource][id] = std::move(object);
  return StepResult::accept(std::move(next));
}

StepResult without_object(const ModelState& state, const ObservedOp& op, const std::string& id) {
  ModelState next = state;
  next.resources[op.resource].erase(id);
  return StepResult::accept(std::move(next));
}

// 404 asserts absence; 5xx and other 4xx responses leave the state alone and
// constrain nothing.
StepResult on_error(const ModelState& state, const ObservedOp& op, bool present) {
  if (op.status == 404) {
    return present ? StepResult::reject("404 for an id that is present")
                   : StepResult::keep(state);
  }
  return StepResult::keep(state);
}

StepResult step_create(const ModelState& state, const ObservedOp& op) {
  const Objects& objects = objects_of(state, op.resource);
  switch (op.result) {
    case ResultKind::kOk: {
      if (!op.output.is_object()) return StepResult::reject("create must return the created object");
      auto field = op.output.find(op.id_field);
      if (field == op.output.end()) {
        return StepResult::reject("created object lacks id field '" + op.id_field + "'");
      }
      const auto id = id_text(*field);
      if (!id) return StepResult::reject("created object has a malformed id");
      if (objects.count(*id)) return StepResult::reject("id " + *id + " already present");
      return with_object(state, op, *id, op.output);
    }
    case ResultKind::kError: {
      const auto claim = claimed_id(op);
      if (op.status == 409 && claim) {
        return objects.count(*claim) ? StepResult::keep(state)
                                     : StepResult::reject("conflict reported for an absent id");
      }
      return StepResult::keep(state);
    }
    case ResultKind::kUnknown: {
      if (!op.id) return StepResult::reject("indeterminate create without a resolved id");
      if (objects.count(*op.id)) return StepResult::reject("id " + *op.id + " already present");
      Json object = op.body && op.body->is_object() ? *op.body : Json::object();
      object[op.id_field] = *op.id;
      return with_object(state, op, *op.id, std::move(object));
    }
  }
  return StepResult::reject("unreachable");
}

StepResult step_read_one(const ModelState& state, const ObservedOp& op) {
  const Objects& objects = objects_of(state, op.resource);
  auto it = objects.find(*op.id);
  const bool present = it != objects.end();
  switch (op.result) {
    case ResultKind::kOk:
      if (!present) return StepResult::reject("id absent");
      if (it->second != op.output) return StepResult::reject("returned object differs from the stored object");
      return StepResult::keep(state);
    case ResultKind::kError:
      return on_error(state, op, present);
    case ResultKind::kUnknown:
      return StepResult::keep(state);
  }
  return StepResult::reject("unreachable");
}

StepResult step_read_all(const ModelState& state, const ObservedOp& op) {
  if (op.result != ResultKind::kOk) return StepResult::keep(state);
  if (!op.output.is_array()) return StepResult::reject("read-all must return a list");
  const Objects& objects = objects_of(state, op.resource);
  if (op.output.size() != objects.size()) {
    return StepResult::reject("returned collection has " + std::to_string(op.output.size()) +
                              " objects, expected " + std::to_string(objects.size()));
  }
  for (const auto& element : op.output) {
    if (!element.is_object()) return StepResult::reject("read-all element is not an object");
    auto field = element.find(op.id_field);
    if (field == element.end()) return StepResult::reject("read-all element lacks its id field");
    const auto id = id_text(*field);
    if (!id) return StepResult::reject("read-all element has a malformed id");
    auto stored = objects.find(*id);
    if (stored == objects.end()) return StepResult::reject("returned collection contains absent id " + *id);
    if (stored->second != element) {
      return StepResult::reject("returned collection has a stale object for id " + *id);
    }
  }
  // Equal sizes plus inclusion; duplicates would have made inclusion fail on size.
  std::map<std::string, int> seen;
  for (const auto& element : op.output) {
    if (++seen[*id_text(element[op.id_field])] > 1) {
      return StepResult::reject("returned collection repeats an id");
    }
  }
  return StepResult::keep(state);
}

StepResult step_update(const ModelState& state, const ObservedOp& op, bool merge) {
  const Objects& objects = objects_of(state, op.resource);
  auto it = objects.find(*op.id);
  const bool present = it != objects.end();
  if (op.result == ResultKind::kError) return on_error(state, op, present);
  if (!present) return StepResult::reject("id absent");

  Json updated;
  if (merge) {
    updated = it->second;
    if (op.body && op.body->is_object()) {
      for (const auto& [key, value] : op.body->items()) {
        if (key != op.id_field) updated[key] = value;
      }
    }
  } else {
    updated = op.body && op.body->is_object() ? *op.body : Json::object();
    updated[op.id_field] = it->second.contains(op.id_field) ? it->second.at(op.id_field)
                                                            : Json(*op.id);
  }
  if (op.result == ResultKind::kOk) {
    const char* what = merge ? "merge" : "replace";
    if (op.output.is_null()) {
      return StepResult::reject(std::string(what) + " must return the updated object");
    }
    if (op.output != updated) {
      return StepResult::reject(std::string("returned object differs from the ") + what +
                                " result");
    }
  }
  return with_object(state, op, *op.id, std::move(updated));
}

StepResult step_delete(const ModelState& state, const ObservedOp& op) {
  const Objects& objects = objects_of(state, op.resource);
  const bool present = objects.count(*op.id) > 0;
  if (op.result == ResultKind::kError) return on_error(state, op, present);
  if (!present) return StepResult::reject("id absent");
  if (op.result == ResultKind::kOk && !op.output.is_null()) {
    const auto echoed = id_text(op.output);
    if (!echoed || *echoed != *op.id) return StepResult::reject("delete returned a different id");
  }
  return without_object(state, op, *op.id);
}

}  // namespace

ModelState init_state(const ServiceSpec& spec) {
  ModelState state;
  for (const auto& r : spec.resources) state.resources[r.name];
  return state;
}

StepResult step(const ModelState& state, const ObservedOp& op) {
  if (takes_id(op.semantics) && !op.id) return StepResult::reject("operation has no id");
  switch (op.semantics) {
    case Semantics::kCreate: return step_create(state, op);
    case Semantics::kReadOne: return step_read_one(state, op);
    case Semantics::kReadAll: return step_read_all(state, op);
    case Semantics::kReplace: return step_update(state, op, /*merge=*/false);
    case Semantics::kMerge: return step_update(state, op, /*merge=*/true);
    case Semantics::kDelete: return step_delete(state, op);
  }
  return StepResult::reject("unknown semantics");
}

std::string canonical_encoding(const ModelState& state) {
  std::string out;
  for (const auto& [resource, objects] : state.resources) {
    out += resource;
    out.push_back('\x1d');
    for (const auto& [id, object] : objects) {
      out += id;
      out.push_back('\x1e');
      out += object.dump();
      out.push_back('\x1f');
    }
    out.push_back('\x1c');
  }
  return out;
}

}  // namespace restcheck
