#include "restcheck/spec_model.h"

#include <algorithm>
#include <functional>
#include <set>

#include <yaml-cpp/yaml.h>

#include "restcheck/datagen.h"
#include "restcheck/error.h"
#include "restcheck/pattern.h"

namespace restcheck {

namespace {

constexpr std::string_view kIdPlaceholder = "{id}";
constexpr std::string_view kResponseBodyPrefix = "$response.body#/";

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& message) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw SpecError(message);
  throw SpecError(message, mark.line + 1, mark.column + 1);
}

void require_map(const YAML::Node& node, const std::string& what) {
  if (!node.IsMap()) fail_at(node, what + " must be a mapping");
}

void reject_unknown_keys(const YAML::Node& node,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& what) {
  for (const auto& entry : node) {
    const std::string key = entry.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail_at(entry.first, "unknown key '" + key + "' in " + what);
    }
  }
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail_at(node, what + " must be a scalar");
  return node.as<std::string>();
}

std::string required_scalar(const YAML::Node& parent, const char* key,
                            const std::string& what) {
  const YAML::Node node = parent[key];
  if (!node) fail_at(parent, what + " is missing '" + key + "'");
  return scalar(node, what + "." + key);
}

std::optional<std::int64_t> optional_int(const YAML::Node& parent, const char* key,
                                         const std::string& what) {
  const YAML::Node node = parent[key];
  if (!node) return std::nullopt;
  try {
    if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
    return node.as<std::int64_t>();
  } catch (const YAML::BadConversion&) {
    fail_at(node, what + "." + key + " must be an integer");
  }
}

std::optional<std::string> optional_scalar(const YAML::Node& parent, const char* key,
                                           const std::string& what) {
  const YAML::Node node = parent[key];
  if (!node) return std::nullopt;
  return scalar(node, what + "." + key);
}

FieldSpec load_field(const YAML::Node& node, const std::string& owner) {
  require_map(node, owner + " field");
  reject_unknown_keys(node,
                      {"name", "kind", "generator", "min", "max", "sizeMin",
                       "sizeMax", "pattern"},
                      owner + " field");
  FieldSpec field;
  field.name = required_scalar(node, "name", owner + " field");
  const std::string where = owner + "." + field.name;
  const std::string kind = required_scalar(node, "kind", where);
  const auto parsed_kind = parse_field_kind(kind);
  if (!parsed_kind) fail_at(node["kind"], "unknown field kind '" + kind + "'");
  field.kind = *parsed_kind;
  field.generator = optional_scalar(node, "generator", where);
  field.min = optional_int(node, "min", where);
  field.max = optional_int(node, "max", where);
  field.size_min = optional_int(node, "sizeMin", where);
  field.size_max = optional_int(node, "sizeMax", where);
  field.pattern = optional_scalar(node, "pattern", where);
  return field;
}

ResourceSpec load_resource(const YAML::Node& node) {
  require_map(node, "resource");
  reject_unknown_keys(node, {"name", "idField", "fields"}, "resource");
  ResourceSpec resource;
  resource.name = required_scalar(node, "name", "resource");
  if (const YAML::Node id = node["idField"]) {
    resource.id_field = scalar(id, resource.name + ".idField");
  }
  if (const YAML::Node fields = node["fields"]) {
    if (fields.IsNull()) return resource;
    if (!fields.IsSequence()) fail_at(fields, resource.name + ".fields must be a list");
    for (const auto& f : fields) resource.fields.push_back(load_field(f, resource.name));
  }
  return resource;
}

LinkSpec load_link(const YAML::Node& node, const std::string& owner) {
  require_map(node, owner + " link");
  reject_unknown_keys(node, {"name", "targetOperationId", "parameter", "expression"},
                      owner + " link");
  LinkSpec link;
  link.name = required_scalar(node, "name", owner + " link");
  const std::string where = owner + ".links." + link.name;
  link.target_operation_id = required_scalar(node, "targetOperationId", where);
  link.parameter = required_scalar(node, "parameter", where);
  link.expression = required_scalar(node, "expression", where);
  return link;
}

OperationSpec load_operation(const YAML::Node& node) {
  require_map(node, "operation");
  reject_unknown_keys(
      node, {"operationId", "method", "path", "resource", "semantics", "links"},
      "operation");
  OperationSpec op;
  op.operation_id = required_scalar(node, "operationId", "operation");
  const std::string& where = op.operation_id;
  const std::string method = required_scalar(node, "method", where);
  const auto parsed_method = parse_http_method(method);
  if (!parsed_method) fail_at(node["method"], "unknown method '" + method + "'");
  op.method = *parsed_method;
  op.path = required_scalar(node, "path", where);
  op.resource = required_scalar(node, "resource", where);
  const std::string semantics = required_scalar(node, "semantics", where);
  const auto parsed_semantics = parse_semantics(semantics);
  if (!parsed_semantics) {
    fail_at(node["semantics"], "unknown semantics '" + semantics + "'");
  }
  op.semantics = *parsed_semantics;
  if (const YAML::Node links = node["links"]) {
    if (!links.IsNull()) {
      if (!links.IsSequence()) fail_at(links, where + ".links must be a list");
      for (const auto& l : links) op.links.push_back(load_link(l, where));
    }
  }
  return op;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

bool returns_object(Semantics semantics) {
  return semantics == Semantics::kCreate || semantics == Semantics::kReadOne ||
         semantics == Semantics::kReplace || semantics == Semantics::kMerge;
}

void validate_field(const ResourceSpec& resource, const FieldSpec& field,
                    std::vector<Diagnostic>& out) {
  const std::string where = resource.name + "." + field.name;
  auto add = [&](std::string message) { out.push_back({where, std::move(message)}); };
  if (!is_identifier(field.name)) add("invalid field name");
  if (field.min && field.max && *field.min > *field.max) add("min exceeds max");
  if (field.size_min && field.size_max && *field.size_min > *field.size_max) {
    add("sizeMin exceeds sizeMax");
  }
  if ((field.size_min && *field.size_min < 0) || (field.size_max && *field.size_max < 0)) {
    add("size bounds must be non-negative");
  }
  if (field.kind != FieldKind::kInteger && (field.min || field.max)) {
    add("min/max apply only to integer fields");
  }
  if (field.kind != FieldKind::kString &&
      (field.size_min || field.size_max || field.pattern)) {
    add("size and pattern constraints apply only to string fields");
  }
  if (field.generator) {
    if (!GeneratorRegistry::builtin().contains(*field.generator)) {
      add("unknown generator '" + *field.generator + "'");
    } else if (field.kind != FieldKind::kString) {
      add("generator produces strings; field kind must be string");
    }
  }
  if (field.pattern && field.kind == FieldKind::kString) {
    try {
      const Pattern pattern = Pattern::parse(*field.pattern);
      const auto lo = static_cast<std::int64_t>(pattern.min_length());
      const auto hi = pattern.max_length();
      if (field.size_max && lo > *field.size_max) {
        add("pattern cannot satisfy size bounds");
      } else if (field.size_min && hi && static_cast<std::int64_t>(*hi) < *field.size_min) {
        add("pattern cannot satisfy size bounds");
      }
    } catch (const PatternError& e) {
      add(std::string("unsupported pattern: ") + e.what());
    }
  }
}

void validate_path(const OperationSpec& op, std::vector<Diagnostic>& out) {
  auto add = [&](std::string message) { out.push_back({op.operation_id, std::move(message)}); };
  if (op.path.empty() || op.path.front() != '/') add("path must start with '/'");
  const auto placeholder = op.path.find(kIdPlaceholder);
  const bool has_id = placeholder != std::string::npos;
  if (has_id && op.path.find(kIdPlaceholder, placeholder + 1) != std::string::npos) {
    add("path contains {id} more than once");
  }
  std::string stripped = op.path;
  if (has_id) stripped.erase(placeholder, kIdPlaceholder.size());
  if (stripped.find_first_of("{}") != std::string::npos) {
    add("unsupported path parameter (only {id} is allowed)");
  }
  const std::string sem(to_string(op.semantics));
  if (takes_id(op.semantics) && !has_id) add(sem + " semantics requires {id} in path");
  if (!takes_id(op.semantics) && has_id) add(sem + " semantics forbids {id} in path");
}

void find_link_cycles(const ServiceSpec& spec, std::vector<Diagnostic>& out) {
  // must-precede edges: source operation -> link target
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& op : spec.operations) {
    for (const auto& link : op.links) {
      if (spec.find_operation(link.target_operation_id)) {
        edges[op.operation_id].push_back(link.target_operation_id);
      }
    }
  }
  enum class Mark { kNone, kActive, kDone };
  std::map<std::string, Mark> marks;
  std::set<std::string> reported;
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    marks[node] = Mark::kActive;
    for (const auto& next : edges[node]) {
      if (marks[next] == Mark::kActive) {
        if (reported.insert(next).second) {
          out.push_back({next, "link cycle through " + next});
        }
      } else if (marks[next] == Mark::kNone) {
        visit(next);
      }
    }
    marks[node] = Mark::kDone;
  };
  for (const auto& op : spec.operations) {
    if (marks[op.operation_id] == Mark::kNone) visit(op.operation_id);
  }
}

}  // namespace

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::kString: return "string";
    case FieldKind::kInteger: return "integer";
    case FieldKind::kBoolean: return "boolean";
  }
  return "?";
}

std::string_view to_string(HttpMethod method) {
  switch (method) {
    case HttpMethod::kPost: return "POST";
    case HttpMethod::kGet: return "GET";
    case HttpMethod::kPut: return "PUT";
    case HttpMethod::kPatch: return "PATCH";
    case HttpMethod::kDelete: return "DELETE";
  }
  return "?";
}

std::string_view to_string(Semantics semantics) {
  switch (semantics) {
    case Semantics::kCreate: return "create";
    case Semantics::kReadOne: return "read-one";
    case Semantics::kReadAll: return "read-all";
    case Semantics::kReplace: return "replace";
    case Semantics::kMerge: return "merge";
    case Semantics::kDelete: return "delete";
  }
  return "?";
}

std::optional<FieldKind> parse_field_kind(std::string_view text) {
  for (auto k : {FieldKind::kString, FieldKind::kInteger, FieldKind::kBoolean}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<HttpMethod> parse_http_method(std::string_view text) {
  for (auto m : {HttpMethod::kPost, HttpMethod::kGet, HttpMethod::kPut,
                 HttpMethod::kPatch, HttpMethod::kDelete}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::optional<Semantics> parse_semantics(std::string_view text) {
  for (auto s : {Semantics::kCreate, Semantics::kReadOne, Semantics::kReadAll,
                 Semantics::kReplace, Semantics::kMerge, Semantics::kDelete}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

HttpMethod method_for(Semantics semantics) {
  switch (semantics) {
    case Semantics::kCreate: return HttpMethod::kPost;
    case Semantics::kReadOne:
    case Semantics::kReadAll: return HttpMethod::kGet;
    case Semantics::kReplace: return HttpMethod::kPut;
    case Semantics::kMerge: return HttpMethod::kPatch;
    case Semantics::kDelete: return HttpMethod::kDelete;
  }
  return HttpMethod::kGet;
}

bool takes_id(Semantics semantics) {
  return semantics == Semantics::kReadOne || semantics == Semantics::kReplace ||
         semantics == Semantics::kMerge || semantics == Semantics::kDelete;
}

bool is_read(Semantics semantics) {
  return semantics == Semantics::kReadOne || semantics == Semantics::kReadAll;
}

const FieldSpec* ResourceSpec::find_field(std::string_view field_name) const {
  for (const auto& f : fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

const ResourceSpec* ServiceSpec::find_resource(std::string_view name) const {
  for (const auto& r : resources) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const OperationSpec* ServiceSpec::find_operation(std::string_view operation_id) const {
  for (const auto& op : operations) {
    if (op.operation_id == operation_id) return &op;
  }
  return nullptr;
}

const ResourceSpec& ServiceSpec::resource_of(const OperationSpec& operation) const {
  const ResourceSpec* resource = find_resource(operation.resource);
  if (!resource) throw SpecError("unknown resource '" + operation.resource + "'");
  return *resource;
}

std::size_t ServiceSpec::link_count() const {
  std::size_t n = 0;
  for (const auto& op : operations) n += op.links.size();
  return n;
}

ServiceSpec load_service_spec(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw SpecError("syntax error: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  ServiceSpec spec;
  if (!root || root.IsNull()) return spec;
  require_map(root, "spec document");
  reject_unknown_keys(root, {"resources", "operations"}, "spec document");
  if (const YAML::Node resources = root["resources"]; resources && !resources.IsNull()) {
    if (!resources.IsSequence()) fail_at(resources, "resources must be a list");
    for (const auto& r : resources) spec.resources.push_back(load_resource(r));
  }
  if (const YAML::Node operations = root["operations"]; operations && !operations.IsNull()) {
    if (!operations.IsSequence()) fail_at(operations, "operations must be a list");
    for (const auto& o : operations) spec.operations.push_back(load_operation(o));
  }
  return spec;
}

ServiceSpec parse_service_spec(std::string_view text) {
  ServiceSpec spec = load_service_spec(text);
  const auto diagnostics = validate_spec(spec);
  if (!diagnostics.empty()) {
    std::string message = diagnostics.front().text();
    for (std::size_t i = 1; i < diagnostics.size(); ++i) {
      message += "; " + diagnostics[i].text();
    }
    throw SpecError(message);
  }
  return spec;
}

std::vector<Diagnostic> validate_spec(const ServiceSpec& spec) {
  std::vector<Diagnostic> out;
  std::set<std::string> resource_names;
  for (const auto& resource : spec.resources) {
    if (!is_identifier(resource.name)) out.push_back({resource.name, "invalid resource name"});
    if (!resource_names.insert(resource.name).second) {
      out.push_back({resource.name, "duplicate resource name"});
    }
    if (resource.id_field.empty()) out.push_back({resource.name, "idField must not be empty"});
    std::set<std::string> field_names;
    for (const auto& field : resource.fields) {
      if (!field_names.insert(field.name).second) {
        out.push_back({resource.name + "." + field.name, "duplicate field name"});
      }
      if (field.name == resource.id_field) {
        out.push_back({resource.name + "." + field.name, "idField must not be listed in fields"});
      }
      validate_field(resource, field, out);
    }
  }

  std::set<std::string> operation_ids;
  std::set<std::pair<HttpMethod, std::string>> routes;
  for (const auto& op : spec.operations) {
    const std::string& where = op.operation_id;
    if (!is_identifier(op.operation_id)) out.push_back({where, "invalid operationId"});
    if (!operation_ids.insert(op.operation_id).second) {
      out.push_back({where, "duplicate operationId"});
    }
    if (!spec.find_resource(op.resource)) {
      out.push_back({where, "unknown resource '" + op.resource + "'"});
    }
    if (method_for(op.semantics) != op.method) {
      out.push_back({where, std::string(to_string(op.semantics)) + " semantics requires " +
                                std::string(to_string(method_for(op.semantics)))});
    }
    validate_path(op, out);
    if (!routes.insert({op.method, op.path}).second) {
      out.push_back({where, "duplicate route " + std::string(to_string(op.method)) + " " +
                                op.path});
    }
    const ResourceSpec* resource = spec.find_resource(op.resource);
    for (const auto& link : op.links) {
      const std::string link_where = where + ".links." + link.name;
      if (!is_identifier(link.name)) out.push_back({link_where, "invalid link name"});
      if (!is_identifier(link.parameter)) out.push_back({link_where, "invalid link parameter"});
      const OperationSpec* target = spec.find_operation(link.target_operation_id);
      if (!target) {
        out.push_back({link_where, "unresolved link target '" + link.target_operation_id + "'"});
      } else if (!takes_id(target->semantics)) {
        out.push_back({link_where, "link target takes no id parameter"});
      } else if (target->resource != op.resource) {
        out.push_back({link_where, "link target operates on a different resource"});
      }
      const auto field = link_response_field(link.expression);
      if (!field) {
        out.push_back({link_where, "unsupported link expression '" + link.expression + "'"});
      } else if (!returns_object(op.semantics)) {
        out.push_back({link_where, "link source returns no object body"});
      } else if (resource && *field != resource->id_field && !resource->find_field(*field)) {
        out.push_back({link_where, "link expression addresses unknown field '" + *field + "'"});
      }
    }
  }
  find_link_cycles(spec, out);
  return out;
}

std::string serialize_service_spec(const ServiceSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "resources" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : spec.resources) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << r.name;
    out << YAML::Key << "idField" << YAML::Value << r.id_field;
    out << YAML::Key << "fields" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : r.fields) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << f.name;
      out << YAML::Key << "kind" << YAML::Value << std::string(to_string(f.kind));
      if (f.generator) out << YAML::Key << "generator" << YAML::Value << *f.generator;
      if (f.min) out << YAML::Key << "min" << YAML::Value << *f.min;
      if (f.max) out << YAML::Key << "max" << YAML::Value << *f.max;
      if (f.size_min) out << YAML::Key << "sizeMin" << YAML::Value << *f.size_min;
      if (f.size_max) out << YAML::Key << "sizeMax" << YAML::Value << *f.size_max;
      if (f.pattern) {
        out << YAML::Key << "pattern" << YAML::Value << YAML::DoubleQuoted << *f.pattern;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "operations" << YAML::Value << YAML::BeginSeq;
  for (const auto& op : spec.operations) {
    out << YAML::BeginMap;
    out << YAML::Key << "operationId" << YAML::Value << op.operation_id;
    out << YAML::Key << "method" << YAML::Value << std::string(to_string(op.method));
    out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << op.path;
    out << YAML::Key << "resource" << YAML::Value << op.resource;
    out << YAML::Key << "semantics" << YAML::Value << std::string(to_string(op.semantics));
    if (!op.links.empty()) {
      out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
      for (const auto& l : op.links) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << l.name;
        out << YAML::Key << "targetOperationId" << YAML::Value << l.target_operation_id;
        out << YAML::Key << "parameter" << YAML::Value << l.parameter;
        out << YAML::Key << "expression" << YAML::Value << YAML::DoubleQuoted << l.expression;
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::optional<std::string> link_response_field(std::string_view expression) {
  if (expression.substr(0, kResponseBodyPrefix.size()) != kResponseBodyPrefix) {
    return std::nullopt;
  }
  std::string_view field = expression.substr(kResponseBodyPrefix.size());
  if (!is_identifier(field)) return std::nullopt;
  return std::string(field);
}

void DependencyTable::add(const std::string& target_operation_id, LinkBinding binding) {
  bindings_[target_operation_id].push_back(std::move(binding));
}

const std::vector<LinkBinding>& DependencyTable::bindings_for(
    std::string_view operation_id) const {
  static const std::vector<LinkBinding> kNone;
  const auto it = bindings_.find(operation_id);
  return it == bindings_.end() ? kNone : it->second;
}

bool DependencyTable::is_dependent(std::string_view operation_id) const {
  return !bindings_for(operation_id).empty();
}

DependencyTable resolve_links(const ServiceSpec& spec) {
  DependencyTable table;
  for (const auto& op : spec.operations) {
    for (const auto& link : op.links) {
      const auto field = link_response_field(link.expression);
      if (!field) continue;
      table.add(link.target_operation_id,
                LinkBinding{op.operation_id, link.name, *field, link.parameter});
    }
  }
  return table;
}

}  // namespace restcheck
