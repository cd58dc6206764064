#ifndef RESTCHECK_SPEC_MODEL_H_
#define RESTCHECK_SPEC_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace restcheck {

enum class FieldKind { kString, kInteger, kBoolean };
enum class HttpMethod { kPost, kGet, kPut, kPatch, kDelete };
enum class Semantics { kCreate, kReadOne, kReadAll, kReplace, kMerge, kDelete };

std::string_view to_string(FieldKind kind);
std::string_view to_string(HttpMethod method);
std::string_view to_string(Semantics semantics);
std::optional<FieldKind> parse_field_kind(std::string_view text);
std::optional<HttpMethod> parse_http_method(std::string_view text);
std::optional<Semantics> parse_semantics(std::string_view text);

// The only method each semantics may be served by.
HttpMethod method_for(Semantics semantics);
// True for semantics whose request addresses a single resource by id.
bool takes_id(Semantics semantics);
bool is_read(Semantics semantics);

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kString;
  std::optional<std::string> generator;
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;
  std::optional<std::int64_t> size_min;
  std::optional<std::int64_t> size_max;
  std::optional<std::string> pattern;

  bool has_constraints() const {
    return min || max || size_min || size_max || pattern;
  }
  bool operator==(const FieldSpec&) const = default;
};

struct ResourceSpec {
  std::string name;
  std::string id_field = "id";
  std::vector<FieldSpec> fields;

  const FieldSpec* find_field(std::string_view field_name) const;
  bool operator==(const ResourceSpec&) const = default;
};

struct LinkSpec {
  std::string name;
  std::string target_operation_id;
  std::string parameter;
  std::string expression;

  bool operator==(const LinkSpec&) const = default;
};

struct OperationSpec {
  std::string operation_id;
  HttpMethod method = HttpMethod::kGet;
  std::string path;
  std::string resource;
  Semantics semantics = Semantics::kReadAll;
  std::vector<LinkSpec> links;

  bool operator==(const OperationSpec&) const = default;
};

struct ServiceSpec {
  std::vector<ResourceSpec> resources;
  std::vector<OperationSpec> operations;

  const ResourceSpec* find_resource(std::string_view name) const;
  const OperationSpec* find_operation(std::string_view operation_id) const;
  // Requires a validated spec.
  const ResourceSpec& resource_of(const OperationSpec& operation) const;
  std::size_t link_count() const;

  bool operator==(const ServiceSpec&) const = default;
};

struct Diagnostic {
  std::string location;
  std::string message;

  std::string text() const { return message + " at " + location; }
  bool operator==(const Diagnostic&) const = default;
};

// Structural parse only: YAML syntax, key names, value types and enum
// spellings. Throws SpecError with the offending position.
ServiceSpec load_service_spec(std::string_view text);

// load_service_spec followed by validate_spec; any diagnostic is raised as a
// SpecError.
ServiceSpec parse_service_spec(std::string_view text);

std::vector<Diagnostic> validate_spec(const ServiceSpec& spec);

std::string serialize_service_spec(const ServiceSpec& spec);

// Field addressed by a "$response.body#/<field>" expression.
std::optional<std::string> link_response_field(std::string_view expression);

struct LinkBinding {
  std::string source_operation_id;
  std::string link_name;
  std::string response_field;
  std::string parameter;

  bool operator==(const LinkBinding&) const = default;
};

// Inbound link bindings per target operation. An operation with at least one
// binding is dependent: its id parameter is preferably taken from a response
// of one of the listed source operations.
class DependencyTable {
 public:
  void add(const std::string& target_operation_id, LinkBinding binding);

  const std::vector<LinkBinding>& bindings_for(std::string_view operation_id) const;
  bool is_dependent(std::string_view operation_id) const;
  bool empty() const { return bindings_.empty(); }
  const std::map<std::string, std::vector<LinkBinding>, std::less<>>& all() const {
    return bindings_;
  }

  bool operator==(const DependencyTable&) const = default;

 private:
  std::map<std::string, std::vector<LinkBinding>, std::less<>> bindings_;
};

DependencyTable resolve_links(const ServiceSpec& spec);

}  // namespace restcheck

#endif  // RESTCHECK_SPEC_MODEL_H_
