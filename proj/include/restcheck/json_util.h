#ifndef RESTCHECK_JSON_UTIL_H_
#define RESTCHECK_JSON_UTIL_H_

#include <optional>
#include <string>

#include "json.hpp"

namespace restcheck {

using Json = nlohmann::json;

// Text form of a resource identifier: strings verbatim, numbers in their
// JSON spelling. Returns nullopt for null, objects, arrays and booleans.
std::optional<std::string> id_text(const Json& value);

// Parses `text` as JSON; returns nullopt instead of throwing.
std::optional<Json> try_parse_json(const std::string& text);

}  // namespace restcheck

#endif  // RESTCHECK_JSON_UTIL_H_
