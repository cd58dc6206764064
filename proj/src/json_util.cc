#include "restcheck/json_util.h"

#include "restcheck/error.h"

namespace restcheck {

SpecError::SpecError(const std::string& message, int line, int column)
    : Error(line > 0 ? message + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"
                     : message),
      line_(line),
      column_(column) {}

WorkloadError::WorkloadError(const std::string& message, int line, int column)
    : Error(line > 0 ? message + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"
                     : message),
      line_(line),
      column_(column) {}

PatternError::PatternError(const std::string& message, std::size_t position)
    : Error(message + " at position " + std::to_string(position)),
      position_(position) {}

HistoryError::HistoryError(const std::string& message, std::size_t line)
    : Error(line > 0 ? message + " at line " + std::to_string(line) : message),
      line_(line) {}

std::optional<std::string> id_text(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
  return std::nullopt;
}

std::optional<Json> try_parse_json(const std::string& text) {
  Json parsed = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

}  // namespace restcheck
