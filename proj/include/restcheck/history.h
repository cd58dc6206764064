#ifndef RESTCHECK_HISTORY_H_
#define RESTCHECK_HISTORY_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restcheck/json_util.h"
#include "restcheck/spec_model.h"

namespace restcheck {

enum class EventKind { kInvoke, kOk, kError, kInfo };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct HistoryEvent {
  std::uint64_t index = 0;
  // Milliseconds since the Unix epoch. Informational; `index` orders events.
  std::int64_t wall_time = 0;
  int client = 0;
  EventKind kind = EventKind::kInvoke;
  std::string op_id;
  HttpMethod method = HttpMethod::kGet;
  std::string resource;
  // Path id for id-taking requests; output id on create completions.
  std::optional<std::string> id;
  std::optional<Json> body;
  // Present on completions. May hold JSON null (a 2xx without a body).
  std::optional<Json> output;
  std::optional<int> status;

  bool is_completion() const { return kind != EventKind::kInvoke; }
  bool operator==(const HistoryEvent&) const = default;
};

using History = std::vector<HistoryEvent>;

// Throws HistoryError when indices are not strictly increasing or a client's
// events do not alternate invoke/completion. `line_base` offsets the
// reported line numbers (event i is reported at line i + line_base).
void validate_history(const History& history, std::size_t line_base = 1);

Json event_to_json(const HistoryEvent& event);
HistoryEvent event_from_json(const Json& value);

// JSONL, one event per line, absent optionals omitted.
std::string serialize_history(const History& history);
History parse_history(std::string_view text);
void save_history(const History& history, const std::filesystem::path& path);
History load_history(const std::filesystem::path& path);

// Log-style rendering: wall clock, :client, :kind, :method, then body, path
// and output, e.g.
//   11:59:59 :3 :ok, :delete, :output "498C98D9E8CB"
std::string render_event(const HistoryEvent& event);
std::string render_log(const History& history);

// EDN-flavoured text for a JSON value: maps as {:k v, ...}, arrays as (...),
// null as nil.
std::string render_edn(const Json& value);

}  // namespace restcheck

#endif  // RESTCHECK_HISTORY_H_
