#include "restcheck/history.h"

#include <cctype>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "restcheck/error.h"

namespace restcheck {

namespace {

constexpr std::string_view kKnownKeys[] = {"index", "wallTime", "client", "kind",
                                           "opId",  "method",   "resource", "id",
                                           "body",  "output",   "status"};

void check_events(const History& history, const std::vector<std::size_t>& lines) {
  std::map<int, const HistoryEvent*> pending;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const HistoryEvent& e = history[i];
    const std::size_t line = lines[i];
    if (i > 0 && e.index <= history[i - 1].index) {
      throw HistoryError("event index not strictly increasing", line);
    }
    if (e.client < 0) throw HistoryError("negative client id", line);
    auto it = pending.find(e.client);
    if (e.kind == EventKind::kInvoke) {
      if (it != pending.end()) {
        throw HistoryError("invoke while client " + std::to_string(e.client) +
                               " has an outstanding request",
                           line);
      }
      if (e.output) throw HistoryError("invoke event carries an output", line);
      pending.emplace(e.client, &e);
    } else {
      if (it == pending.end()) throw HistoryError("unmatched completion", line);
      if (it->second->op_id != e.op_id || it->second->method != e.method) {
        throw HistoryError("completion does not match the client's pending invoke", line);
      }
      pending.erase(it);
    }
  }
}

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

std::string clock_text(std::int64_t wall_time_ms) {
  const std::time_t seconds = static_cast<std::time_t>(wall_time_ms / 1000);
  std::tm parts{};
  gmtime_r(&seconds, &parts);
  return two_digits(parts.tm_hour) + ":" + two_digits(parts.tm_min) + ":" +
         two_digits(parts.tm_sec);
}

std::string edn_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view kind_label(EventKind kind) {
  return kind == EventKind::kError ? "fail" : to_string(kind);
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kInvoke: return "invoke";
    case EventKind::kOk: return "ok";
    case EventKind::kError: return "error";
    case EventKind::kInfo: return "info";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::kInvoke, EventKind::kOk, EventKind::kError, EventKind::kInfo}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void validate_history(const History& history, std::size_t line_base) {
  std::vector<std::size_t> lines(history.size());
  for (std::size_t i = 0; i < lines.size(); ++i) lines[i] = i + line_base;
  check_events(history, lines);
}

Json event_to_json(const HistoryEvent& e) {
  Json j = Json::object();
  j["index"] = e.index;
  j["wallTime"] = e.wall_time;
  j["client"] = e.client;
  j["kind"] = std::string(to_string(e.kind));
  j["opId"] = e.op_id;
  j["method"] = std::string(to_string(e.method));
  j["resource"] = e.resource;
  if (e.id) j["id"] = *e.id;
  if (e.body) j["body"] = *e.body;
  if (e.output) j["output"] = *e.output;
  if (e.status) j["status"] = *e.status;
  return j;
}

HistoryEvent event_from_json(const Json& j) {
  if (!j.is_object()) throw HistoryError("event must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto k : kKnownKeys) known = known || k == key;
    if (!known) throw HistoryError("unknown key '" + key + "'");
  }
  auto required = [&](const char* key) -> const Json& {
    auto it = j.find(key);
    if (it == j.end()) throw HistoryError(std::string("missing key '") + key + "'");
    return *it;
  };
  HistoryEvent e;
  try {
    e.index = required("index").get<std::uint64_t>();
    e.wall_time = required("wallTime").get<std::int64_t>();
    e.client = required("client").get<int>();
    const auto kind = parse_event_kind(required("kind").get<std::string>());
    if (!kind) throw HistoryError("unknown event kind");
    e.kind = *kind;
    e.op_id = required("opId").get<std::string>();
    const auto method = parse_http_method(required("method").get<std::string>());
    if (!method) throw HistoryError("unknown method");
    e.method = *method;
    e.resource = required("resource").get<std::string>();
    if (auto it = j.find("id"); it != j.end()) e.id = it->get<std::string>();
    if (auto it = j.find("body"); it != j.end()) e.body = *it;
    if (auto it = j.find("output"); it != j.end()) e.output = *it;
    if (auto it = j.find("status"); it != j.end()) e.status = it->get<int>();
  } catch (const Json::exception& ex) {
    throw HistoryError(std::string("bad field type: ") + ex.what());
  }
  return e;
}

std::string serialize_history(const History& history) {
  std::string out;
  for (const auto& e : history) {
    out += event_to_json(e).dump();
    out.push_back('\n');
  }
  return out;
}

History parse_history(std::string_view text) {
  History history;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto parsed = try_parse_json(std::string(line));
    if (!parsed) throw HistoryError("malformed line", line_no);
    try {
      history.push_back(event_from_json(*parsed));
    } catch (const HistoryError& e) {
      throw HistoryError(e.what(), line_no);
    }
    lines.push_back(line_no);
  }
  check_events(history, lines);
  return history;
}

void save_history(const History& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << serialize_history(history);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

History load_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_history(buffer.str());
}

std::string render_edn(const Json& value) {
  switch (value.type()) {
    case Json::value_t::null:
      return "nil";
    case Json::value_t::string:
      return edn_string(value.get<std::string>());
    case Json::value_t::object: {
      std::string out = "{";
      bool first = true;
      for (const auto& [key, v] : value.items()) {
        if (!first) out += ", ";
        first = false;
        out += ":" + key + " " + render_edn(v);
      }
      return out + "}";
    }
    case Json::value_t::array: {
      std::string out = "(";
      bool first = true;
      for (const auto& v : value) {
        if (!first) out += " ";
        first = false;
        out += render_edn(v);
      }
      return out + ")";
    }
    default:
      return value.dump();
  }
}

std::string render_event(const HistoryEvent& e) {
  std::string line = clock_text(e.wall_time) + " :" + std::to_string(e.client) + " :" +
                     std::string(kind_label(e.kind)) + ", :" + lower(to_string(e.method));
  if (e.kind == EventKind::kInvoke) {
    if (e.body) line += ", " + render_edn(*e.body);
    if (e.id) line += ", :path " + edn_string(*e.id);
    return line;
  }
  // The path is implied when a create returns the new object or a delete
  // echoes the id it removed.
  const bool output_is_id = e.output && e.id && e.output->is_string() &&
                            e.output->get<std::string>() == *e.id;
  if (e.id && e.method != HttpMethod::kPost && !output_is_id) {
    line += ", :path " + edn_string(*e.id);
  }
  if (e.output) line += ", :output " + render_edn(*e.output);
  if (e.status && e.kind != EventKind::kOk) line += ", :status " + std::to_string(*e.status);
  return line;
}

std::string render_log(const History& history) {
  std::string out;
  for (const auto& e : history) {
    out += render_event(e);
    out.push_back('\n');
  }
  return out;
}

}  // namespace restcheck
