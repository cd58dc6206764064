// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
// criterion fails.

#include <unistd.h>

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "restcheck/checker.h"
#include "restcheck/cli.h"
#include "restcheck/datagen.h"
#include "restcheck/executor.h"
#include "restcheck/fixture.h"
#include "restcheck/history.h"
#include "restcheck/student.h"
#include "restcheck/workload.h"
#include "support/history_gen.h"
#include "support/scenarios.h"

namespace fs = std::filesystem;
using namespace restcheck;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() /
                 ("restcheck-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

// 1. check and brute_force agree on random small histories.
Result checker_oracle_agreement() {
  constexpr int kHistories = 1000;
  constexpr double kBudgetSeconds = 60.0;
  Rng rng(20240601);
  testing::GenOptions options;
  options.max_determinate = 8;
  options.max_indeterminate = 2;
  int agree = 0, non_linearizable = 0;
  std::string first_mismatch;
  const auto start = Clock::now();
  for (int i = 0; i < kHistories; ++i) {
    const History h = testing::generate_history(rng, options);
    const Verdict fast = check(h, testing::item_spec());
    const Verdict slow = brute_force(h, testing::item_spec());
    if (fast.outcome == slow.outcome) {
      ++agree;
    } else if (first_mismatch.empty()) {
      first_mismatch = fmt(" first mismatch at history %d: check=%s brute_force=%s", i,
                           std::string(to_string(fast.outcome)).c_str(),
                           std::string(to_string(slow.outcome)).c_str());
    }
    if (slow.outcome == Outcome::kNonLinearizable) ++non_linearizable;
  }
  const double elapsed = seconds_since(start);
  return {agree == kHistories && elapsed < kBudgetSeconds,
          fmt("%d/%d agree (%d non-linearizable), %.1f s (limit %.0f s)", agree, kHistories,
              non_linearizable, elapsed, kBudgetSeconds) +
              first_mismatch};
}

// 2. Overlapping PUT and DELETE where the PUT returns 200 with a null body.
Result put_after_delete() {
  const History h = testing::put_after_delete_history();
  const auto start = Clock::now();
  const Verdict v = check(h, student_spec());
  const double elapsed = seconds_since(start);
  const bool offender_is_put = v.offender && v.offender->op_id == "updateStudent" &&
                               v.offender->method == HttpMethod::kPut;
  return {v.outcome == Outcome::kNonLinearizable && offender_is_put && elapsed < 1.0,
          fmt("verdict %s, offender %s, %.3f s (limit 1 s)",
              std::string(to_string(v.outcome)).c_str(),
              v.offender ? v.offender->op_id.c_str() : "none", elapsed)};
}

struct Campaign {
  std::vector<Outcome> outcomes;
  std::vector<std::size_t> events;
  double seconds = 0;
};

Campaign run_campaign(BugMode mode, int runs) {
  const Workload workload = parse_workload(student_workload_yaml(), student_spec());
  Campaign c;
  const auto start = Clock::now();
  for (int seed = 1; seed <= runs; ++seed) {
    FixtureOptions options;
    options.mode = mode;
    options.seed = static_cast<std::uint64_t>(seed);
    FixtureServer server(student_spec(), options);
    server.start();
    RunConfig config;
    config.target = Target{"127.0.0.1", server.port()};
    config.clients = 4;
    config.period_millis = 1;
    config.duration_secs = 10;
    config.seed = static_cast<std::uint64_t>(seed);
    const History h = run_workload(student_spec(), workload, config);
    server.stop();
    c.outcomes.push_back(check(h, student_spec()).outcome);
    c.events.push_back(h.size());
  }
  c.seconds = seconds_since(start);
  return c;
}

std::string describe(const Campaign& c) {
  std::string out = "[";
  for (std::size_t i = 0; i < c.outcomes.size(); ++i) {
    if (i) out += ", ";
    out += std::string(to_string(c.outcomes[i])) + "/" + std::to_string(c.events[i]) + " events";
  }
  return out + fmt("] in %.1f s", c.seconds);
}

// 3. The check-then-act fixture is caught in at least one of five runs.
Result check_then_act_detected() {
  const Campaign c = run_campaign(BugMode::kCheckThenAct, 5);
  const auto hits = std::count(c.outcomes.begin(), c.outcomes.end(), Outcome::kNonLinearizable);
  return {hits >= 1, fmt("%ld/5 non-linearizable (need >= 1): ", static_cast<long>(hits)) + describe(c)};
}

// 4. The atomic fixture is never flagged.
Result atomic_sound() {
  const Campaign c = run_campaign(BugMode::kAtomic, 5);
  const auto ok = std::count(c.outcomes.begin(), c.outcomes.end(), Outcome::kLinearizable);
  return {ok == 5, fmt("%ld/5 linearizable (need 5): ", static_cast<long>(ok)) + describe(c)};
}

// 5. Weighted scenario selection.
Result weighted_scheduling() {
  Workload w;
  w.scenarios = {Scenario{90, {"createStudent"}}, Scenario{10, {"getAllStudents"}}};
  Rng rng(7);
  constexpr int kDraws = 10000;
  int first = 0;
  for (int i = 0; i < kDraws; ++i) first += select_scenario_index(w, rng) == 0;
  const double freq = static_cast<double>(first) / kDraws;
  return {freq >= 0.88 && freq <= 0.92, fmt("scenario-1 frequency %.4f (want [0.88, 0.92])", freq)};
}

// 6. Generated values satisfy declared constraints.
Result datagen_constraints() {
  constexpr int kSamples = 10000;
  FieldSpec age{"age", FieldKind::kInteger};
  age.min = 0;
  age.max = 100;
  FieldSpec first{"firstName", FieldKind::kString};
  first.pattern = "[A-Z][a-z]+";
  FieldSpec description{"description", FieldKind::kString};
  description.pattern = "[A-Z][a-z]+";
  description.size_min = 20;
  description.size_max = 500;

  const std::regex capitalised("[A-Z][a-z]+");
  struct Case {
    const FieldSpec* field;
    std::function<bool(const Json&)> holds;
  };
  const std::vector<Case> cases = {
      {&age, [](const Json& v) { return v.is_number_integer() && v.get<long>() >= 0 && v.get<long>() <= 100; }},
      {&first, [&](const Json& v) { return v.is_string() && std::regex_match(v.get<std::string>(), capitalised); }},
      {&description,
       [&](const Json& v) {
         if (!v.is_string()) return false;
         const auto s = v.get<std::string>();
         return s.size() >= 20 && s.size() <= 500 && std::regex_match(s, capitalised);
       }},
  };
  int violations = 0;
  std::string counts;
  Rng rng(11);
  for (const auto& c : cases) {
    int bad = 0;
    for (int i = 0; i < kSamples; ++i) bad += !c.holds(generate_field(*c.field, rng));
    violations += bad;
    counts += fmt(" %s:%d", c.field->name.c_str(), bad);
  }
  return {violations == 0, fmt("%d violations over 3 x %d samples;", violations, kSamples) + counts};
}

// 7. JSONL round trip and log line shapes.
Result history_round_trip() {
  constexpr int kHistories = 1000;
  const fs::path file = scratch_dir() / "roundtrip.jsonl";
  Rng rng(3);
  int equal = 0;
  for (int i = 0; i < kHistories; ++i) {
    const History h = testing::generate_history(rng);
    save_history(h, file);
    equal += load_history(file) == h;
  }

  HistoryEvent del;
  del.client = 3;
  del.kind = EventKind::kOk;
  del.op_id = "deleteStudent";
  del.method = HttpMethod::kDelete;
  del.resource = "student";
  del.id = "498C98D9E8CB";
  del.output = Json("498C98D9E8CB");
  del.status = 200;
  HistoryEvent put = del;
  put.client = 2;
  put.op_id = "updateStudent";
  put.method = HttpMethod::kPut;
  put.id = "71D1083D76BD";
  put.output = Json();
  const std::string del_line = render_event(del);
  const std::string put_line = render_event(put);
  const bool del_shape = del_line.find(":3 :ok, :delete, :output \"498C98D9E8CB\"") != std::string::npos;
  const bool put_shape =
      put_line.find(":2 :ok, :put, :path \"71D1083D76BD\", :output nil") != std::string::npos;
  return {equal == kHistories && del_shape && put_shape,
          fmt("%d/%d round trips equal; delete line %s; put line %s", equal, kHistories,
              del_shape ? "ok" : ("mismatch: " + del_line).c_str(),
              put_shape ? "ok" : ("mismatch: " + put_line).c_str())};
}

std::string strip_wall_time(const fs::path& file) {
  std::ifstream in(file);
  std::string line, out;
  while (std::getline(in, line)) {
    Json event = Json::parse(line);
    event.erase("wallTime");
    out += event.dump() + "\n";
  }
  return out;
}

// 8. Two `test` runs with one seed produce the same history and verdict.
Result reproducibility() {
  const fs::path dir = scratch_dir();
  const fs::path workload = dir / "workload.yaml";
  {
    std::ofstream out(workload);
    out << "clients: 1\nperiodMillis: 400\ndurationSecs: 1\nscenarios:\n"
           "  - weight: 100\n"
           "    flow: [createStudent, updateStudent, getAllStudents, getStudent, deleteStudent]\n"
           "  - weight: 50\n"
           "    flow: [createStudent, patchStudent, getStudent]\n";
  }
  std::vector<std::string> histories, verdicts;
  std::vector<int> codes;
  for (int run = 0; run < 2; ++run) {
    FixtureOptions options;
    options.seed = 99;
    FixtureServer server(student_spec(), options);
    server.start();
    const fs::path history = dir / ("repro-" + std::to_string(run) + ".jsonl");
    const fs::path report = dir / ("repro-" + std::to_string(run) + ".txt");
    std::ostringstream out, err;
    codes.push_back(run_cli({"test", "--workload", workload.string(), "--target", server.target(),
                             "--seed", "424242", "--out", history.string(), "--report",
                             report.string()},
                            out, err));
    server.stop();
    histories.push_back(strip_wall_time(history));
    const std::string text = out.str();
    verdicts.push_back(text.substr(text.find("events:"), text.find('(') - text.find("events:")));
  }
  const bool same_history = !histories[0].empty() && histories[0] == histories[1];
  const bool same_verdict = codes[0] == codes[1] && verdicts[0] == verdicts[1];
  const auto lines = std::count(histories[0].begin(), histories[0].end(), '\n');
  return {same_history && same_verdict && codes[0] == kExitOk,
          fmt("histories %s (%ld events), verdicts %s (exit %d, %d)",
              same_history ? "identical" : "differ", static_cast<long>(lines),
              same_verdict ? "identical" : "differ", codes[0], codes[1])};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria = {
      {"checker-oracle agreement", checker_oracle_agreement},
      {"put after delete is non-linearizable", put_after_delete},
      {"check-then-act fixture detected", check_then_act_detected},
      {"atomic fixture linearizable", atomic_sound},
      {"weighted scheduling 90/10", weighted_scheduling},
      {"datagen constraints", datagen_constraints},
      {"history round trip and log shape", history_round_trip},
      {"reproducible test runs", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("%s [%zu] %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  std::error_code ec;
  fs::remove_all(scratch_dir(), ec);
  return failed == 0 ? 0 : 1;
}
