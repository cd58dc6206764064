#include "restcheck/cli.h"

#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "restcheck/checker.h"
#include "restcheck/datagen.h"
#include "restcheck/error.h"
#include "restcheck/executor.h"
#include "restcheck/fixture.h"
#include "restcheck/history.h"
#include "restcheck/student.h"
#include "restcheck/workload.h"

namespace restcheck {

namespace {

constexpr char kTargetEnv[] = "JEPREST_TARGET";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) throw Error("cannot write " + path);
}

// An empty path selects the built-in student service.
ServiceSpec load_spec(const std::string& path) {
  if (path.empty()) return student_spec();
  return parse_service_spec(read_file(path));
}

struct SpecArgs {
  std::string spec_path;
};

struct RunArgs {
  std::string spec_path;
  std::string workload_path;
  std::string target;
  std::optional<int> clients;
  std::optional<std::int64_t> period_ms;
  std::optional<std::int64_t> duration_s;
  std::int64_t timeout_ms = 1000;
  std::optional<std::uint64_t> seed;
  std::string out = "history.jsonl";
};

struct CheckArgs {
  std::string history_path;
  std::string spec_path;
  std::uint64_t max_states = CheckLimits{}.max_states;
  double timeout_s = 60.0;
  bool explain = false;
};

struct PreviewArgs {
  std::string spec_path;
  std::string resource;
  int count = 3;
  std::optional<std::uint64_t> seed;
};

struct FixtureArgs {
  std::string spec_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string bug = "atomic";
  bool allow_reset = false;
  std::uint64_t seed = 1;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--spec", a.spec_path, "Service spec (YAML); built-in student spec if omitted");
  cmd->add_option("--workload", a.workload_path, "Workload file (YAML)")->required();
  cmd->add_option("--target", a.target, "host:port; overrides $JEPREST_TARGET and the workload");
  cmd->add_option("--clients", a.clients, "Number of concurrent clients")->check(CLI::PositiveNumber);
  cmd->add_option("--period-ms", a.period_ms, "Delay between iterations per client")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--duration-s", a.duration_s, "Run length in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--timeout-ms", a.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Seed for all randomness; random and printed if omitted");
  cmd->add_option("--out", a.out, "History output file (JSONL)");
}

void add_check_limits(CLI::App* cmd, CheckArgs& a) {
  cmd->add_option("--max-states", a.max_states, "Search state budget")->check(CLI::PositiveNumber);
  cmd->add_option("--timeout-s", a.timeout_s, "Search time budget")->check(CLI::PositiveNumber);
  cmd->add_flag("--explain", a.explain, "Print the counterexample");
}

CheckLimits limits_of(const CheckArgs& a) {
  CheckLimits limits;
  limits.max_states = a.max_states;
  limits.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout_s * 1000.0));
  return limits;
}

int exit_code_of(Outcome outcome) {
  switch (outcome) {
    case Outcome::kLinearizable: return kExitOk;
    case Outcome::kNonLinearizable: return kExitNonLinearizable;
    case Outcome::kInconclusive: return kExitInconclusive;
  }
  return kExitFailure;
}

std::uint64_t random_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

void print_warnings(const ServiceSpec& spec, std::ostream& err) {
  for (const auto& w : generator_precedence_warnings(spec)) err << w << "\n";
}

int cmd_validate(const SpecArgs& a, std::ostream& out, std::ostream& err) {
  const ServiceSpec spec = load_service_spec(read_file(a.spec_path));
  const auto diagnostics = validate_spec(spec);
  for (const auto& d : diagnostics) err << d.text() << "\n";
  if (!diagnostics.empty()) return kExitNonLinearizable;
  print_warnings(spec, err);
  out << "ok: " << spec.resources.size() << " resources, " << spec.operations.size()
      << " operations, " << spec.link_count() << " links\n";
  return kExitOk;
}

int cmd_preview(const PreviewArgs& a, std::ostream& out, std::ostream& err) {
  const ServiceSpec spec = load_spec(a.spec_path);
  print_warnings(spec, err);
  const std::uint64_t seed = a.seed.value_or(random_seed());
  if (!a.seed) err << "seed: " << seed << "\n";
  Rng rng(seed);
  for (const auto& r : spec.resources) {
    if (!a.resource.empty() && r.name != a.resource) continue;
    for (int i = 0; i < a.count; ++i) out << r.name << " " << generate_object(r, rng).dump() << "\n";
  }
  if (!a.resource.empty() && !spec.find_resource(a.resource)) {
    throw Error("unknown resource '" + a.resource + "'");
  }
  return kExitOk;
}

struct RunResult {
  History history;
  RunConfig config;
};

RunResult do_run(const ServiceSpec& spec, const RunArgs& a, std::ostream& err) {
  Workload workload = parse_workload(read_file(a.workload_path), spec);
  if (a.clients) workload.clients = *a.clients;
  if (a.period_ms) workload.period_millis = *a.period_ms;
  if (a.duration_s) workload.duration_secs = *a.duration_s;

  std::optional<Target> target;
  if (!a.target.empty()) {
    target = parse_target(a.target);
  } else if (const char* env = std::getenv(kTargetEnv); env && *env) {
    target = parse_target(env);
  }

  std::uint64_t seed;
  if (a.seed) {
    seed = *a.seed;
  } else if (workload.seed) {
    seed = *workload.seed;
  } else {
    seed = random_seed();
    err << "seed: " << seed << "\n";
  }

  RunConfig config = make_run_config(workload, target, seed);
  config.timeout = std::chrono::milliseconds(a.timeout_ms);
  History history = run_workload(spec, workload, config);
  save_history(history, a.out);
  return {std::move(history), config};
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const ServiceSpec spec = load_spec(a.spec_path);
  print_warnings(spec, err);
  const RunResult r = do_run(spec, a, err);
  out << "recorded " << r.history.size() << " events from " << r.config.clients << " clients against "
      << r.config.target.text() << " to " << a.out << "\n";
  return kExitOk;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const ServiceSpec spec = load_spec(a.spec_path);
  const History history = load_history(a.history_path);
  const Verdict verdict = check(history, spec, limits_of(a));
  const std::string report = explain(verdict, history);
  if (a.explain) {
    out << report;
  } else {
    out << report.substr(0, report.find('\n') + 1);
  }
  return exit_code_of(verdict.outcome);
}

int cmd_test(const RunArgs& r, const CheckArgs& c, const std::string& report_path,
             std::ostream& out, std::ostream& err) {
  const ServiceSpec spec = load_spec(r.spec_path);
  print_warnings(spec, err);
  const RunResult run = do_run(spec, r, err);
  const Verdict verdict = check(run.history, spec, limits_of(c));
  const std::string report = explain(verdict, run.history);

  std::ostringstream full;
  full << "target: " << run.config.target.text() << "\n"
       << "seed: " << run.config.seed << "\n"
       << "clients: " << run.config.clients << "\n"
       << "events: " << run.history.size() << "\n"
       << "history: " << r.out << "\n"
       << "verdict: " << report;
  write_file(report_path, full.str());

  out << "events: " << run.history.size() << "\n";
  out << (c.explain ? report : report.substr(0, report.find('\n') + 1));
  out << "history: " << r.out << ", report: " << report_path << "\n";
  return exit_code_of(verdict.outcome);
}

int cmd_render(const std::string& history_path, std::ostream& out) {
  out << render_log(load_history(history_path));
  return kExitOk;
}

int cmd_fixture(const FixtureArgs& a, std::ostream& out) {
  const auto mode = parse_bug_mode(a.bug);
  if (!mode) throw Error("unknown bug mode '" + a.bug + "'");
  FixtureOptions options;
  options.host = a.host;
  options.port = a.port;
  options.mode = *mode;
  options.allow_reset = a.allow_reset;
  options.seed = a.seed;

  // Block termination signals before the server threads start so that only
  // this thread receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  FixtureServer server(load_spec(a.spec_path), options);
  server.start();
  out << "fixture (" << to_string(*mode) << ") listening on " << server.target() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linearizability testing for REST services", "restcheck"};
  app.require_subcommand(1);

  SpecArgs validate_args;
  auto* validate = app.add_subcommand("validate-spec", "Check a service spec for errors");
  validate->add_option("--spec", validate_args.spec_path, "Service spec (YAML)")->required();

  PreviewArgs preview_args;
  auto* preview = app.add_subcommand("gen-preview", "Print sample generated objects");
  preview->add_option("--spec", preview_args.spec_path, "Service spec (YAML)");
  preview->add_option("--resource", preview_args.resource, "Only this resource");
  preview->add_option("--count", preview_args.count, "Objects per resource")
      ->check(CLI::PositiveNumber);
  preview->add_option("--seed", preview_args.seed, "Generator seed");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Drive a workload against a target and record the history");
  add_run_options(run, run_args);

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "Decide whether a recorded history is linearizable");
  check_cmd->add_option("--history", check_args.history_path, "History file (JSONL)")->required();
  check_cmd->add_option("--spec", check_args.spec_path, "Service spec (YAML)");
  add_check_limits(check_cmd, check_args);

  RunArgs test_run_args;
  CheckArgs test_check_args;
  std::string report_path = "report.txt";
  auto* test = app.add_subcommand("test", "run followed by check");
  add_run_options(test, test_run_args);
  add_check_limits(test, test_check_args);
  test->add_option("--report", report_path, "Verdict report output file");

  std::string render_path;
  auto* render = app.add_subcommand("render", "Print a history in log form");
  render->add_option("--history", render_path, "History file (JSONL)")->required();

  FixtureArgs fixture_args;
  auto* fixture = app.add_subcommand("fixture", "Serve the in-memory reference service");
  fixture->add_option("--spec", fixture_args.spec_path, "Service spec (YAML)");
  fixture->add_option("--host", fixture_args.host, "Bind address");
  fixture->add_option("--port", fixture_args.port, "Port (0 picks a free one)")
      ->check(CLI::Range(0, 65535));
  fixture->add_option("--bug", fixture_args.bug, "atomic | checkThenAct | lostUpdate | staleReadAll");
  fixture->add_flag("--allow-reset", fixture_args.allow_reset, "Expose POST /reset");
  fixture->add_option("--seed", fixture_args.seed, "Seed for generated ids");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_args, out, err);
    if (*preview) return cmd_preview(preview_args, out, err);
    if (*run) return cmd_run(run_args, out, err);
    if (*check_cmd) return cmd_check(check_args, out);
    if (*test) {
      test_check_args.spec_path = test_run_args.spec_path;
      return cmd_test(test_run_args, test_check_args, report_path, out, err);
    }
    if (*render) return cmd_render(render_path, out);
    if (*fixture) return cmd_fixture(fixture_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace restcheck
