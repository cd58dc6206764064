#ifndef RESTCHECK_FIXTURE_H_
#define RESTCHECK_FIXTURE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "restcheck/spec_model.h"

namespace restcheck {

// Concurrency behaviour of the reference service.
//   kAtomic:        every handler runs under one lock.
//   kCheckThenAct:  handlers check existence, sleep 0-5 ms, then write and
//                   re-read without holding the lock in between.
//   kLostUpdate:    PATCH does an unlocked read-modify-write; the rest is atomic.
//   kStaleReadAll:  read-all serves a snapshot refreshed every 50 ms.
enum class BugMode { kAtomic, kCheckThenAct, kLostUpdate, kStaleReadAll };

std::string_view to_string(BugMode mode);
std::optional<BugMode> parse_bug_mode(std::string_view text);

struct FixtureOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  BugMode mode = BugMode::kAtomic;
  bool allow_reset = false;
  std::uint64_t seed = 1;  // drives generated ids
};

// In-memory CRUD service serving every operation of a spec at its path.
// Created objects get a 12-character uppercase hexadecimal id.
class FixtureServer {
 public:
  FixtureServer(ServiceSpec spec, FixtureOptions options);
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  // Binds and serves on a background thread. Throws Error on bind failure.
  void start();
  // Binds and serves on the calling thread until stop() is called.
  void serve_forever();
  void stop();
  int port() const;
  std::string target() const;

  // Empties every resource.
  void reset();
  std::size_t object_count(std::string_view resource) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace restcheck

#endif  // RESTCHECK_FIXTURE_H_
