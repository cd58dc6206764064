#ifndef RESTCHECK_CHECKER_H_
#define RESTCHECK_CHECKER_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restcheck/history.h"
#include "restcheck/model.h"
#include "restcheck/spec_model.h"

namespace restcheck {

// One operation of a history: its observed result plus the interval between
// invocation and completion, measured in event indices.
struct OpSpan {
  ObservedOp op;
  std::string op_id;
  HttpMethod method = HttpMethod::kGet;
  int client = 0;
  std::uint64_t invoke_index = 0;
  // nullopt for indeterminate completions: the operation may take effect at
  // any point after its invocation, or never.
  std::optional<std::uint64_t> complete_index;
  bool determinate = true;
  // Index of the completion event actually recorded (info events included),
  // for reporting.
  std::optional<std::uint64_t> recorded_completion;

  // Real-time order: this span finished before `other` started.
  bool precedes(const OpSpan& other) const {
    return complete_index && *complete_index < other.invoke_index;
  }
  bool operator==(const OpSpan&) const = default;
};

// Pairs invocations with completions and classifies each operation.
// Indeterminate reads are dropped (they have no effect); 5xx or missing
// completions on writes become indeterminate spans. Throws HistoryError on an
// operation id the spec does not define.
std::vector<OpSpan> extract_spans(const History& history, const ServiceSpec& spec);

// Ids an indeterminate create may have produced: ids observed anywhere in the
// history that no determinate create returned. Sorted.
std::vector<std::string> unattributed_ids(const std::vector<OpSpan>& spans);

struct CheckLimits {
  std::uint64_t max_states = 10'000'000;
  std::chrono::milliseconds timeout{60'000};
  bool memoize = true;
};

enum class Outcome { kLinearizable, kNonLinearizable, kInconclusive };

std::string_view to_string(Outcome outcome);

struct Verdict {
  Outcome outcome = Outcome::kLinearizable;
  // Non-linearizable only: the longest linearizable prefix found, in
  // linearization order, with indeterminate creates resolved to a concrete id.
  std::vector<OpSpan> witness;
  std::optional<OpSpan> offender;
  std::string reason;
  std::uint64_t states_explored = 0;
  std::chrono::milliseconds elapsed{0};
};

// Wing-Gold style search with Lowe's just-in-time linearization and a cache
// of (linearized set, state) pairs.
Verdict check(const History& history, const ServiceSpec& spec, const CheckLimits& limits = {});

// Exhaustive enumeration of real-time-respecting orders and indeterminate
// subsets. Testing oracle for `check`; throws Error above 10 determinate or 3
// indeterminate operations.
Verdict brute_force(const History& history, const ServiceSpec& spec);

inline constexpr std::size_t kBruteForceMaxDeterminate = 10;
inline constexpr std::size_t kBruteForceMaxIndeterminate = 3;

// Human-readable report: the witness prefix in log style, then the offending
// operation and why no linearization point accepts it.
std::string explain(const Verdict& verdict, const History& history);

}  // namespace restcheck

#endif  // RESTCHECK_CHECKER_H_
