#include "restcheck/checker.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "restcheck/error.h"

namespace restcheck {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

ObservedOp base_op(const HistoryEvent& invoke, const OperationSpec& op_spec,
                   const ResourceSpec& resource) {
  ObservedOp op;
  op.semantics = op_spec.semantics;
  op.resource = resource.name;
  op.id_field = resource.id_field;
  if (takes_id(op_spec.semantics)) op.id = invoke.id;
  op.body = invoke.body;
  return op;
}

std::optional<OpSpan> make_span(const HistoryEvent& invoke, const HistoryEvent* completion,
                                const ServiceSpec& spec) {
  const OperationSpec* op_spec = spec.find_operation(invoke.op_id);
  if (!op_spec) throw HistoryError("operation '" + invoke.op_id + "' is not in the spec");
  const ResourceSpec& resource = spec.resource_of(*op_spec);

  OpSpan span;
  span.op = base_op(invoke, *op_spec, resource);
  span.op_id = invoke.op_id;
  span.method = invoke.method;
  span.client = invoke.client;
  span.invoke_index = invoke.index;
  if (completion) span.recorded_completion = completion->index;

  const bool read = is_read(op_spec->semantics);
  bool indeterminate = completion == nullptr || completion->kind == EventKind::kInfo;
  if (completion && completion->kind == EventKind::kError && !read &&
      completion->status.value_or(0) >= 500) {
    indeterminate = true;
  }
  if (indeterminate) {
    if (read) return std::nullopt;  // an unanswered read has no effect
    span.determinate = false;
    span.op.result = ResultKind::kUnknown;
    return span;
  }
  span.complete_index = completion->index;
  if (completion->kind == EventKind::kOk) {
    span.op.result = ResultKind::kOk;
    span.op.output = completion->output.value_or(Json());
  } else {
    span.op.result = ResultKind::kError;
    span.op.status = completion->status.value_or(0);
  }
  return span;
}

void collect_output_ids(const Json& value, const std::string& id_field,
                        std::set<std::string>& out) {
  if (value.is_object()) {
    auto it = value.find(id_field);
    if (it != value.end()) {
      if (auto id = id_text(*it)) out.insert(*id);
    }
  } else if (value.is_array()) {
    for (const auto& v : value) collect_output_ids(v, id_field, out);
  } else if (auto id = id_text(value)) {
    out.insert(*id);
  }
}

// Each operation's admissible forms. Indeterminate creates get one form per
// candidate id; every other operation has exactly one.
std::vector<std::vector<ObservedOp>> alternatives_for(const std::vector<OpSpan>& spans) {
  const std::vector<std::string> candidates = unattributed_ids(spans);
  std::vector<std::vector<ObservedOp>> alts(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const OpSpan& s = spans[i];
    if (!s.determinate && s.op.semantics == Semantics::kCreate) {
      for (const auto& id : candidates) {
        ObservedOp op = s.op;
        op.id = id;
        alts[i].push_back(std::move(op));
      }
    } else {
      alts[i].push_back(s.op);
    }
  }
  return alts;
}

OpSpan resolved(const OpSpan& span, const ObservedOp& form) {
  OpSpan out = span;
  out.op = form;
  return out;
}

// Just-in-time linearization over a doubly linked list of call/return
// entries, as in Lowe's refinement of the Wing-Gold algorithm.
class Search {
 public:
  enum class Result { kLinearizable, kNonLinearizable, kLimit };

  Search(const std::vector<OpSpan>& spans, const std::vector<std::vector<ObservedOp>>& alts,
         ModelState init, const CheckLimits& limits, Clock::time_point deadline)
      : spans_(spans),
        alts_(alts),
        init_(std::move(init)),
        limits_(limits),
        deadline_(deadline) {
    build_list();
  }

  // When `capture_depth` is set the search stops at the first dead end with
  // that many operations linearized and records it as the witness.
  Result run(std::optional<std::size_t> capture_depth = std::nullopt);

  std::size_t best_depth() const { return best_depth_; }
  std::uint64_t states() const { return states_; }
  const std::vector<OpSpan>& witness() const { return witness_; }
  std::optional<std::size_t> offender() const { return offender_; }
  const std::string& offender_reason() const { return offender_reason_; }

 private:
  static constexpr int kNil = -1;

  struct Frame {
    int call;
    std::size_t alt;
    std::shared_ptr<const ModelState> state;
    std::uint32_t state_id;
  };

  void build_list();
  void lift(int call);
  void unlift(int call);
  std::uint32_t state_id(const ModelState& state);
  bool already_seen(std::size_t op, std::uint32_t next_state);
  void mark(std::size_t op);
  void unmark(std::size_t op);
  void capture(const std::vector<Frame>& stack, std::size_t offender, const ModelState& state);

  const std::vector<OpSpan>& spans_;
  const std::vector<std::vector<ObservedOp>>& alts_;
  ModelState init_;
  CheckLimits limits_;
  Clock::time_point deadline_;

  // Nodes 0..2n-1: call of op i at 2i, return at 2i+1. Node 2n is the head.
  std::vector<int> next_;
  std::vector<int> prev_;
  int head_ = 0;

  std::vector<std::uint64_t> linearized_;
  std::size_t linearized_count_ = 0;
  std::size_t full_words_ = 0;  // linearized_[0..full_words_) are all ones
  std::unordered_map<std::string, std::uint32_t> state_ids_;
  std::unordered_set<std::string> seen_;

  std::uint64_t states_ = 0;
  std::size_t best_depth_ = 0;
  std::vector<OpSpan> witness_;
  std::optional<std::size_t> offender_;
  std::string offender_reason_;
};

void Search::build_list() {
  const int n = static_cast<int>(spans_.size());
  next_.assign(2 * n + 1, kNil);
  prev_.assign(2 * n + 1, kNil);
  head_ = 2 * n;
  struct Key {
    std::uint64_t time;
    int node;
  };
  std::vector<Key> keys;
  keys.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    keys.push_back({spans_[i].invoke_index, 2 * i});
    keys.push_back({spans_[i].complete_index.value_or(kNever), 2 * i + 1});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return a.time != b.time ? a.time < b.time : a.node < b.node;
  });
  int last = head_;
  for (const auto& k : keys) {
    next_[last] = k.node;
    prev_[k.node] = last;
    last = k.node;
  }
  linearized_.assign((spans_.size() + 63) / 64, 0);
}

void Search::lift(int call) {
  const int ret = call + 1;
  next_[prev_[call]] = next_[call];
  if (next_[call] != kNil) prev_[next_[call]] = prev_[call];
  next_[prev_[ret]] = next_[ret];
  if (next_[ret] != kNil) prev_[next_[ret]] = prev_[ret];
}

void Search::unlift(int call) {
  const int ret = call + 1;
  next_[prev_[ret]] = ret;
  if (next_[ret] != kNil) prev_[next_[ret]] = ret;
  next_[prev_[call]] = call;
  if (next_[call] != kNil) prev_[next_[call]] = call;
}

void Search::mark(std::size_t op) {
  linearized_[op / 64] |= std::uint64_t{1} << (op % 64);
  ++linearized_count_;
  while (full_words_ < linearized_.size() &&
         linearized_[full_words_] == ~std::uint64_t{0}) {
    ++full_words_;
  }
}

void Search::unmark(std::size_t op) {
  linearized_[op / 64] &= ~(std::uint64_t{1} << (op % 64));
  --linearized_count_;
  full_words_ = std::min(full_words_, op / 64);
}

std::uint32_t Search::state_id(const ModelState& state) {
  if (!limits_.memoize) return 0;
  auto it = state_ids_.try_emplace(canonical_encoding(state),
                                   static_cast<std::uint32_t>(state_ids_.size()))
                .first;
  return it->second;
}

bool Search::already_seen(std::size_t op, std::uint32_t next_state) {
  if (!limits_.memoize) {
    ++states_;
    return false;
  }

  // Key: index of the first non-full word, the words up to the last set bit
  // (with `op` included), and the state id.
  mark(op);
  std::string key;
  const std::uint64_t first = full_words_;
  key.append(reinterpret_cast<const char*>(&first), sizeof first);
  std::size_t remaining = linearized_count_ - 64 * full_words_;
  for (std::size_t w = full_words_; remaining > 0 && w < linearized_.size(); ++w) {
    key.append(reinterpret_cast<const char*>(&linearized_[w]), sizeof(std::uint64_t));
    remaining -= static_cast<std::size_t>(std::popcount(linearized_[w]));
  }
  unmark(op);
  key.append(reinterpret_cast<const char*>(&next_state), sizeof next_state);
  const bool inserted = seen_.insert(std::move(key)).second;
  if (inserted) ++states_;
  return !inserted;
}

void Search::capture(const std::vector<Frame>& stack, std::size_t offender,
                     const ModelState& state) {
  witness_.clear();
  for (const auto& f : stack) {
    const auto op = static_cast<std::size_t>(f.call / 2);
    witness_.push_back(resolved(spans_[op], alts_[op][f.alt]));
  }
  offender_ = offender;
  offender_reason_.clear();
  for (const auto& form : alts_[offender]) {
    StepResult r = step(state, form);
    if (!r.accepted()) {
      offender_reason_ = r.reason();
      return;
    }
  }
  offender_reason_ = alts_[offender].empty()
                         ? "no candidate id for the indeterminate create"
                         : "every continuation after this operation fails";
}

Search::Result Search::run(std::optional<std::size_t> capture_depth) {
  std::vector<Frame> stack;
  auto state = std::make_shared<const ModelState>(init_);
  std::uint32_t current_id = state_id(*state);
  int entry = next_[head_];
  std::size_t first_alt = 0;
  std::uint64_t iterations = 0;

  while (true) {
    if ((++iterations & 0xff) == 0 && Clock::now() > deadline_) return Result::kLimit;
    if (limits_.memoize && seen_.size() >= limits_.max_states) return Result::kLimit;
    if (!limits_.memoize && states_ >= limits_.max_states) return Result::kLimit;

    if (entry == kNil) return Result::kLinearizable;
    const auto op = static_cast<std::size_t>(entry / 2);
    const bool is_call = entry % 2 == 0;

    if (is_call) {
      bool advanced = false;
      for (std::size_t alt = first_alt; alt < alts_[op].size(); ++alt) {
        StepResult r = step(*state, alts_[op][alt]);
        if (!r.accepted()) continue;
        const std::uint32_t next_id = r.changed() ? state_id(r.state()) : current_id;
        if (already_seen(op, next_id)) continue;
        stack.push_back(Frame{entry, alt, state, current_id});
        // Steps that change nothing keep sharing the previous state.
        if (r.changed()) state = std::make_shared<const ModelState>(r.take_state());
        current_id = next_id;
        mark(op);
        lift(entry);
        entry = next_[head_];
        first_alt = 0;
        advanced = true;
        break;
      }
      if (!advanced) {
        entry = next_[entry];
        first_alt = 0;
      }
      continue;
    }

    // A return entry: its operation has to be linearized before anything
    // later, and every option at this level failed.
    if (!spans_[op].determinate) {
      // Indeterminate returns sit at the end of the list, so every
      // determinate operation is already linearized; the rest never happened.
      return Result::kLinearizable;
    }
    if (stack.size() > best_depth_) best_depth_ = stack.size();
    if (capture_depth && stack.size() == *capture_depth) {
      capture(stack, op, *state);
      return Result::kNonLinearizable;
    }
    if (stack.empty()) return Result::kNonLinearizable;
    Frame top = std::move(stack.back());
    stack.pop_back();
    state = std::move(top.state);
    current_id = top.state_id;
    const auto top_op = static_cast<std::size_t>(top.call / 2);
    unmark(top_op);
    unlift(top.call);
    entry = top.call;
    first_alt = top.alt + 1;
  }
}

}  // namespace

std::vector<OpSpan> extract_spans(const History& history, const ServiceSpec& spec) {
  std::vector<OpSpan> spans;
  std::map<int, const HistoryEvent*> pending;
  for (const auto& e : history) {
    if (e.kind == EventKind::kInvoke) {
      if (pending.count(e.client)) {
        throw HistoryError("client " + std::to_string(e.client) + " invoked twice without completing");
      }
      pending[e.client] = &e;
      continue;
    }
    auto it = pending.find(e.client);
    if (it == pending.end()) throw HistoryError("unmatched completion (index " + std::to_string(e.index) + ")");
    if (auto span = make_span(*it->second, &e, spec)) spans.push_back(std::move(*span));
    pending.erase(it);
  }
  // Invocations still outstanding at the end of the history are indeterminate.
  for (const auto& [client, invoke] : pending) {
    if (auto span = make_span(*invoke, nullptr, spec)) spans.push_back(std::move(*span));
  }
  std::sort(spans.begin(), spans.end(), [](const OpSpan& a, const OpSpan& b) {
    return a.invoke_index < b.invoke_index;
  });
  return spans;
}

std::vector<std::string> unattributed_ids(const std::vector<OpSpan>& spans) {
  std::set<std::string> observed;
  std::set<std::string> created;
  for (const auto& s : spans) {
    if (s.op.result != ResultKind::kOk) continue;
    if (s.op.id) observed.insert(*s.op.id);
    collect_output_ids(s.op.output, s.op.id_field, observed);
    if (s.op.semantics == Semantics::kCreate && s.op.output.is_object()) {
      auto it = s.op.output.find(s.op.id_field);
      if (it != s.op.output.end()) {
        if (auto id = id_text(*it)) created.insert(*id);
      }
    }
  }
  std::vector<std::string> out;
  std::set_difference(observed.begin(), observed.end(), created.begin(), created.end(),
                      std::back_inserter(out));
  return out;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kLinearizable: return "linearizable";
    case Outcome::kNonLinearizable: return "non-linearizable";
    case Outcome::kInconclusive: return "inconclusive";
  }
  return "?";
}

Verdict check(const History& history, const ServiceSpec& spec, const CheckLimits& limits) {
  const auto start = Clock::now();
  const auto deadline = start + limits.timeout;
  const std::vector<OpSpan> spans = extract_spans(history, spec);
  const auto alts = alternatives_for(spans);
  const ModelState init = init_state(spec);

  Verdict verdict;
  Search search(spans, alts, init, limits, deadline);
  const Search::Result result = search.run();
  verdict.states_explored = search.states();
  switch (result) {
    case Search::Result::kLinearizable:
      verdict.outcome = Outcome::kLinearizable;
      break;
    case Search::Result::kLimit:
      verdict.outcome = Outcome::kInconclusive;
      verdict.reason = "search limit reached";
      break;
    case Search::Result::kNonLinearizable: {
      verdict.outcome = Outcome::kNonLinearizable;
      // Replay the same deterministic search, stopping at the deepest dead end.
      CheckLimits replay_limits = limits;
      replay_limits.max_states = std::numeric_limits<std::uint64_t>::max();
      Search replay(spans, alts, init, replay_limits, Clock::time_point::max());
      replay.run(search.best_depth());
      verdict.witness = replay.witness();
      if (replay.offender()) verdict.offender = spans[*replay.offender()];
      verdict.reason = replay.offender_reason();
      break;
    }
  }
  verdict.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return verdict;
}

namespace {

class BruteForce {
 public:
  BruteForce(std::vector<OpSpan> spans, std::vector<std::vector<ObservedOp>> alts, ModelState init)
      : spans_(std::move(spans)), alts_(std::move(alts)), init_(std::move(init)) {}

  bool any_linearizable() {
    std::vector<std::size_t> indeterminate;
    for (std::size_t i = 0; i < spans_.size(); ++i) {
      if (!spans_[i].determinate) indeterminate.push_back(i);
    }
    choice_.assign(spans_.size(), 0);
    return choose(indeterminate, 0);
  }

  std::uint64_t states() const { return states_; }

 private:
  // choice_[i]: 0 = excluded, k > 0 = included with alternative k-1.
  bool choose(const std::vector<std::size_t>& indeterminate, std::size_t next) {
    if (next == indeterminate.size()) return permute_all();
    const std::size_t op = indeterminate[next];
    for (std::size_t c = 0; c <= alts_[op].size(); ++c) {
      choice_[op] = c;
      if (choose(indeterminate, next + 1)) return true;
    }
    return false;
  }

  bool permute_all() {
    chosen_.clear();
    for (std::size_t i = 0; i < spans_.size(); ++i) {
      if (spans_[i].determinate) {
        chosen_.push_back({i, 0});
      } else if (choice_[i] > 0) {
        chosen_.push_back({i, choice_[i] - 1});
      }
    }
    placed_.assign(chosen_.size(), false);
    return extend(init_, 0);
  }

  bool extend(const ModelState& state, std::size_t depth) {
    if (depth == chosen_.size()) return true;
    for (std::size_t c = 0; c < chosen_.size(); ++c) {
      if (placed_[c] || !ready(c)) continue;
      const auto [op, alt] = chosen_[c];
      StepResult r = step(state, alts_[op][alt]);
      ++states_;
      if (!r.accepted()) continue;
      placed_[c] = true;
      const bool done = extend(r.state(), depth + 1);
      placed_[c] = false;
      if (done) return true;
    }
    return false;
  }

  // Every chosen operation that completed before this one started is placed.
  bool ready(std::size_t c) const {
    const OpSpan& candidate = spans_[chosen_[c].first];
    for (std::size_t o = 0; o < chosen_.size(); ++o) {
      if (!placed_[o] && o != c && spans_[chosen_[o].first].precedes(candidate)) return false;
    }
    return true;
  }

  std::vector<OpSpan> spans_;
  std::vector<std::vector<ObservedOp>> alts_;
  ModelState init_;
  std::vector<std::size_t> choice_;
  std::vector<std::pair<std::size_t, std::size_t>> chosen_;
  std::vector<bool> placed_;
  std::uint64_t states_ = 0;
};

std::string describe_result(const ObservedOp& op) {
  switch (op.result) {
    case ResultKind::kOk: return "output " + render_edn(op.output);
    case ResultKind::kError: return "status " + std::to_string(op.status);
    case ResultKind::kUnknown: return "an unknown result";
  }
  return "?";
}

}  // namespace

Verdict brute_force(const History& history, const ServiceSpec& spec) {
  const auto start = Clock::now();
  std::vector<OpSpan> spans = extract_spans(history, spec);
  std::size_t determinate = 0;
  for (const auto& s : spans) determinate += s.determinate ? 1 : 0;
  if (determinate > kBruteForceMaxDeterminate ||
      spans.size() - determinate > kBruteForceMaxIndeterminate) {
    throw Error("history too large for brute force (" + std::to_string(determinate) +
                " determinate, " + std::to_string(spans.size() - determinate) +
                " indeterminate operations)");
  }
  auto alts = alternatives_for(spans);
  BruteForce search(std::move(spans), std::move(alts), init_state(spec));
  Verdict verdict;
  verdict.outcome = search.any_linearizable() ? Outcome::kLinearizable : Outcome::kNonLinearizable;
  verdict.states_explored = search.states();
  verdict.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return verdict;
}

std::string explain(const Verdict& verdict, const History& history) {
  std::map<std::uint64_t, const HistoryEvent*> by_index;
  for (const auto& e : history) by_index[e.index] = &e;
  auto line_of = [&](std::optional<std::uint64_t> index) -> std::string {
    if (!index) return "(no completion recorded)";
    auto it = by_index.find(*index);
    return it == by_index.end() ? "(event " + std::to_string(*index) + " missing)"
                                : render_event(*it->second);
  };

  std::string out;
  const std::string stats = std::to_string(verdict.states_explored) + " states explored in " +
                            std::to_string(verdict.elapsed.count()) + " ms";
  switch (verdict.outcome) {
    case Outcome::kLinearizable:
      return "linearizable (" + stats + ")\n";
    case Outcome::kInconclusive:
      return "inconclusive: " + verdict.reason + " (" + stats + ")\n";
    case Outcome::kNonLinearizable:
      break;
  }
  out += "non-linearizable (" + stats + ")\n";
  out += "linearizable prefix (" + std::to_string(verdict.witness.size()) + " operations):\n";
  for (const auto& w : verdict.witness) {
    if (w.determinate) {
      out += "  " + line_of(w.recorded_completion) + "\n";
    } else {
      out += "  " + line_of(w.invoke_index) + "  [indeterminate, assumed applied";
      if (w.op.semantics == Semantics::kCreate && w.op.id) out += " with id " + *w.op.id;
      out += "]\n";
    }
  }
  if (verdict.offender) {
    const OpSpan& o = *verdict.offender;
    out += "offending operation: " + o.op_id + " (" + std::string(to_string(o.method)) +
           ") by client " + std::to_string(o.client) + "\n";
    out += "  " + line_of(o.invoke_index) + "\n";
    out += "  " + line_of(o.recorded_completion) + "\n";
    out += "reason: no linearization point admits " + describe_result(o.op);
    if (!verdict.reason.empty()) out += " (" + verdict.reason + ")";
    out += "\n";
  }
  return out;
}

}  // namespace restcheck
