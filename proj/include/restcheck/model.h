#ifndef RESTCHECK_MODEL_H_
#define RESTCHECK_MODEL_H_

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "restcheck/json_util.h"
#include "restcheck/spec_model.h"

namespace restcheck {

// resource name -> (id -> stored object). Stored objects always carry their
// id field.
struct ModelState {
  std::map<std::string, std::map<std::string, Json>> resources;

  bool operator==(const ModelState&) const = default;
};

enum class ResultKind {
  kOk,
  kError,
  // The request may or may not have taken effect. Only the search produces
  // these, when it decides an indeterminate write did take effect.
  kUnknown,
};

// One completed operation as the sequential specification sees it.
struct ObservedOp {
  Semantics semantics = Semantics::kReadAll;
  std::string resource;
  std::string id_field = "id";
  std::optional<std::string> id;
  std::optional<Json> body;
  ResultKind result = ResultKind::kOk;
  Json output;  // kOk only; null when the response had no body
  int status = 0;  // kError only

  bool operator==(const ObservedOp&) const = default;
};

class StepResult {
 public:
  static StepResult accept(ModelState state) {
    StepResult r;
    r.state_ = std::move(state);
    return r;
  }
  // Accepts without changing anything. The result refers to `state`, which
  // has to outlive it.
  static StepResult keep(const ModelState& state) {
    StepResult r;
    r.base_ = &state;
    return r;
  }
  static StepResult reject(std::string reason) {
    StepResult r;
    r.reason_ = std::move(reason);
    return r;
  }

  bool accepted() const { return state_.has_value() || base_ != nullptr; }
  bool changed() const { return state_.has_value(); }
  const ModelState& state() const { return state_ ? *state_ : *base_; }
  ModelState take_state() { return state_ ? std::move(*state_) : *base_; }
  const std::string& reason() const { return reason_; }

 private:
  StepResult() = default;

  std::optional<ModelState> state_;
  const ModelState* base_ = nullptr;
  std::string reason_;
};

// Every resource of the spec mapped to an empty id map.
ModelState init_state(const ServiceSpec& spec);

// Applies `op` to `state`. Pure: the input state is never modified.
StepResult step(const ModelState& state, const ObservedOp& op);

// Byte string equal for two states iff the states are equal.
std::string canonical_encoding(const ModelState& state);

}  // namespace restcheck

#endif  // RESTCHECK_MODEL_H_
