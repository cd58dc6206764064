#ifndef RESTCHECK_TESTS_SUPPORT_SCENARIOS_H_
#define RESTCHECK_TESTS_SUPPORT_SCENARIOS_H_

#include <string>

#include "restcheck/history.h"

namespace restcheck::testing {

// Builds histories over the student service by appending events with
// consecutive indices.
class HistoryBuilder {
 public:
  HistoryBuilder& invoke(int client, const std::string& op_id, std::optional<std::string> id = {},
                         std::optional<Json> body = {});
  HistoryBuilder& ok(int client, const std::string& op_id, std::optional<std::string> id,
                     Json output, int status = 200);
  HistoryBuilder& fail(int client, const std::string& op_id, std::optional<std::string> id,
                       int status);
  HistoryBuilder& info(int client, const std::string& op_id, std::optional<std::string> id = {});
  History build() const { return history_; }

 private:
  HistoryEvent& add(int client, const std::string& op_id, EventKind kind);
  History history_;
};

Json student(const std::string& id, const std::string& first, int age);
Json student_body(const std::string& first, int age);

// A prior create of "71D1083D76BD"; then a PUT, a read-all, a read-one and a
// DELETE overlap. The reads see the old object, the DELETE succeeds and the
// PUT completes last with 200 and a null body.
History put_after_delete_history();

// The GET of an id observes the object after a DELETE of that id completed
// strictly before the GET was invoked.
History get_after_delete_history();

}  // namespace restcheck::testing

#endif  // RESTCHECK_TESTS_SUPPORT_SCENARIOS_H_
