#ifndef RESTCHECK_STUDENT_H_
#define RESTCHECK_STUDENT_H_

#include <string_view>

#include "restcheck/spec_model.h"

namespace restcheck {

// Built-in student service: one resource and six CRUD operations, with
// createStudent linking its returned id into getStudent.
std::string_view student_spec_yaml();
const ServiceSpec& student_spec();

// Single-scenario workload over the student service
// (create, update, read-all, read-one, delete).
std::string_view student_workload_yaml();

}  // namespace restcheck

#endif  // RESTCHECK_STUDENT_H_
