#include "restcheck/student.h"

namespace restcheck {

namespace {

constexpr std::string_view kStudentSpec = R"yaml(resources:
  - name: student
    idField: id
    fields:
      - name: firstName
        kind: string
        generator: name.first-name
        pattern: "[A-Z][a-z]+"
      - name: lastName
        kind: string
        generator: name.last-name
      - name: email
        kind: string
        generator: internet.email
      - name: age
        kind: integer
        min: 0
        max: 100
      - name: phone
        kind: string
        generator: phone.number
operations:
  - operationId: createStudent
    method: POST
    path: /students
    resource: student
    semantics: create
    links:
      - name: GetStudentByID
        targetOperationId: getStudent
        parameter: studentId
        expression: "$response.body#/id"
  - operationId: getStudent
    method: GET
    path: /students/{id}
    resource: student
    semantics: read-one
  - operationId: getAllStudents
    method: GET
    path: /students
    resource: student
    semantics: read-all
  - operationId: updateStudent
    method: PUT
    path: /students/{id}
    resource: student
    semantics: replace
  - operationId: patchStudent
    method: PATCH
    path: /students/{id}
    resource: student
    semantics: merge
  - operationId: deleteStudent
    method: DELETE
    path: /students/{id}
    resource: student
    semantics: delete
)yaml";

constexpr std::string_view kStudentWorkload = R"yaml(target: 127.0.0.1:8080
clients: 4
periodMillis: 1
durationSecs: 10
scenarios:
  - weight: 100
    flow: [createStudent, updateStudent, getAllStudents, getStudent, deleteStudent]
)yaml";

}  // namespace

std::string_view student_spec_yaml() { return kStudentSpec; }

const ServiceSpec& student_spec() {
  static const ServiceSpec spec = parse_service_spec(kStudentSpec);
  return spec;
}

std::string_view student_workload_yaml() { return kStudentWorkload; }

}  // namespace restcheck
