#include "restcheck/workload.h"

#include <gtest/gtest.h>

#include <regex>
#include <thread>

#include "restcheck/error.h"
#include "restcheck/student.h"

namespace restcheck {
namespace {

const ServiceSpec& spec() { return student_spec(); }

TEST(WorkloadTest, ParsesStudentWorkload) {
  const Workload w = parse_workload(student_workload_yaml(), spec());
  ASSERT_EQ(w.scenarios.size(), 1u);
  EXPECT_EQ(w.scenarios[0].weight, 100);
  EXPECT_EQ(w.scenarios[0].flow,
            (std::vector<std::string>{"createStudent", "updateStudent", "getAllStudents",
                                      "getStudent", "deleteStudent"}));
  EXPECT_EQ(w.clients, 4);
  EXPECT_EQ(w.period_millis, 1);
  EXPECT_EQ(w.duration_secs, 10);
  EXPECT_EQ(w.target, "127.0.0.1:8080");
  EXPECT_FALSE(w.seed);
}

TEST(WorkloadTest, ParsesAllRunParameters) {
  const Workload w = parse_workload(
      "target: 127.0.0.1:9000\nclients: 5\nperiodMillis: 1\ndurationSecs: 30\nseed: 42\n"
      "scenarios:\n  - weight: 100\n    flow: [createStudent, getStudent]\n",
      spec());
  EXPECT_EQ(w.clients, 5);
  EXPECT_EQ(w.duration_secs, 30);
  EXPECT_EQ(w.seed, 42u);
  EXPECT_EQ(w.target, "127.0.0.1:9000");
}

TEST(WorkloadTest, BareScenarioMappingAccepted) {
  const Workload w = parse_workload(
      "scenarios:\n  weight: 100\n  flow: [createStudent, deleteStudent]\n", spec());
  ASSERT_EQ(w.scenarios.size(), 1u);
  EXPECT_EQ(w.scenarios[0].flow.size(), 2u);
}

TEST(WorkloadTest, UnknownOperationRejected) {
  try {
    parse_workload("scenarios:\n  - weight: 1\n    flow: [createStudent, fooBar]\n", spec());
    FAIL() << "expected WorkloadError";
  } catch (const WorkloadError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown operation 'fooBar'"), std::string::npos) << e.what();
  }
}

TEST(WorkloadTest, InvariantsEnforced) {
  const std::string flow = "scenarios:\n  - weight: 1\n    flow: [createStudent]\n";
  EXPECT_THROW(parse_workload("scenarios: []\n", spec()), WorkloadError);
  EXPECT_THROW(parse_workload("clients: 0\n" + flow, spec()), WorkloadError);
  EXPECT_THROW(parse_workload("durationSecs: 0\n" + flow, spec()), WorkloadError);
  EXPECT_THROW(parse_workload("periodMillis: -1\n" + flow, spec()), WorkloadError);
  EXPECT_THROW(parse_workload("scenarios:\n  - weight: 0\n    flow: [createStudent]\n", spec()),
               WorkloadError);
  EXPECT_THROW(parse_workload("scenarios:\n  - weight: 1\n    flow: []\n", spec()), WorkloadError);
  EXPECT_THROW(parse_workload("rampUp: 3\n" + flow, spec()), WorkloadError);
  EXPECT_THROW(parse_workload("scenarios: [\n", spec()), WorkloadError);
}

TEST(WorkloadTest, WeightedSelectionFollowsWeights) {
  Workload w;
  w.scenarios = {Scenario{90, {"createStudent"}}, Scenario{10, {"getAllStudents"}}};
  Rng rng(1);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += select_scenario_index(w, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.9, 0.02);
}

TEST(WorkloadTest, SingleScenarioAlwaysChosen) {
  Workload w;
  w.scenarios = {Scenario{3, {"createStudent"}}};
  Rng rng(2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_scenario_index(w, rng), 0u);
}

TEST(WorkloadTest, ThreeWaySelection) {
  Workload w;
  w.scenarios = {Scenario{1, {"a"}}, Scenario{2, {"b"}}, Scenario{7, {"c"}}};
  Rng rng(3);
  std::vector<int> counts(3);
  for (int i = 0; i < 20000; ++i) ++counts[select_scenario_index(w, rng)];
  EXPECT_NEAR(counts[0] / 20000.0, 0.1, 0.015);
  EXPECT_NEAR(counts[1] / 20000.0, 0.2, 0.015);
  EXPECT_NEAR(counts[2] / 20000.0, 0.7, 0.015);
}

TEST(IdPoolTest, AddRemovePick) {
  IdPool pool;
  Rng rng(1);
  EXPECT_FALSE(pool.pick("student", rng));
  pool.add("student", "A");
  pool.add("student", "B");
  pool.add("student", "A");
  EXPECT_EQ(pool.size("student"), 2u);
  pool.remove("student", "A");
  EXPECT_FALSE(pool.contains("student", "A"));
  EXPECT_EQ(pool.pick("student", rng), "B");
  pool.remove("student", "missing");
  EXPECT_EQ(pool.size("teacher"), 0u);
}

TEST(IdPoolTest, ConcurrentMutationIsSafe) {
  IdPool pool;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&pool, t] {
      Rng rng(static_cast<std::uint64_t>(t));
      for (int i = 0; i < 2000; ++i) {
        const std::string id = std::to_string(t) + ":" + std::to_string(i);
        pool.add("r", id);
        pool.pick("r", rng);
        if (i % 2) pool.remove("r", id);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(pool.size("r"), 4000u);
}

TEST(MaterializeTest, CreateCarriesFullBody) {
  IdPool pool;
  FlowContext flow;
  Rng rng(1);
  const Action a = materialize_step("createStudent", spec(), resolve_links(spec()), pool, rng, flow);
  EXPECT_EQ(a.method, HttpMethod::kPost);
  EXPECT_EQ(a.path, "/students");
  EXPECT_FALSE(a.id);
  ASSERT_TRUE(a.body);
  EXPECT_EQ(a.body->size(), 5u);
}

TEST(MaterializeTest, LinkBindingBeatsPool) {
  IdPool pool;
  pool.add("student", "POOLED");
  FlowContext flow;
  flow.record("createStudent", Json{{"id", "LINKED"}, {"age", 3}});
  Rng rng(2);
  const DependencyTable deps = resolve_links(spec());
  const Action get = materialize_step("getStudent", spec(), deps, pool, rng, flow);
  EXPECT_EQ(get.id, "LINKED");
  EXPECT_EQ(get.path, "/students/LINKED");
  // updateStudent has no inbound link, so it draws from the pool.
  const Action put = materialize_step("updateStudent", spec(), deps, pool, rng, flow);
  EXPECT_EQ(put.id, "POOLED");
  ASSERT_TRUE(put.body);
  EXPECT_EQ(put.body->size(), 5u);
}

TEST(MaterializeTest, EmptyPoolGivesFreshId) {
  IdPool pool;
  FlowContext flow;
  Rng rng(3);
  const Action a = materialize_step("deleteStudent", spec(), resolve_links(spec()), pool, rng, flow);
  ASSERT_TRUE(a.id);
  EXPECT_TRUE(std::regex_match(*a.id, std::regex("[0-9A-F]{12}"))) << *a.id;
  EXPECT_FALSE(a.body);
}

TEST(MaterializeTest, MergeBodyIsNonEmptyStrictSubset) {
  IdPool pool;
  pool.add("student", "X");
  FlowContext flow;
  Rng rng(4);
  std::set<std::size_t> sizes;
  for (int i = 0; i < 200; ++i) {
    const Action a = materialize_step("patchStudent", spec(), resolve_links(spec()), pool, rng, flow);
    ASSERT_TRUE(a.body);
    ASSERT_GE(a.body->size(), 1u);
    ASSERT_LT(a.body->size(), 5u);
    sizes.insert(a.body->size());
  }
  EXPECT_EQ(sizes.size(), 4u);
}

TEST(MaterializeTest, SameSeedSameActions) {
  const DependencyTable deps = resolve_links(spec());
  auto run = [&](std::uint64_t seed) {
    IdPool pool;
    FlowContext flow;
    Rng rng(seed);
    std::vector<Action> out;
    for (const char* op : {"createStudent", "updateStudent", "patchStudent", "getStudent"}) {
      out.push_back(materialize_step(op, spec(), deps, pool, rng, flow));
    }
    return out;
  };
  EXPECT_EQ(run(8), run(8));
  EXPECT_NE(run(8), run(9));
}

TEST(MaterializeTest, UnknownOperation) {
  IdPool pool;
  FlowContext flow;
  Rng rng(5);
  EXPECT_THROW(materialize_step("nope", spec(), resolve_links(spec()), pool, rng, flow), WorkloadError);
}

TEST(WorkloadTest, ExpandPathEncodesId) {
  EXPECT_EQ(expand_path("/students/{id}", "ABC123"), "/students/ABC123");
  EXPECT_EQ(expand_path("/students/{id}", "a b/c"), "/students/a%20b%2Fc");
  EXPECT_EQ(expand_path("/students/{id}/grades", "7"), "/students/7/grades");
}

}  // namespace
}  // namespace restcheck
